"""Scenario runner: full seeded runs, multi-seed aggregation, recovery-time
measurement, and the ground-truth oracles used by the test suite."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import Channel, generate_dispersive, generate_sparse, load_channel
from .filtercore import DivergenceError, FilterState, step
from .metrics import (ACTIVE_TAPS, MetricSample, misalignment_db,
                      sign_agreement, smoothed_mse)
from .signal import ChannelSchedule, generate_input, synthesize_desired
from .stepsize import make_controller

MSE_BETA = 0.01      # smoothing constant for the recorded error power
RECOVERY_HOLD = 100  # recorded samples the recovery margin must hold


@dataclass
class ChannelSpec:
    """How to obtain a channel: generator parameters or a file path."""

    kind: str  # 'sparse' | 'dispersive' | 'file'
    active_count: int | None = None
    seed: int | None = None
    decay: float = 0.0
    path: str | None = None

    def __post_init__(self):
        if self.kind == "sparse":
            if self.active_count is None or self.seed is None:
                raise ValueError("sparse channel spec requires active_count and seed")
        elif self.kind == "dispersive":
            if self.seed is None:
                raise ValueError("dispersive channel spec requires seed")
        elif self.kind == "file":
            if self.path is None:
                raise ValueError("file channel spec requires file=<path>")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    def realize(self, L: int) -> Channel:
        if self.kind == "sparse":
            return generate_sparse(L, self.active_count, self.seed)
        if self.kind == "dispersive":
            return generate_dispersive(L, self.seed, self.decay)
        ch = load_channel(self.path)
        if ch.L != L:
            raise ValueError(
                f"channel file {self.path} has L={ch.L}, scenario expects L={L}")
        return ch


@dataclass
class AlgorithmConfig:
    """Named controller configuration; params hold the kind-specific keys."""

    name: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    """Full experiment description for one comparison grid."""

    L: int
    N: int
    snr_db: float
    mu: float
    channel_before: ChannelSpec
    algorithms: list[AlgorithmConfig]
    seeds: list[int]
    channel_after: ChannelSpec | None = None
    change_at: int | None = None
    sigma_x: float = 1.0
    record_every: int = 1

    def __post_init__(self):
        if self.L <= 1:
            raise ValueError(f"L must be > 1, got {self.L}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not (self.mu > 0.0 and math.isfinite(self.mu)):
            raise ValueError(f"mu must be > 0 and finite, got {self.mu}")
        if not (self.sigma_x > 0.0 and math.isfinite(self.sigma_x)):
            raise ValueError(f"sigma_x must be > 0, got {self.sigma_x}")
        if self.record_every < 1:
            raise ValueError(f"record_every must be >= 1, got {self.record_every}")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"snr_db must be real or +inf, got {self.snr_db}")
        if self.change_at is not None:
            if not 0 < self.change_at < self.N:
                raise ValueError(
                    f"change_at must be in (0, N={self.N}), got {self.change_at}")
            if self.channel_after is None:
                raise ValueError("change_at requires a channel_after spec")
        elif self.channel_after is not None:
            raise ValueError("channel_after requires change_at")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        names = [a.name for a in self.algorithms]
        if len(set(names)) != len(names):
            raise ValueError("algorithm names must be unique")
        for alg in self.algorithms:  # fail fast on bad controller parameters
            make_controller(alg.kind, alg.params, self.mu)


@dataclass
class RunTrace:
    """Recorded time series for one (algorithm, seed) run."""

    algorithm: str
    seed: int
    samples: list
    final_misalignment_db: float
    diverged_at: int | None = None

    def sample_indices(self) -> np.ndarray:
        return np.array([s.n for s in self.samples], dtype=np.int64)

    def misalignment_curve(self) -> np.ndarray:
        return np.array([s.misalignment_db for s in self.samples])

    def kappa_curve(self) -> np.ndarray:
        return np.array([s.kappa for s in self.samples])


@dataclass
class AlgorithmAggregate:
    """Multi-seed summary for one algorithm of a comparison grid."""

    name: str
    n: np.ndarray
    mean_misalignment_db: np.ndarray
    mean_final_misalignment_db: float
    mean_recovery_time: float | None
    not_recovered: int
    included_seeds: list[int]
    diverged: list[tuple[int, int]]


def build_schedule(cfg: ScenarioConfig) -> ChannelSchedule:
    before = cfg.channel_before.realize(cfg.L)
    if cfg.change_at is None:
        return ChannelSchedule(((0, before),))
    after = cfg.channel_after.realize(cfg.L)
    return ChannelSchedule(((0, before), (cfg.change_at, after)))


def derive_stream_seeds(seed: int) -> tuple[int, int]:
    """Deterministic (input_seed, noise_seed) pair for one run seed."""
    state = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def run_scenario(cfg: ScenarioConfig, algorithm: str, seed: int) -> RunTrace:
    """One deterministic run of one algorithm on one seed.

    Per sample: regressor, a-priori error, controller kappa, weight update,
    then metrics of the updated weights against the channel active at that
    sample, recorded every ``record_every`` samples. Weights start at zero.
    A divergence stops the run and is recorded in ``diverged_at``.
    """
    alg = next((a for a in cfg.algorithms if a.name == algorithm), None)
    if alg is None:
        raise ValueError(f"unknown algorithm name {algorithm!r}")
    schedule = build_schedule(cfg)
    input_seed, noise_seed = derive_stream_seeds(seed)
    x = generate_input(cfg.N, input_seed, cfg.sigma_x)
    desired = synthesize_desired(x, schedule, cfg.snr_db, noise_seed)
    controller = make_controller(alg.kind, alg.params, cfg.mu)

    L = cfg.L
    xp = np.concatenate([np.zeros(L - 1), x])
    spans = list(schedule.spans(cfg.N))
    state = FilterState(np.zeros(L), 0)
    samples: list[MetricSample] = []
    mse = 0.0
    diverged_at = None
    si = 0
    for n in range(cfg.N):
        while si + 1 < len(spans) and n >= spans[si + 1][0]:
            si += 1
        h = spans[si][2].taps
        r = xp[n:n + L][::-1]
        try:
            e, kappa, state = step(state, r, desired.d[n], cfg.mu, controller)
        except DivergenceError as err:
            diverged_at = err.sample_index if err.sample_index is not None else n
            break
        mse = smoothed_mse(mse, e, MSE_BETA)
        if n % cfg.record_every == 0:
            samples.append(MetricSample(
                n=n,
                misalignment_db=misalignment_db(h, state.w),
                kappa=kappa,
                error=e,
                sign_agreement=sign_agreement(h, state.w, ACTIVE_TAPS),
                smoothed_mse=mse,
            ))
    final = samples[-1].misalignment_db if samples else math.nan
    return RunTrace(algorithm=algorithm, seed=seed, samples=samples,
                    final_misalignment_db=final, diverged_at=diverged_at)


def residual_error(h, w, x) -> float:
    """Ground-truth a-priori error (h - w).x of the noiseless system."""
    h = _taps(h)
    if len(h) != len(w) or len(h) != len(x):
        raise ValueError("h, w, x must share one length")
    return float(np.dot(h - np.asarray(w, dtype=np.float64), x))


def oracle_delta_projected(h, w, x) -> float:
    """Distance estimate computed from the true residual error instead of
    the observable error; test oracle only."""
    h = _taps(h)
    if len(h) != len(w) or len(h) != len(x):
        raise ValueError("h, w, x must share one length")
    den = float(np.dot(x, x))
    if den == 0.0:
        return 0.0
    eps = residual_error(h, w, x)
    return abs(eps * float(np.dot(x, np.sign(w)))) / den


def oracle_delta_l1(h, w) -> float:
    """True averaged l1 sparseness distance |  ||w||_1 - ||h||_1  | / L."""
    h = _taps(h)
    w = np.asarray(w, dtype=np.float64)
    if len(h) != len(w):
        raise ValueError("h and w must share one length")
    return abs(float(np.sum(np.abs(w))) - float(np.sum(np.abs(h)))) / len(h)


def _taps(h) -> np.ndarray:
    return h.taps if isinstance(h, Channel) else np.asarray(h, dtype=np.float64)


def recovery_time(trace: RunTrace, change_at: int | None,
                  margin_db: float = 3.0) -> int | None:
    """Samples (relative to change_at) until the trace re-enters its
    pre-change steady state plus ``margin_db``, held for RECOVERY_HOLD
    consecutive recorded samples. None when it never recovers.

    The pre-change steady state is the mean misalignment over the last 10%
    of recorded samples before the change.
    """
    if change_at is None:
        raise ValueError("change_at is required")
    if margin_db <= 0.0:
        raise ValueError(f"margin_db must be > 0, got {margin_db}")
    ns = trace.sample_indices()
    mis = trace.misalignment_curve()
    pre = mis[ns < change_at]
    post_mask = ns >= change_at
    if pre.size == 0 or not post_mask.any():
        raise ValueError(f"change_at={change_at} outside the recorded trace")
    tail = max(1, math.ceil(0.1 * pre.size))
    threshold = float(np.mean(pre[-tail:])) + margin_db
    post_ns = ns[post_mask]
    ok = mis[post_mask] <= threshold
    if ok.size < RECOVERY_HOLD:
        return None
    counts = np.cumsum(ok.astype(np.int64))
    window = counts[RECOVERY_HOLD - 1:] - np.concatenate(
        ([0], counts[:-RECOVERY_HOLD]))
    hits = np.flatnonzero(window == RECOVERY_HOLD)
    if hits.size == 0:
        return None
    return int(post_ns[hits[0]] - change_at)


def _run_pair(task):
    cfg, name, seed = task
    return run_scenario(cfg, name, seed)


def resolve_workers(n_tasks: int, max_workers: int | None = None) -> int:
    """Worker count for a grid; the ZAPVSS_THREADS env var caps it."""
    if max_workers is None:
        env = os.environ.get("ZAPVSS_THREADS")
        if env is not None:
            try:
                max_workers = int(env)
            except ValueError:
                raise ValueError(
                    f"ZAPVSS_THREADS must be an integer, got {env!r}") from None
        else:
            max_workers = os.cpu_count() or 1
    return max(1, min(max_workers, n_tasks))


def run_all(cfg: ScenarioConfig, max_workers: int | None = None) -> list[RunTrace]:
    """Every (algorithm, seed) run of the grid, in config order.

    Runs are independent; they execute on a process pool when more than one
    worker is available. The returned order never depends on scheduling.
    """
    tasks = [(cfg, alg.name, seed) for alg in cfg.algorithms for seed in cfg.seeds]
    workers = resolve_workers(len(tasks), max_workers)
    if workers == 1:
        return [_run_pair(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_pair, tasks, chunksize=1))


def aggregate(cfg: ScenarioConfig, traces: list[RunTrace],
              margin_db: float = 3.0) -> list[AlgorithmAggregate]:
    """Per-algorithm pointwise dB-mean curves and recovery summaries.

    Diverged runs are excluded from every mean and reported in ``diverged``.
    """
    out = []
    for alg in cfg.algorithms:
        runs = [t for t in traces if t.algorithm == alg.name]
        included = [t for t in runs if t.diverged_at is None]
        diverged = [(t.seed, t.diverged_at) for t in runs
                    if t.diverged_at is not None]
        if included:
            ns = included[0].sample_indices()
            curves = np.vstack([t.misalignment_curve() for t in included])
            mean_curve = curves.mean(axis=0)
            mean_final = float(np.mean([t.final_misalignment_db
                                        for t in included]))
        else:
            ns = np.array([], dtype=np.int64)
            mean_curve = np.array([])
            mean_final = math.nan
        mean_rec = None
        not_rec = 0
        if cfg.change_at is not None and included:
            times = [recovery_time(t, cfg.change_at, margin_db)
                     for t in included]
            reached = [t for t in times if t is not None]
            not_rec = len(times) - len(reached)
            mean_rec = float(np.mean(reached)) if reached else None
        out.append(AlgorithmAggregate(
            name=alg.name, n=ns, mean_misalignment_db=mean_curve,
            mean_final_misalignment_db=mean_final,
            mean_recovery_time=mean_rec, not_recovered=not_rec,
            included_seeds=[t.seed for t in included], diverged=diverged))
    return out


def compare(cfg: ScenarioConfig, margin_db: float = 3.0,
            max_workers: int | None = None) -> list[AlgorithmAggregate]:
    """Run the whole grid and aggregate per algorithm."""
    return aggregate(cfg, run_all(cfg, max_workers), margin_db)
