#!/usr/bin/env python3
"""Pilot calibration for the shipped scenario configs.

Runs a candidate parameter set on the sparse and dispersive comparison
grids and reports, per algorithm: first-phase steady-state misalignment
(mean over the last 10% of pre-change samples), per-seed recovery times at
the 3 dB margin, final misalignment, and the post-convergence
sign-agreement over active taps.

Calibration procedure (documented for reproducibility):
 1. Fix mu so the first adaptation settles well before the path change.
 2. Pick kappa0 for fixed_zap: as large as possible while the sparse
    steady state stays within ~1 dB of LMS (attraction visible, bias not
    dominant).
 3. Tune gamma for liu / proposed_l1 / proposed_norm so their first-phase
    steady state lands within 1 dB of fixed_zap.
 4. Choose You's kappa0 (large), eta, kappa_min (small) so kappa freezes
    well before the change; verify its steady state also matches.
 5. Check the recovery ordering proposed_norm << you, you >= fixed_zap,
    and the dispersive final misalignment of proposed_norm vs fixed_zap.
"""

import argparse
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from zapvss.harness import (AlgorithmConfig, ChannelSpec, ScenarioConfig,
                            recovery_time, run_all)


def algorithms(params):
    return [
        AlgorithmConfig("lms", "lms"),
        AlgorithmConfig("fixed_zap", "fixed_zap",
                        {"kappa0": params["zap_kappa0"]}),
        AlgorithmConfig("you", "you", {
            "kappa0": params["you_kappa0"], "eta": params["you_eta"],
            "kappa_min": params["you_kappa_min"]}),
        AlgorithmConfig("liu", "liu", {
            "lambda": params["liu_lambda"], "alpha": params["alpha"],
            "gamma": params["liu_gamma"]}),
        AlgorithmConfig("proposed_l1", "proposed_l1", {
            "alpha": params["alpha"], "gamma": params["pl1_gamma"]}),
        AlgorithmConfig("proposed_norm", "proposed_norm", {
            "alpha": params["alpha"], "gamma": params["pnorm_gamma"]}),
    ]


def scenario(kind, params, seeds):
    # channel seed pairs picked for matched l2 gain, so the two phases share
    # one noise floor and "steady state + margin" is reachable after the change
    if kind == "sparse":
        before = ChannelSpec(kind="sparse", active_count=16, seed=297)
        after = ChannelSpec(kind="sparse", active_count=16, seed=310)
    else:
        before = ChannelSpec(kind="dispersive", seed=303)
        after = ChannelSpec(kind="dispersive", seed=304)
    return ScenarioConfig(
        L=512, N=10000, snr_db=30.0, mu=params["mu"],
        channel_before=before, channel_after=after, change_at=5000,
        algorithms=algorithms(params), seeds=list(seeds))


def steady_db(trace, change_at):
    ns = trace.sample_indices()
    mis = trace.misalignment_curve()
    pre = mis[ns < change_at]
    tail = max(1, math.ceil(0.1 * pre.size))
    return float(np.mean(pre[-tail:]))


def sign_tail(trace, change_at):
    ns = trace.sample_indices()
    sig = np.array([s.sign_agreement for s in trace.samples])
    pre = sig[ns < change_at]
    tail = max(1, math.ceil(0.1 * pre.size))
    return float(np.mean(pre[-tail:]))


def kappa_tail(trace, change_at):
    ns = trace.sample_indices()
    kap = trace.kappa_curve()
    pre = kap[ns < change_at]
    tail = max(1, math.ceil(0.1 * pre.size))
    return float(np.mean(pre[-tail:]))


def report(kind, cfg, traces):
    print(f"--- {kind} grid: mu={cfg.mu} seeds={cfg.seeds}")
    for alg in cfg.algorithms:
        runs = [t for t in traces if t.algorithm == alg.name]
        steadies = [steady_db(t, cfg.change_at) for t in runs]
        finals = [t.final_misalignment_db for t in runs]
        recs = [recovery_time(t, cfg.change_at, 3.0) for t in runs]
        rec_txt = ",".join("-" if r is None else str(r) for r in recs)
        mean_rec = (float(np.mean([r for r in recs if r is not None]))
                    if any(r is not None for r in recs) else float("nan"))
        signs = [sign_tail(t, cfg.change_at) for t in runs]
        kmax = max(float(np.max(t.kappa_curve())) for t in runs)
        kss = np.mean([kappa_tail(t, cfg.change_at) for t in runs])
        print(f"{alg.name:14s} steady={np.mean(steadies):7.2f} dB  "
              f"final={np.mean(finals):7.2f} dB  rec_mean={mean_rec:7.0f}  "
              f"sign={np.mean(signs):5.3f}  k_ss={kss:.2e}  "
              f"k_max={kmax:.2e}  rec=[{rec_txt}]")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--mu", type=float, default=0.002)
    ap.add_argument("--zap-kappa0", type=float, default=1e-5)
    ap.add_argument("--you-kappa0", type=float, default=2.5e-4)
    ap.add_argument("--you-eta", type=float, default=0.45)
    ap.add_argument("--you-kappa-min", type=float, default=5e-6)
    ap.add_argument("--liu-lambda", type=float, default=0.01)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--liu-gamma", type=float, default=6e-3)
    ap.add_argument("--pl1-gamma", type=float, default=3e-3)
    ap.add_argument("--pnorm-gamma", type=float, default=0.15)
    ap.add_argument("--kind", choices=("sparse", "dispersive", "both"),
                    default="both")
    args = ap.parse_args()
    params = {
        "mu": args.mu, "zap_kappa0": args.zap_kappa0,
        "you_kappa0": args.you_kappa0, "you_eta": args.you_eta,
        "you_kappa_min": args.you_kappa_min, "liu_lambda": args.liu_lambda,
        "alpha": args.alpha, "liu_gamma": args.liu_gamma,
        "pl1_gamma": args.pl1_gamma, "pnorm_gamma": args.pnorm_gamma,
    }
    kinds = ("sparse", "dispersive") if args.kind == "both" else (args.kind,)
    for kind in kinds:
        cfg = scenario(kind, params, range(1, args.seeds + 1))
        traces = run_all(cfg, max_workers=1)
        report(kind, cfg, traces)


if __name__ == "__main__":
    main()
