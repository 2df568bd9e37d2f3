"""White Gaussian input, regressor windows, and the SNR-calibrated desired
signal with a scheduled echo-path change."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import Channel


@dataclass(frozen=True, eq=False)
class ChannelSchedule:
    """Ordered (start_index, channel) segments covering the whole run.

    The first segment must start at 0, start indices must strictly
    increase, and every channel must share one length.
    """

    segments: tuple

    def __post_init__(self):
        segs = tuple((int(start), ch) for start, ch in self.segments)
        if not segs:
            raise ValueError("a schedule needs at least one segment")
        if segs[0][0] != 0:
            raise ValueError("the first segment must start at index 0")
        starts = [start for start, _ in segs]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment start indices must strictly increase")
        L = segs[0][1].L
        if any(ch.L != L for _, ch in segs):
            raise ValueError("all channels in a schedule must share one length")
        object.__setattr__(self, "segments", segs)

    @property
    def L(self) -> int:
        return self.segments[0][1].L

    def channel_at(self, n: int) -> Channel:
        active = self.segments[0][1]
        for start, ch in self.segments:
            if n < start:
                break
            active = ch
        return active

    def spans(self, N: int):
        """Yield (start, stop, channel) slices covering [0, N)."""
        starts = [start for start, _ in self.segments] + [N]
        for (start, ch), stop in zip(self.segments, starts[1:]):
            if start >= N:
                break
            yield start, min(stop, N), ch


@dataclass(frozen=True, eq=False)
class DesiredSignal:
    """Observed signal d = clean + noise and the calibrated noise power."""

    d: np.ndarray
    clean: np.ndarray
    noise_variance: float


def generate_input(N: int, seed: int, sigma_x: float = 1.0) -> np.ndarray:
    """N i.i.d. normal(0, sigma_x^2) samples, deterministic in (N, seed,
    sigma_x); the sigma_x=s output is exactly s times the sigma_x=1 output."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not (sigma_x > 0.0 and math.isfinite(sigma_x)):
        raise ValueError(f"sigma_x must be > 0, got {sigma_x}")
    return np.random.default_rng(seed).standard_normal(N) * sigma_x


def regressor_at(x, n: int, L: int) -> np.ndarray:
    """Window [x(n), x(n-1), ..., x(n-L+1)] with zeros before the start."""
    x = np.asarray(x, dtype=np.float64)
    if not 0 <= n < x.size:
        raise ValueError(f"sample index {n} outside [0, {x.size})")
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    out = np.zeros(L)
    k = min(L, n + 1)
    out[:k] = x[n - k + 1:n + 1][::-1]
    return out


def synthesize_desired(x, schedule: ChannelSchedule, snr_db: float,
                       noise_seed: int) -> DesiredSignal:
    """Filter x through the scheduled channels and add white Gaussian noise.

    The noise power is calibrated against the empirical power of the full
    clean sequence, mean(clean^2) / 10^(snr_db/10), so the realized SNR of
    each run matches the configured one. snr_db=inf disables the noise.
    Deterministic in all arguments.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < 1:
        raise ValueError("input sequence must be non-empty")
    if math.isnan(snr_db) or snr_db == -math.inf:
        raise ValueError(f"snr_db must be a real value or +inf, got {snr_db}")
    N = x.size
    clean = np.empty(N)
    for start, stop, ch in schedule.spans(N):
        clean[start:stop] = np.convolve(x, ch.taps)[start:stop]
    if math.isinf(snr_db):
        return DesiredSignal(d=clean.copy(), clean=clean, noise_variance=0.0)
    noise_variance = float(np.mean(clean**2)) / 10.0 ** (snr_db / 10.0)
    noise = math.sqrt(noise_variance) * np.random.default_rng(
        noise_seed).standard_normal(N)
    return DesiredSignal(d=clean + noise, clean=clean,
                         noise_variance=noise_variance)
