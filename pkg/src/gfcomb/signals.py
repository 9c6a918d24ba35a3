"""Uniformly sampled complex envelopes and pulse generators.

A pulse "duration" is always its intensity FWHM.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MIN_SAMPLES_PER_DURATION = 16
_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True, eq=False)
class Envelope:
    """Slowly varying amplitude sampled at ``t0 + k*dt``."""

    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex, copy=True)
        if samples.ndim != 1:
            raise ValueError("envelope samples must be one-dimensional")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("envelope samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self.samples))

    @property
    def t_end(self):
        return self.t0 + self.dt * (len(self.samples) - 1)

    @property
    def intensity(self):
        return np.abs(self.samples) ** 2

    def scaled(self, factor):
        return Envelope(self.t0, self.dt, self.samples * factor)

    def at(self, times):
        """Linearly interpolated amplitude at ``times``; zero outside the span."""
        times = np.asarray(times, dtype=float)
        x = (times - self.t0) / self.dt
        n = len(self.samples)
        out = np.zeros(times.shape, dtype=complex)
        inside = (x >= -1e-9) & (x <= n - 1 + 1e-9)
        xi = np.clip(x[inside], 0, n - 1)
        lo = np.minimum(np.floor(xi).astype(int), n - 2) if n > 1 else np.zeros_like(xi, int)
        frac = xi - lo
        if n == 1:
            out[inside] = self.samples[0]
            return out
        out[inside] = self.samples[lo] * (1 - frac) + self.samples[lo + 1] * frac
        return out

    def resample(self, t0, dt, count):
        return Envelope(t0, dt, self.at(t0 + dt * np.arange(count)))

    def window(self, t_a, t_b):
        """Samples with ``t_a <= t < t_b`` (half-open, so windows add up)."""
        t = self.times
        eps = 1e-9 * self.dt
        mask = (t >= t_a - eps) & (t < t_b - eps)
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            return Envelope(t_a, self.dt, np.zeros(0))
        return Envelope(t[idx[0]], self.dt, self.samples[idx])


def energy(e):
    """Discrete energy ``sum |a_k|^2 dt``."""
    return float(np.sum(np.abs(e.samples) ** 2) * e.dt)


def _check_resolution(duration, dt):
    if duration / dt < MIN_SAMPLES_PER_DURATION:
        raise ValueError(
            f"grid too coarse: {duration / dt:.1f} samples across duration {duration:g} s "
            f"(need >= {MIN_SAMPLES_PER_DURATION})")


def _gaussian_samples(times, center, duration):
    sigma_amp = duration * _FWHM_TO_SIGMA * math.sqrt(2.0)
    return np.exp(-((times - center) ** 2) / (2 * sigma_amp ** 2))


def gaussian(duration, center=0.0, energy=1.0, t0=None, dt=None, count=None):
    """Real Gaussian pulse with intensity FWHM ``duration``.

    Grid defaults: ``dt = duration/100`` and a span of +-4 durations around
    ``center``.
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    if energy < 0:
        raise ValueError("energy must be >= 0")
    dt = duration / 100 if dt is None else dt
    _check_resolution(duration, dt)
    if t0 is None:
        t0 = center - 4 * duration
    if count is None:
        count = int(math.ceil((center + 4 * duration - t0) / dt)) + 1
    times = t0 + dt * np.arange(count)
    a = _gaussian_samples(times, center, duration).astype(complex)
    norm = np.sum(np.abs(a) ** 2) * dt
    if norm > 0:
        a *= math.sqrt(energy / norm)
    return Envelope(t0, dt, a)


@dataclass(frozen=True)
class Peak:
    center: float
    duration: float
    weight: float = 1.0
    phase: float = 0.0


def peak_train(peaks, t0=None, dt=None, count=None):
    """Superposition of Gaussian peaks, normalised to unit energy."""
    peaks = [p if isinstance(p, Peak) else Peak(**p) for p in peaks]
    if not peaks:
        raise ValueError("peak_train needs at least one peak")
    shortest = min(p.duration for p in peaks)
    dt = shortest / 100 if dt is None else dt
    _check_resolution(shortest, dt)
    if t0 is None:
        t0 = min(p.center - 4 * p.duration for p in peaks)
    if count is None:
        t_last = max(p.center + 4 * p.duration for p in peaks)
        count = int(math.ceil((t_last - t0) / dt)) + 1
    times = t0 + dt * np.arange(count)
    a = np.zeros(count, dtype=complex)
    for p in peaks:
        a += p.weight * np.exp(1j * p.phase) * _gaussian_samples(times, p.center, p.duration)
    norm = np.sum(np.abs(a) ** 2) * dt
    if norm > 0:
        a /= math.sqrt(norm)
    return Envelope(t0, dt, a)


def time_reverse(e, pivot):
    """Reflect ``e`` about ``pivot`` on the same grid span."""
    shift = (2 * pivot - 2 * e.t0) / e.dt - (len(e) - 1)
    k = round(shift)
    if abs(shift - k) < 1e-9:
        # grid-aligned: exact index reflection
        out = np.zeros(len(e), dtype=complex)
        rev = e.samples[::-1]
        if k >= 0:
            if k < len(e):
                out[k:] = rev[:len(e) - k]
        elif -k < len(e):
            out[:len(e) + k] = rev[-k:]
        return Envelope(e.t0, e.dt, out)
    return Envelope(e.t0, e.dt, e.at(2 * pivot - e.times))


def intensity_fwhm(e):
    """FWHM of the dominant intensity lobe, with linear interpolation at the edges."""
    inten = e.intensity
    if inten.size == 0 or inten.max() == 0:
        return 0.0
    k = int(np.argmax(inten))
    half = inten[k] / 2
    lo = k
    while lo > 0 and inten[lo - 1] >= half:
        lo -= 1
    hi = k
    while hi < len(inten) - 1 and inten[hi + 1] >= half:
        hi += 1
    left = lo - ((inten[lo] - half) / (inten[lo] - inten[lo - 1]) if lo > 0 else 0.0)
    right = hi + ((inten[hi] - half) / (inten[hi] - inten[hi + 1]) if hi < len(inten) - 1 else 0.0)
    return float((right - left) * e.dt)


def min_feature_samples(e):
    """Shortest run of samples above half the peak intensity."""
    inten = e.intensity
    if inten.size == 0 or inten.max() == 0:
        return math.inf
    above = inten >= inten.max() / 2
    edges = np.diff(np.concatenate(([0], above.astype(int), [0])))
    starts, stops = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)
    return int(np.min(stops - starts))


def write_csv(e, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_seconds", "re", "im"])
        for t, a in zip(e.times, e.samples):
            w.writerow([repr(float(t)), repr(float(a.real)), repr(float(a.imag))])


def read_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no samples")
    t = np.array([float(r["t_seconds"]) for r in rows])
    a = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
    if len(t) > 1:
        dt = float(np.mean(np.diff(t)))
        if not np.allclose(np.diff(t), dt, rtol=1e-6, atol=0):
            raise ValueError(f"{path}: samples are not uniformly spaced")
    else:
        dt = 1.0
    return Envelope(float(t[0]), dt, a)
