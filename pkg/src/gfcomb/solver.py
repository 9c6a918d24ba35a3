"""Propagation of the signal envelope through the sectioned medium.

The model, in the retarded frame, is

    da/dz = -gate(t) D(t) S
    dS/dt = -(gamma31 - i delta(z, t)) S + gate(t) b a

with ``D(t) = exp(-(t - t_origin)^2 / (2 t_d^2))`` the Doppler factor,
``S = 0`` at the start and in the gaps, and ``a(0, t)`` the input. Gaps
between sections are transparent, so only section interiors are sampled.
The control gate switches the coupling off in both directions while a block
is active.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gfcomb import kernel
from gfcomb.medium import CombMedium, comb_period, finesse
from gfcomb.schedule import compile_schedule, validate
from gfcomb.signals import MIN_SAMPLES_PER_DURATION, Envelope, energy, min_feature_samples


class FinesseWarning(UserWarning):
    pass


class GridWarning(UserWarning):
    pass


class SimulationError(RuntimeError):
    """The integration produced a non-finite state."""


@dataclass(frozen=True)
class Grid:
    dt: float
    t_end: float
    nz_per_section: int = 64

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"grid dt must be positive, got {self.dt!r}")
        if not math.isfinite(self.t_end):
            raise ValueError("grid t_end must be finite")
        if int(self.nz_per_section) != self.nz_per_section or self.nz_per_section < 8:
            raise ValueError(f"nz_per_section must be an integer >= 8, got {self.nz_per_section!r}")

    def refined(self):
        return Grid(self.dt / 2, self.t_end, 2 * self.nz_per_section)


def default_grid(medium, schedule, duration, t_observe=0.0, nz_per_section=64):
    """``dt = duration/100``; ``t_end`` = last event or observable plus 2 T0."""
    last = max([0.0, t_observe] + [e.time for e in schedule.events])
    return Grid(dt=duration / 100, t_end=last + 2 * comb_period(medium),
                nz_per_section=nz_per_section)


@dataclass
class Snapshot:
    t: float
    z: np.ndarray
    a: np.ndarray
    S: np.ndarray


@dataclass
class FieldRecord:
    input: Envelope
    output: Envelope
    spin_energy: np.ndarray
    event_log: list
    snapshots: list = field(default_factory=list)
    backend: str = ""

    @property
    def times(self):
        return self.output.times


def _phi1(x):
    """(exp(x) - 1) / x, accurate near zero."""
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-3
    xs = x[small]
    out[small] = 1 + xs / 2 + xs ** 2 / 6 + xs ** 3 / 24
    xl = x[~small]
    out[~small] = (np.exp(xl) - 1) / xl
    return out


def _quadrature_weights(nz, dz):
    """Simpson weights over the nz+1 nodes of a section (trapezoid for odd nz)."""
    if nz % 2:
        w = np.full(nz + 1, dz)
        w[[0, -1]] = dz / 2
        return w
    w = np.where(np.arange(nz + 1) % 2, 4.0, 2.0) * dz / 3
    w[[0, -1]] = dz / 3
    return w


def _input_on_grid(inp, t0, dt, nt):
    if abs(inp.dt - dt) <= 1e-12 * dt:
        a = np.zeros(nt, dtype=complex)
        n = min(nt, len(inp))
        a[:n] = inp.samples[:n]
        return a
    return inp.at(t0 + dt * np.arange(nt))


def simulate(medium: CombMedium, schedule, input: Envelope, grid: Grid, *,
             snapshot_times=(), doppler_origin=0.0, backend=None) -> FieldRecord:
    """Integrate the envelope/spin-wave equations and return the full record.

    The time grid starts at ``input.t0`` with step ``grid.dt``. Events are
    snapped to the nearest grid time.
    """
    problems = validate(schedule)
    if problems:
        raise ValueError("invalid schedule: " + "; ".join(problems))

    dt = grid.dt
    t0 = input.t0
    if not grid.t_end > t0:
        raise ValueError(f"grid t_end {grid.t_end!r} precedes the input start {t0!r}")
    nt = int(math.floor((grid.t_end - t0) / dt + 1e-9)) + 1

    a_in = _input_on_grid(input, t0, dt, nt)
    feature = min_feature_samples(Envelope(t0, dt, a_in))
    if feature < MIN_SAMPLES_PER_DURATION:
        raise ValueError(
            f"grid under-resolves the input: {feature} samples across the narrowest "
            f"half-maximum feature (need >= {MIN_SAMPLES_PER_DURATION})")

    F = finesse(medium)
    if F < 10:
        warnings.warn(f"comb finesse {F:.3g} < 10; the comb picture is unreliable",
                      FinesseWarning, stacklevel=2)

    comp = compile_schedule(schedule, medium, t0, dt, nt)
    steps = [entry["step"] for entry in comp.log]
    if len(set(steps)) < len(steps):
        warnings.warn("several events snap to the same grid time; refine dt",
                      GridWarning, stacklevel=2)

    m = medium.indices
    nz = int(grid.nz_per_section)
    dz = medium.d / nz
    times = t0 + dt * np.arange(nt)

    delta = (comp.sign * comp.rescale)[:, None] * (-m[None, :] * medium.delta_omega_c) \
        + comp.offset[:, None]
    lam = -(medium.gamma31 - 1j * delta) * dt
    E = np.exp(lam)
    c = (comp.gate * medium.b * dt / 2)[:, None] * _phi1(lam)
    if math.isinf(medium.doppler_td):
        doppler = np.ones(nt - 1)
    else:
        doppler = np.exp(-((times[1:] - doppler_origin) ** 2) / (2 * medium.doppler_td ** 2))
    kz = dz * doppler * comp.gate / 2

    snap_steps = sorted(int(round((t - t0) / dt)) for t in snapshot_times)
    snap_steps = [min(max(s, 0), nt - 1) for s in snap_steps]
    propagate = kernel.propagate if backend is None else kernel.get_propagate(backend)
    inv_b = 1.0 / medium.b if medium.b > 0 else 0.0
    a_out, spin, snap_a, snap_S = propagate(
        a_in, E, c, kz, comp.kick_steps, comp.kick_values, nz, _quadrature_weights(nz, dz), inv_b,
        np.asarray(snap_steps, dtype=np.int64))

    if not (np.all(np.isfinite(a_out)) and np.all(np.isfinite(spin))):
        bad = int(np.flatnonzero(~(np.isfinite(a_out) & np.isfinite(spin)))[0])
        raise SimulationError(f"non-finite field at step {bad} (t = {times[bad]:.4g} s)")

    zloc = (m[:, None] * medium.L0 - medium.d / 2) + dz * np.arange(nz + 1)[None, :]
    snapshots = [Snapshot(float(times[s]), zloc, snap_a[i], snap_S[i])
                 for i, s in enumerate(snap_steps)]
    return FieldRecord(
        input=Envelope(t0, dt, a_in),
        output=Envelope(t0, dt, a_out),
        spin_energy=spin,
        event_log=comp.log,
        snapshots=snapshots,
        backend=kernel.BACKEND if backend is None else backend,
    )


def energy_balance(record):
    """Largest violation of photon-number balance, relative to the input energy.

    For a loss-free run, energy in = energy out + energy stored in the spin
    wave at every time; both time integrals use the trapezoid rule.
    """
    dt = record.input.dt
    pin = np.abs(record.input.samples) ** 2
    pout = np.abs(record.output.samples) ** 2
    cum_in = np.concatenate(([0.0], np.cumsum((pin[1:] + pin[:-1]) * dt / 2)))
    cum_out = np.concatenate(([0.0], np.cumsum((pout[1:] + pout[:-1]) * dt / 2)))
    total = cum_in[-1]
    if total == 0:
        return 0.0
    return float(np.max(np.abs(cum_in - cum_out - record.spin_energy)) / total)


@dataclass
class ConvergenceReport:
    energy_change: float
    efficiency_change: float
    passed: bool
    diagnostic: str = ""


def convergence_check(medium, schedule, input, grid, window=None, tol=1e-3):
    """Rerun with ``dt/2`` and twice the spatial samples and compare.

    Compares total output energy and the echo efficiency over ``window``
    (default: the schedule's first-echo window).
    """
    from gfcomb.metrics import default_echo_window, efficiency

    if window is None:
        window = default_echo_window(medium, schedule)
    try:
        coarse = simulate(medium, schedule, input, grid)
        fine_input = input.resample(input.t0, grid.dt / 2, 2 * len(input) - 1)
        fine = simulate(medium, schedule, fine_input, grid.refined())
    except ValueError as exc:
        return ConvergenceReport(math.nan, math.nan, False, f"simulation rejected: {exc}")

    e_in = energy(input)
    if e_in == 0:
        return ConvergenceReport(0.0, 0.0, True, "zero input")

    def rel(x, y):
        scale = max(abs(x), abs(y))
        return 0.0 if scale == 0 else abs(x - y) / scale

    de = rel(energy(coarse.output), energy(fine.output))
    eta_c = efficiency(coarse.output, coarse.input, window)
    eta_f = efficiency(fine.output, fine.input, window)
    # an echo carrying a negligible share of the light cannot be converged in relative terms
    deta = abs(eta_c - eta_f) / max(eta_c, eta_f, 1e-2)
    passed = de < tol and deta < tol
    diag = (f"output energy change {de:.2e}, echo efficiency change {deta:.2e} "
            f"(efficiency {eta_c:.5f} -> {eta_f:.5f}); tolerance {tol:g}")
    return ConvergenceReport(de, deta, passed, diag)


def write_record_csv(record, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_seconds", "re_in", "im_in", "re_out", "im_out", "intensity_out"])
        for t, ai, ao in zip(record.times, record.input.samples, record.output.samples):
            w.writerow([repr(float(t)), repr(float(ai.real)), repr(float(ai.imag)),
                        repr(float(ao.real)), repr(float(ao.imag)), repr(float(abs(ao) ** 2))])


def write_snapshots_csv(record, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "t", "re_a", "im_a", "re_S", "im_S"])
        for snap in record.snapshots:
            for z, a, s in zip(snap.z.ravel(), snap.a.ravel(), snap.S.ravel()):
                w.writerow([repr(float(z)), repr(snap.t), repr(float(a.real)), repr(float(a.imag)),
                            repr(float(s.real)), repr(float(s.imag))])
