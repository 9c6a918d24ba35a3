import math
import warnings

import numpy as np
from hypothesis import given, settings, strategies as st

from conftest import comb
from gfcomb.analytic import echo_efficiency, transmitted_fraction
from gfcomb.config import parse_quantity
from gfcomb.medium import CombMedium
from gfcomb.metrics import efficiency, fidelity
from gfcomb.schedule import (ControlSchedule, GradientFlip, PhaseRamp, SpacingRescale,
                             UniformOffset, detuning_at, validate)
from gfcomb.signals import Envelope, Peak, energy, gaussian, peak_train, time_reverse
from gfcomb.solver import Grid, energy_balance, simulate

SLOW = settings(max_examples=12, deadline=None)

durations = st.floats(20e-9, 80e-9)
zetas = st.floats(0.0, 4.0)


def event_lists():
    kinds = st.sampled_from(["flip", "swap", "ramp", "rescale", "offset"])
    return st.lists(st.tuples(kinds, st.floats(-3.0, 3.0)), max_size=4)


def build(events, start=60e-9, gap=70e-9):
    out = []
    for i, (kind, x) in enumerate(events):
        t = start + i * gap
        out.append({"flip": GradientFlip(t), "swap": GradientFlip(t, "swap"),
                     "ramp": PhaseRamp(t, x), "rescale": SpacingRescale(t, 1.0 + abs(x)),
                     "offset": UniformOffset(t, x * 1e6)}[kind])
    return ControlSchedule(tuple(out))


@given(st.integers(1, 15), st.floats(1e5, 1e9), st.floats(0.1e-3, 2e-3))
def test_medium_derived_quantities(M, dw, d):
    med = CombMedium(M, d, 1.5 * d, 1e9, dw)
    assert math.isclose(med.T0 * dw, 2 * math.pi)
    assert math.isclose(med.zeta_eff, 4 * 1e9 * d / dw)
    assert np.allclose(med.indices.sum(), 0.0)


@given(event_lists(), st.floats(0, 1e-6))
def test_detuning_is_antisymmetric_about_centre_without_offsets(events, t):
    sched = build([e for e in events if e[0] != "offset"])
    med = comb()
    for m in range(1, 5):
        assert math.isclose(detuning_at(m * 1e-3, t, med, sched),
                            -detuning_at(-m * 1e-3, t, med, sched), abs_tol=1e-6)


@given(event_lists())
def test_generated_schedules_validate(events):
    assert validate(build(events)) == []


@given(st.floats(-1e-6, 1e-6), st.sampled_from(["ns", "us", "ms", "s"]))
def test_time_units(value, unit):
    scale = {"ns": 1e-9, "us": 1e-6, "ms": 1e-3, "s": 1.0}[unit]
    assert math.isclose(parse_quantity(f"{value!r} {unit}", "time", "k"), value * scale,
                        rel_tol=1e-12, abs_tol=1e-300)


@given(durations, st.floats(0.1, 5.0))
def test_gaussian_energy(duration, e):
    assert math.isclose(energy(gaussian(duration, energy=e)), e, rel_tol=1e-9)


@given(st.lists(st.tuples(st.floats(-200e-9, 200e-9), st.floats(0.2, 1.0)), min_size=1, max_size=3))
def test_time_reverse_is_involution(peaks):
    e = peak_train([Peak(c, 40e-9, w) for c, w in peaks], dt=0.5e-9)
    pivot = (e.t0 + e.t_end) / 2
    assert np.allclose(time_reverse(time_reverse(e, pivot), pivot).samples, e.samples)


@given(st.floats(-150e-9, 150e-9))
def test_efficiency_is_additive_over_adjacent_windows(split):
    e = gaussian(50e-9, dt=0.5e-9)
    whole = efficiency(e, e, (-300e-9, 300e-9))
    parts = efficiency(e, e, (-300e-9, split)) + efficiency(e, e, (split, 300e-9))
    assert math.isclose(whole, parts, rel_tol=1e-12)


@given(st.floats(-300e-9, 300e-9), st.floats(0.01, 10), st.floats(0, 2 * math.pi))
def test_fidelity_invariances(delay, scale, phase):
    e = peak_train([Peak(-40e-9, 30e-9, 1.0), Peak(20e-9, 30e-9, 0.5)], dt=0.5e-9)
    k = round(delay / e.dt)
    moved = Envelope(e.t0 + k * e.dt, e.dt, scale * np.exp(1j * phase) * e.samples)
    f = fidelity(moved, e)
    assert 0.0 <= f <= 1.0
    assert math.isclose(f, 1.0, abs_tol=1e-9)


@given(st.floats(0, 20))
def test_first_pass_never_creates_energy(zeta):
    assert transmitted_fraction(zeta) + echo_efficiency(zeta) <= 1.0 + 1e-12


@SLOW
@given(zetas, st.floats(250e-9, 500e-9), event_lists())
def test_energy_balance_loss_free(zeta, T0, events):
    rec = simulate(comb(zeta=zeta, T0=T0), build(events), gaussian(50e-9, dt=0.5e-9),
                   Grid(0.5e-9, 500e-9))
    # stacked abrupt events during the pulse cost O(dt); the fixed scenarios stay below 1e-3
    assert energy_balance(rec) < 3e-3
    assert np.all(rec.spin_energy >= 0)


@SLOW
@given(zetas, st.floats(0, 2e6), event_lists())
def test_medium_is_passive(zeta, gamma, events):
    inp = gaussian(50e-9, dt=0.5e-9)
    med = comb(zeta=zeta, gamma31=gamma)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rec = simulate(med, build(events), inp, Grid(0.5e-9, 500e-9))
    assert energy(rec.output) <= energy(inp) * (1 + 1e-3)


@SLOW
@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), event_lists())
def test_homogeneity(alpha, events):
    inp = gaussian(50e-9, dt=0.5e-9)
    med, sched, grid = comb(), build(events), Grid(0.5e-9, 400e-9)
    base = simulate(med, sched, inp, grid).output.samples
    scaled = simulate(med, sched, Envelope(inp.t0, inp.dt, alpha * inp.samples), grid).output.samples
    err = np.linalg.norm(scaled - alpha * base)
    assert err <= 1e-12 * max(np.linalg.norm(alpha * base), 1e-300)


@SLOW
@given(event_lists())
def test_simulation_is_deterministic(events):
    inp = gaussian(50e-9, dt=0.5e-9)
    a = simulate(comb(), build(events), inp, Grid(0.5e-9, 400e-9)).output.samples
    b = simulate(comb(), build(events), inp, Grid(0.5e-9, 400e-9)).output.samples
    assert np.array_equal(a, b)
