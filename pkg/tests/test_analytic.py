import math

import numpy as np
import pytest

from conftest import comb
from gfcomb.analytic import (compare_with_first_pass, echo_efficiency, first_pass_output,
                             first_pass_prediction, in_validity_window, optimal_thickness,
                             transmitted_fraction)
from gfcomb.schedule import ControlSchedule, GradientFlip, UniformOffset
from gfcomb.signals import energy, gaussian
from gfcomb.solver import Grid, simulate


def test_optimum_efficiency_is_four_over_e_squared():
    assert optimal_thickness() == pytest.approx(4 / math.pi)
    assert echo_efficiency(4 / math.pi) == pytest.approx(4 * math.exp(-2), rel=1e-12)
    assert echo_efficiency(4 / math.pi) == pytest.approx(0.5413, abs=1e-4)


def test_caption_thickness_is_near_optimum():
    assert echo_efficiency(1.28) == pytest.approx(0.5413, abs=1e-4)


def test_zero_thickness():
    pred = first_pass_prediction(0.0)
    assert pred.transmitted_amplitude_factor == 1.0
    assert pred.echo_amplitude_factor == 0.0


def test_transmitted_fraction_at_optimum():
    assert transmitted_fraction(4 / math.pi) == pytest.approx(math.exp(-2))


def test_finite_finesse_penalty():
    assert echo_efficiency(4 / math.pi, F=10) == pytest.approx(
        4 * math.exp(-2) * math.exp(-2 * math.pi / 10))


def test_efficiency_maximum_by_scan():
    z = np.linspace(0.05, 5, 20001)
    vals = [echo_efficiency(v) for v in z]
    assert z[int(np.argmax(vals))] == pytest.approx(4 / math.pi, abs=1e-3)


@pytest.mark.parametrize("zeta,F", [(-0.1, math.inf), (1.0, 0.0)])
def test_invalid_arguments(zeta, F):
    with pytest.raises(ValueError):
        echo_efficiency(zeta, F)


def test_predicted_envelope_energy_split():
    inp = gaussian(50e-9, dt=0.5e-9)
    out = first_pass_output(inp, 4 / math.pi, math.inf, 400e-9)
    assert energy(out.window(-200e-9, 200e-9)) == pytest.approx(math.exp(-2), rel=1e-6)
    assert energy(out.window(200e-9, 600e-9)) == pytest.approx(4 * math.exp(-2), rel=1e-6)
    k = int(np.argmax(out.window(200e-9, 600e-9).intensity))
    assert out.window(200e-9, 600e-9).samples[k].real < 0


def test_validity_window():
    assert in_validity_window(50e-9, 400e-9, 9)
    assert not in_validity_window(50e-9, 40e-9, 9)
    assert not in_validity_window(50e-9, 500e-9, 9)


def test_comparison_refuses_control_events():
    med = comb()
    inp = gaussian(50e-9, dt=0.5e-9)
    rec = simulate(med, ControlSchedule((GradientFlip(130e-9),)), inp, Grid(0.5e-9, 700e-9))
    with pytest.raises(ValueError):
        compare_with_first_pass(rec, med, 50e-9)


def test_comparison_allows_uniform_offset_and_checks_window():
    med = comb()
    inp = gaussian(50e-9, dt=0.5e-9)
    rec = simulate(med, ControlSchedule((UniformOffset(500e-9, 1e6),)), inp, Grid(0.5e-9, 700e-9))
    assert compare_with_first_pass(rec, med, 50e-9) < 1.0
    with pytest.raises(ValueError):
        compare_with_first_pass(rec, med, 500e-9)


def test_first_pass_agreement_improves_with_more_sections():
    # The closed form assumes an unbounded ladder of teeth; the finite comb
    # adds a group advance that shrinks as sections are added.
    inp = gaussian(50e-9, dt=0.5e-9)
    errs = []
    for M in (9, 31):
        med = comb(M=M)
        rec = simulate(med, ControlSchedule(()), inp, Grid(0.5e-9, 700e-9))
        errs.append(compare_with_first_pass(rec, med, 50e-9))
    assert errs[1] < 0.5 * errs[0]
    assert errs[1] < 0.1
