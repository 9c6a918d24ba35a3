import json
import math

import numpy as np
import pytest

from conftest import comb
from gfcomb.metrics import (default_echo_window, detect_echoes, efficiency, fidelity,
                            gfc_echo_window, sgem_window)
from gfcomb.schedule import ControlSchedule, GradientFlip
from gfcomb.signals import Envelope, Peak, energy, gaussian, peak_train, time_reverse


def two_peak():
    return peak_train([Peak(-40e-9, 30e-9, 1.0), Peak(20e-9, 30e-9, 0.5)], dt=0.5e-9)


def shifted(e, delay):
    return Envelope(e.t0 + delay, e.dt, e.samples)


def test_efficiency_of_scaled_copy():
    inp = gaussian(50e-9, dt=0.5e-9)
    out = Envelope(inp.t0 + 400e-9, inp.dt, 0.5 * inp.samples)
    assert efficiency(out, inp, (200e-9, 600e-9)) == pytest.approx(0.25)
    assert efficiency(out, inp, (-200e-9, 200e-9)) == 0.0


def test_efficiency_rejects_empty_window_and_silent_input():
    inp = gaussian(50e-9)
    with pytest.raises(ValueError):
        efficiency(inp, inp, (1e-7, 1e-7))
    with pytest.raises(ValueError):
        efficiency(inp, Envelope(0.0, 1e-9, np.zeros(4)), (0, 1e-7))


def test_windows():
    assert gfc_echo_window(400e-9) == pytest.approx((200e-9, 600e-9))
    assert sgem_window(130e-9, 400e-9) == pytest.approx((130e-9, 390e-9))
    assert sgem_window(400e-9, 200e-9) == pytest.approx((700e-9, 900e-9))
    med = comb()
    assert default_echo_window(med, ControlSchedule(())) == pytest.approx((200e-9, 600e-9))
    assert default_echo_window(med, ControlSchedule((GradientFlip(130e-9),))) \
        == pytest.approx((130e-9, 390e-9))


def test_fidelity_is_delay_invariant_and_scale_invariant():
    e = two_peak()
    assert fidelity(shifted(e.scaled(0.3), 250e-9), e) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_reversed_mode():
    e = two_peak()
    rev = time_reverse(e, 0.0)
    assert fidelity(rev, e, mode="reversed") == pytest.approx(1.0, abs=1e-9)
    assert fidelity(rev, e, mode="forward") < 0.95


def test_fidelity_of_orthogonal_phase_patterns_is_small():
    a = gaussian(50e-9, dt=0.5e-9)
    t = a.times
    chirped = Envelope(a.t0, a.dt, a.samples * np.exp(1j * 2 * np.pi * 1e8 * t))
    assert fidelity(chirped, a) < 0.05


def test_fidelity_requires_energy():
    with pytest.raises(ValueError):
        fidelity(Envelope(0.0, 1e-9, np.zeros(8)), gaussian(50e-9))
    with pytest.raises(ValueError):
        fidelity(gaussian(50e-9), gaussian(50e-9), mode="sideways")


def test_detect_echoes_finds_lobes_and_transmitted_part():
    inp = gaussian(50e-9, dt=0.5e-9)
    t = np.arange(-300e-9, 900e-9, 0.5e-9)
    out = Envelope(t[0], 0.5e-9, 0.37 * inp.at(t) - 0.74 * inp.at(t - 400e-9))
    rep = detect_echoes(out, input_energy=energy(inp), reference=inp)
    # lobes are cut at 2% of the strongest peak, which clips the weaker lobe's tails
    assert rep.transmitted_fraction == pytest.approx(0.37 ** 2, rel=0.03)
    assert len(rep.echoes) == 1
    echo = rep.dominant
    assert echo.center_time == pytest.approx(400e-9, abs=1e-10)
    assert echo.energy_fraction == pytest.approx(0.74 ** 2, rel=0.01)
    assert echo.fwhm == pytest.approx(50e-9, rel=1e-3)
    assert rep.fidelity == pytest.approx(1.0, abs=0.01)
    d = json.loads(rep.to_json())
    assert d["echoes"][0]["center_time"] == pytest.approx(400e-9, abs=1e-10)


def test_detect_echoes_on_silence():
    rep = detect_echoes(Envelope(0.0, 1e-9, np.zeros(16)))
    assert rep.echoes == [] and rep.dominant is None
    assert rep.to_dict()["fidelity"] is None


def test_noise_floor_validation():
    with pytest.raises(ValueError):
        detect_echoes(gaussian(50e-9), noise_floor=0.0)
