import math

import numpy as np
import pytest

from gfcomb.signals import (Envelope, Peak, energy, gaussian, intensity_fwhm, min_feature_samples,
                            peak_train, read_csv, time_reverse, write_csv)


def test_gaussian_has_unit_energy_and_requested_fwhm():
    g = gaussian(50e-9)
    assert energy(g) == pytest.approx(1.0, rel=1e-12)
    assert intensity_fwhm(g) == pytest.approx(50e-9, rel=1e-3)
    assert g.t0 == pytest.approx(-200e-9)


def test_gaussian_energy_scaling():
    assert energy(gaussian(20e-9, energy=3.0)) == pytest.approx(3.0)


def test_gaussian_rejects_coarse_grid():
    with pytest.raises(ValueError):
        gaussian(50e-9, dt=5e-9)


def test_triple_peak_train():
    e = peak_train([Peak(c, 50e-9) for c in (-350e-9, -200e-9, -50e-9)])
    assert energy(e) == pytest.approx(1.0)
    inten = e.intensity
    peaks = [e.times[i] for i in range(1, len(e) - 1)
             if inten[i] > inten[i - 1] and inten[i] >= inten[i + 1] and inten[i] > 0.5 * inten.max()]
    np.testing.assert_allclose(peaks, [-350e-9, -200e-9, -50e-9], atol=1e-9)


def test_empty_peak_train_rejected():
    with pytest.raises(ValueError):
        peak_train([])


def test_samples_are_read_only():
    g = gaussian(50e-9)
    with pytest.raises(ValueError):
        g.samples[0] = 1.0


def test_interpolation_is_zero_outside():
    g = gaussian(50e-9)
    assert g.at(np.array([-1e-6, 1e-6])).tolist() == [0, 0]
    assert abs(g.at(np.array([0.0]))[0]) == pytest.approx(abs(g.samples).max())


def test_time_reverse_mirrors_an_asymmetric_pulse():
    e = peak_train([Peak(-40e-9, 30e-9, 1.0), Peak(20e-9, 30e-9, 0.5)], dt=0.5e-9)
    pivot = (e.t0 + e.t_end) / 2
    r = time_reverse(e, pivot)
    np.testing.assert_allclose(r.samples, e.samples[::-1])
    np.testing.assert_allclose(time_reverse(r, pivot).samples, e.samples)


def test_window_is_half_open():
    e = Envelope(0.0, 1.0, np.arange(10, dtype=complex))
    w = e.window(2.0, 5.0)
    assert w.t0 == 2.0 and w.samples.real.tolist() == [2, 3, 4]


def test_csv_round_trip(tmp_path):
    e = gaussian(50e-9, center=10e-9)
    write_csv(e, tmp_path / "e.csv")
    back = read_csv(tmp_path / "e.csv")
    assert back.t0 == e.t0 and back.dt == pytest.approx(e.dt, rel=1e-9)
    np.testing.assert_array_equal(back.samples, e.samples)


def test_min_feature_samples():
    assert min_feature_samples(gaussian(50e-9)) in (100, 101)
    assert math.isinf(min_feature_samples(Envelope(0.0, 1.0, np.zeros(5))))
