"""Efficiency, waveform fidelity and echo detection on simulated outputs."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from gfcomb.signals import Envelope, energy, intensity_fwhm, time_reverse

DEFAULT_NOISE_FLOOR = 0.02
MIN_LOBE_GAP = 3


def efficiency(output, input, window):
    """Output energy inside ``[t_a, t_b)`` divided by the total input energy."""
    t_a, t_b = window
    if not t_a < t_b:
        raise ValueError(f"empty window [{t_a!r}, {t_b!r})")
    e_in = energy(input)
    if e_in == 0:
        raise ValueError("input carries no energy")
    return energy(output.window(t_a, t_b)) / e_in


def gfc_echo_window(T0, k=1):
    """Window of the k-th forward comb echo, ``[k T0 - T0/2, k T0 + T0/2)``."""
    return (k * T0 - T0 / 2, k * T0 + T0 / 2)


def sgem_window(T_sw, T0):
    """Window of the SGEM echo: centred at ``2 T_sw`` with width ``min(T0, 2 T_sw)``.

    The width is capped so the window never reaches back before the flip,
    where the transmitted pulse lives.
    """
    width = min(T0, 2 * T_sw)
    return (2 * T_sw - width / 2, 2 * T_sw + width / 2)


def default_echo_window(medium, schedule):
    flip = schedule.first("gradient_flip") if schedule is not None else None
    if flip is not None and flip.mode == "retune":
        return sgem_window(flip.time, medium.T0)
    return gfc_echo_window(medium.T0)


def _on_common_grid(output, reference):
    if not math.isclose(output.dt, reference.dt, rel_tol=1e-9):
        n = int(round((reference.t_end - reference.t0) / output.dt)) + 1
        reference = reference.resample(reference.t0, output.dt, max(n, 1))
    return output, reference


def fidelity(output, reference, window=None, mode="forward"):
    """Delay-optimised normalised overlap squared, in [0, 1].

    ``max_T |int a_out*(t) a_ref(t - T) dt|^2 / (int |a_out|^2 int |a_ref|^2)``
    over integer-sample delays. With ``mode='reversed'`` the reference is
    time-reversed first.
    """
    if mode not in ("forward", "reversed"):
        raise ValueError(f"mode must be 'forward' or 'reversed', got {mode!r}")
    out = output.window(*window) if window is not None else output
    out, ref = _on_common_grid(out, reference)
    if mode == "reversed":
        ref = time_reverse(ref, (ref.t0 + ref.t_end) / 2)
    e_out, e_ref = energy(out), energy(ref)
    if e_out == 0 or e_ref == 0:
        raise ValueError("fidelity needs nonzero energy in both envelopes")
    corr = fftconvolve(ref.samples, np.conj(out.samples[::-1]), mode="full")
    best = float(np.max(np.abs(corr)) ** 2 * out.dt ** 2 / (e_out * e_ref))
    return min(best, 1.0)


@dataclass
class Echo:
    center_time: float
    energy_fraction: float
    fwhm: float
    peak_time: float
    start: float
    stop: float


@dataclass
class EchoReport:
    echoes: list = field(default_factory=list)
    transmitted_fraction: float = 0.0
    fidelity: float = math.nan
    reference_mode: str = "forward"

    @property
    def dominant(self):
        if not self.echoes:
            return None
        return max(self.echoes, key=lambda e: e.energy_fraction)

    def to_dict(self):
        d = asdict(self)
        d["fidelity"] = None if math.isnan(self.fidelity) else self.fidelity
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _lobes(inten, threshold, min_gap):
    above = np.flatnonzero(inten > threshold)
    if above.size == 0:
        return []
    lobes = []
    start = prev = above[0]
    for i in above[1:]:
        if i - prev > min_gap:
            lobes.append((start, prev))
            start = i
        prev = i
    lobes.append((start, prev))
    return lobes


def detect_echoes(output, noise_floor=DEFAULT_NOISE_FLOOR, input_energy=None,
                  reference=None, reference_mode="forward", min_gap=MIN_LOBE_GAP,
                  transmitted_time=0.0):
    """Split the output intensity into lobes above ``noise_floor * peak``.

    Lobes separated by more than ``min_gap`` samples below threshold are
    distinct. Lobes containing ``transmitted_time`` (a time or a sequence of
    times, e.g. the input peak centres) are the transmitted pulse; the
    others are echoes. Energy fractions are relative to
    ``input_energy`` (default: the total output energy). With a
    ``reference`` envelope the report carries the fidelity of the dominant
    echo against it.
    """
    if not 0 < noise_floor < 1:
        raise ValueError("noise_floor must lie in (0, 1)")
    inten = output.intensity
    report = EchoReport(reference_mode=reference_mode)
    if inten.size == 0 or inten.max() == 0:
        return report
    norm = energy(output) if input_energy is None else input_energy
    t = output.times
    marks = np.atleast_1d(np.asarray(transmitted_time, dtype=float))
    for lo, hi in _lobes(inten, noise_floor * inten.max(), min_gap):
        seg = inten[lo:hi + 1]
        e = float(np.sum(seg) * output.dt)
        center = float(np.sum(seg * t[lo:hi + 1]) / np.sum(seg))
        lobe_env = Envelope(t[lo], output.dt, output.samples[lo:hi + 1])
        start = t[lo] - output.dt / 2
        stop = t[hi] + output.dt / 2
        if np.any((start <= marks) & (marks < stop)):
            report.transmitted_fraction += e / norm
            continue
        report.echoes.append(Echo(
            center_time=center, energy_fraction=e / norm, fwhm=intensity_fwhm(lobe_env),
            peak_time=float(t[lo + int(np.argmax(seg))]), start=float(start), stop=float(stop)))
    dom = report.dominant
    if reference is not None and dom is not None:
        report.fidelity = fidelity(output, reference, (dom.start, dom.stop), reference_mode)
    return report
