"""Closed-form first-period response of the comb medium.

Up to one comb period the output is the attenuated input plus a single
echo delayed by T0:

    a_out(t) = exp(-pi z/4) a_in(t) - (pi z/2) exp(-pi z/4) exp(-pi/F) a_in(t - T0)

with z the effective thickness of a section and F the comb finesse. It is
valid for F >> 1 and ``duration < T0 < M * duration``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from gfcomb.signals import Envelope


@dataclass(frozen=True)
class FirstPassPrediction:
    transmitted_amplitude_factor: float
    echo_amplitude_factor: float
    echo_delay: float

    @property
    def transmitted_fraction(self):
        return self.transmitted_amplitude_factor ** 2

    @property
    def echo_efficiency(self):
        return self.echo_amplitude_factor ** 2


def _check(zeta, F):
    if zeta < 0:
        raise ValueError(f"effective thickness must be >= 0, got {zeta!r}")
    if not F > 0:
        raise ValueError(f"finesse must be positive, got {F!r}")


def _finesse_loss(F):
    return 0.0 if math.isinf(F) else math.pi / F


def first_pass_prediction(zeta, F=math.inf, T0=0.0):
    _check(zeta, F)
    t = math.exp(-math.pi * zeta / 4)
    echo = math.pi * zeta / 2 * t * math.exp(-_finesse_loss(F))
    return FirstPassPrediction(t, echo, T0)


def first_pass_output(input, zeta, F=math.inf, T0=None):
    """Predicted output envelope on the input grid extended by ``T0``.

    The echo enters with a minus sign relative to the transmitted pulse.
    """
    if T0 is None or not T0 > 0:
        raise ValueError("comb period T0 must be positive")
    pred = first_pass_prediction(zeta, F, T0)
    extra = int(math.ceil(T0 / input.dt - 1e-9))
    times = input.t0 + input.dt * np.arange(len(input) + extra)
    a = (pred.transmitted_amplitude_factor * input.at(times)
         - pred.echo_amplitude_factor * input.at(times - T0))
    return Envelope(input.t0, input.dt, a)


def echo_efficiency(zeta, F=math.inf):
    """Energy fraction of the first echo, ``(pi z/2)^2 exp(-pi z/2) exp(-2 pi/F)``."""
    _check(zeta, F)
    x = math.pi * zeta / 2
    return x * x * math.exp(-x) * math.exp(-2 * _finesse_loss(F))


def transmitted_fraction(zeta):
    if zeta < 0:
        raise ValueError(f"effective thickness must be >= 0, got {zeta!r}")
    return math.exp(-math.pi * zeta / 2)


def optimal_thickness():
    """Effective thickness maximising the forward echo, 4/pi."""
    return 4 / math.pi


def in_validity_window(duration, T0, M):
    """True when ``duration < T0 < M * duration``."""
    return duration < T0 < M * duration


def compare_with_first_pass(record, medium, duration, t_stop=None):
    """Relative L2 distance between a simulated output and the prediction.

    Compares over ``[t_start, t_stop]`` (default ``t_stop = 1.5 T0``).
    Refuses configurations outside the prediction's validity window.
    """
    from gfcomb.medium import finesse

    T0 = medium.T0
    F = finesse(medium)
    if not in_validity_window(duration, T0, medium.M):
        raise ValueError(f"outside validity window: need {duration:g} < T0={T0:g} < "
                         f"{medium.M * duration:g}")
    if F < 10:
        raise ValueError(f"finesse {F:.3g} too small for the first-period prediction")
    if any(e["kind"] != "uniform_offset" for e in record.event_log):
        raise ValueError("prediction does not cover control events")
    t_stop = 1.5 * T0 if t_stop is None else t_stop
    pred = first_pass_output(record.input, medium.zeta_eff, F, T0)
    t = record.times
    mask = t <= t_stop + 1e-9 * record.output.dt
    sim = record.output.samples[mask]
    ana = pred.at(t[mask])
    return float(np.linalg.norm(sim - ana) / np.linalg.norm(ana))
