"""Timed control-beam events and their effect on detuning, gating and phase.

Conventions
-----------
* t = 0 is the intensity peak of the input pulse at the medium entrance.
* An event takes effect at ``t >= event.time``.
* The spin wave in section m carries the frame factor ``exp(-i m psi)``, where
  ``psi`` is the accumulated control phase per unit section index. Free
  evolution advances ``psi`` at ``s * r * delta_omega_c``; a phase ramp adds
  ``delta_phi``; a swap-mode flip hands section m the beam of section -m and
  so negates ``psi``. Phase kicks are the jumps of that frame factor.
* During a block the coupling is switched off in both directions but ``psi``
  keeps advancing, so the stored spin wave keeps its detuning phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from gfcomb.medium import base_detuning


@dataclass(frozen=True)
class ControlEvent:
    time: float
    kind: ClassVar[str] = "event"

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class GradientFlip(ControlEvent):
    """Reverse the stepwise frequency gradient (SGEM switch)."""

    mode: str = "retune"
    kind: ClassVar[str] = "gradient_flip"

    def __post_init__(self):
        if self.mode not in ("retune", "swap"):
            raise ValueError(f"GradientFlip mode must be 'retune' or 'swap', got {self.mode!r}")

    def params(self):
        return {"mode": self.mode}


@dataclass(frozen=True)
class PhaseRamp(ControlEvent):
    """Extra control phase ``delta_phi`` between adjacent beams."""

    delta_phi: float = 0.0
    kind: ClassVar[str] = "phase_ramp"

    def params(self):
        return {"delta_phi": self.delta_phi}


@dataclass(frozen=True)
class SpacingRescale(ControlEvent):
    """Multiply the beam frequency spacing by ``factor``."""

    factor: float = 1.0
    kind: ClassVar[str] = "spacing_rescale"

    def params(self):
        return {"factor": self.factor}


@dataclass(frozen=True)
class BlockStart(ControlEvent):
    kind: ClassVar[str] = "block_start"


@dataclass(frozen=True)
class BlockEnd(ControlEvent):
    kind: ClassVar[str] = "block_end"


@dataclass(frozen=True)
class UniformOffset(ControlEvent):
    """Shift every control beam by the same ``offset`` [rad/s]."""

    offset: float = 0.0
    kind: ClassVar[str] = "uniform_offset"

    def params(self):
        return {"offset": self.offset}


EVENT_TYPES = {cls.kind: cls for cls in
               (GradientFlip, PhaseRamp, SpacingRescale, BlockStart, BlockEnd, UniformOffset)}


def make_event(kind, time, **params):
    try:
        cls = EVENT_TYPES[kind]
    except KeyError:
        raise ValueError(f"unknown event kind {kind!r}; expected one of {sorted(EVENT_TYPES)}")
    return cls(time=time, **params)


@dataclass(frozen=True)
class ControlState:
    sign: int = 1
    rescale: float = 1.0
    offset: float = 0.0
    gate: int = 1
    psi: float = 0.0


@dataclass(frozen=True)
class ControlSchedule:
    events: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def first(self, kind):
        return next((e for e in self.events if e.kind == kind), None)

    def to_records(self):
        return [{"time": e.time, "kind": e.kind, **e.params()} for e in self.events]

    @classmethod
    def from_records(cls, records):
        events = []
        for rec in records:
            rec = dict(rec)
            events.append(make_event(rec.pop("kind"), rec.pop("time"), **rec))
        return cls(tuple(events))


def validate(schedule):
    """Return a list of violations; an empty list means the schedule is valid."""
    problems = []
    prev = None
    blocked = False
    for i, ev in enumerate(schedule.events):
        if not math.isfinite(ev.time) or ev.time < 0:
            problems.append(f"event {i} ({ev.kind}): time must be finite and >= 0")
        if prev is not None and not ev.time > prev:
            problems.append(f"event {i} ({ev.kind}): non-strict ordering")
        prev = ev.time
        if isinstance(ev, SpacingRescale) and not (ev.factor > 0 and math.isfinite(ev.factor)):
            problems.append(f"event {i}: rescale factor must be positive")
        if isinstance(ev, (PhaseRamp, UniformOffset)):
            value = ev.delta_phi if isinstance(ev, PhaseRamp) else ev.offset
            if not math.isfinite(value):
                problems.append(f"event {i} ({ev.kind}): non-finite parameter")
        if isinstance(ev, BlockStart):
            if blocked:
                problems.append(f"event {i}: unpaired block (BlockStart inside a block)")
            blocked = True
        elif isinstance(ev, BlockEnd):
            if not blocked:
                problems.append(f"event {i}: unpaired block (BlockEnd without BlockStart)")
            blocked = False
    if blocked:
        problems.append("unpaired block (BlockStart never closed)")
    return problems


def _advance(state, ev):
    """State immediately after ``ev``, given the state just before it."""
    if isinstance(ev, GradientFlip):
        psi = -state.psi if ev.mode == "swap" else state.psi
        return ControlState(-state.sign, state.rescale, state.offset, state.gate, psi)
    if isinstance(ev, PhaseRamp):
        return ControlState(state.sign, state.rescale, state.offset, state.gate,
                            state.psi + ev.delta_phi)
    if isinstance(ev, SpacingRescale):
        return ControlState(state.sign, state.rescale * ev.factor, state.offset, state.gate, state.psi)
    if isinstance(ev, UniformOffset):
        return ControlState(state.sign, state.rescale, state.offset + ev.offset, state.gate, state.psi)
    if isinstance(ev, BlockStart):
        return ControlState(state.sign, state.rescale, state.offset, 0, state.psi)
    if isinstance(ev, BlockEnd):
        return ControlState(state.sign, state.rescale, state.offset, 1, state.psi)
    return state


def state_at(t, schedule, delta_omega_c=0.0):
    """Accumulated control state at time ``t`` (events at ``t`` included)."""
    state = ControlState()
    t_prev = 0.0
    for ev in schedule.events:
        if ev.time > t:
            break
        psi = state.psi + state.sign * state.rescale * delta_omega_c * (ev.time - t_prev)
        state = _advance(ControlState(state.sign, state.rescale, state.offset, state.gate, psi),
                         ev)
        t_prev = ev.time
    psi = state.psi + state.sign * state.rescale * delta_omega_c * (max(t, 0.0) - t_prev)
    return ControlState(state.sign, state.rescale, state.offset, state.gate, psi)


def detuning_at(z, t, medium, schedule):
    st = state_at(t, schedule)
    return st.sign * st.rescale * base_detuning(z, medium) + st.offset


def coupling_gate(t, schedule):
    return state_at(t, schedule).gate


def phase_kick(event, m, medium, psi_before=None):
    """Unit-modulus multiplier applied to the spin wave of section ``m``.

    ``psi_before`` is the accumulated control phase per unit index just
    before the event; it defaults to ``delta_omega_c * event.time`` (no
    earlier events), which is what a lone swap flip sees.
    """
    if isinstance(event, PhaseRamp):
        return cmath.exp(-1j * m * event.delta_phi)
    if isinstance(event, GradientFlip) and event.mode == "swap":
        if psi_before is None:
            psi_before = medium.delta_omega_c * event.time
        return cmath.exp(2j * m * psi_before)
    return 1.0 + 0.0j


@dataclass
class CompiledSchedule:
    """Schedule sampled on a uniform time grid for the solver.

    Per-step arrays describe the interval ``[t_n, t_{n+1})``; kicks are
    applied to the spin wave at level ``kick_steps[i]`` before stepping.
    """

    sign: np.ndarray
    rescale: np.ndarray
    offset: np.ndarray
    gate: np.ndarray
    kick_steps: np.ndarray
    kick_values: np.ndarray
    log: list


def compile_schedule(schedule, medium, t0, dt, nt):
    """Snap events to the grid ``t0 + k dt`` and tabulate the control state."""
    m = medium.indices
    dw = medium.delta_omega_c
    sign = np.ones(nt - 1)
    rescale = np.ones(nt - 1)
    offset = np.zeros(nt - 1)
    gate = np.ones(nt - 1)
    kick_steps, kick_values, log = [], [], []

    state = ControlState()
    t_prev = 0.0
    for ev in schedule.events:
        k = int(round((ev.time - t0) / dt))
        k = min(max(k, 0), nt - 1)
        t_snap = t0 + k * dt
        psi = state.psi + state.sign * state.rescale * dw * (t_snap - t_prev)
        before = ControlState(state.sign, state.rescale, state.offset, state.gate, psi)
        kick = np.array([phase_kick(ev, mi, medium, psi_before=psi) for mi in m])
        if isinstance(ev, (PhaseRamp, GradientFlip)) and not np.all(kick == 1):
            if kick_steps and kick_steps[-1] == k:
                kick_values[-1] = kick_values[-1] * kick
            else:
                kick_steps.append(k)
                kick_values.append(kick)
        state = _advance(before, ev)
        t_prev = t_snap
        sign[k:] = state.sign
        rescale[k:] = state.rescale
        offset[k:] = state.offset
        gate[k:] = state.gate
        log.append({"kind": ev.kind, "time": ev.time, "snapped_time": t_snap, "step": k,
                    **ev.params()})

    return CompiledSchedule(
        sign=sign, rescale=rescale, offset=offset, gate=gate,
        kick_steps=np.asarray(kick_steps, dtype=np.int64),
        kick_values=(np.asarray(kick_values, dtype=complex).reshape(len(kick_steps), medium.M)),
        log=log,
    )
