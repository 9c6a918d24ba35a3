"""Run configuration files: YAML with unit-suffixed scalars.

Scalars may be plain numbers (SI) or strings such as ``"50 ns"``,
``"0.56 mm"``, ``"-0.7 GHz"`` or ``"1e11 cm^-3"``. Frequencies given in Hz
are cycle frequencies and are converted to rad/s (times 2 pi); ``rad/s``
values are taken as they are. Everything is canonicalised to SI on load,
and :func:`dump_config` writes that canonical form back out.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml
from scipy import constants as const

from gfcomb.medium import CombMedium, PhysicalScenario, coupling_from_physical, doppler_time
from gfcomb.schedule import EVENT_TYPES, ControlSchedule, make_event
from gfcomb.signals import Peak, gaussian, peak_train, read_csv, intensity_fwhm
from gfcomb.solver import Grid


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


_TWO_PI = 2 * math.pi
_E_A0 = const.e * const.physical_constants["Bohr radius"][0]

UNITS = {
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "nm": 1e-9},
    "angular_frequency": {
        "rad/s": 1.0, "krad/s": 1e3, "Mrad/s": 1e6, "Grad/s": 1e9,
        "Hz": _TWO_PI, "kHz": _TWO_PI * 1e3, "MHz": _TWO_PI * 1e6, "GHz": _TWO_PI * 1e9,
    },
    "rate": {"1/s": 1.0, "/s": 1.0, "s^-1": 1.0, "1/ms": 1e3, "1/us": 1e6, "ms^-1": 1e3,
             "us^-1": 1e6},
    "coupling": {"1/(s m)": 1.0, "s^-1 m^-1": 1.0, "/s/m": 1.0},
    "density": {"m^-3": 1.0, "1/m^3": 1.0, "cm^-3": 1e6, "1/cm^3": 1e6},
    "mass": {"kg": 1.0, "u": const.atomic_mass, "amu": const.atomic_mass},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6, "μK": 1e-6, "nK": 1e-9},
    "dipole": {"C m": 1.0, "C*m": 1.0, "e a0": _E_A0, "ea0": _E_A0},
    "phase": {"rad": 1.0, "deg": math.pi / 180, "pi": math.pi, "pi rad": math.pi},
    "wavenumber": {"rad/m": 1.0, "1/m": 1.0, "m^-1": 1.0},
    "dimensionless": {},
}

_NUMBER = re.compile(r"^\s*([+-]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?))\s*(.*?)\s*$")


def parse_quantity(value, kind, key):
    """Convert ``value`` to an SI float according to ``kind``."""
    if isinstance(value, bool):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a number or a '<number> <unit>' string, got {value!r}")
    match = _NUMBER.match(value)
    if not match:
        raise ConfigError(key, f"cannot parse quantity {value!r}")
    number, unit = float(match.group(1)), match.group(2)
    if not unit:
        return number
    table = UNITS[kind]
    if unit not in table:
        allowed = ", ".join(table) or "none (dimensionless)"
        raise ConfigError(key, f"unknown unit {unit!r} for a {kind} quantity (allowed: {allowed})")
    return number * table[unit]


def _get(section, name, kind, path, default=None, required=False):
    key = f"{path}.{name}"
    if name not in section or section[name] is None:
        if required:
            raise ConfigError(key, "missing required value")
        return default
    return parse_quantity(section[name], kind, key)


def _section(raw, name, required=False):
    value = raw.get(name)
    if value is None:
        if required:
            raise ConfigError(name, "missing section")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, "must be a mapping")
    return value


def _reject_unknown(section, allowed, path):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown key")


@dataclass(frozen=True)
class MediumSpec:
    M: int
    d: float
    L0: float
    delta_omega_c: float
    b: float | None = None
    zeta_eff: float | None = None
    gamma31: float = 0.0
    doppler_td: float | None = None


@dataclass(frozen=True)
class SignalSpec:
    kind: str = "gaussian"
    duration: float = 50e-9
    center: float = 0.0
    energy: float = 1.0
    peaks: tuple = ()
    path: str | None = None


@dataclass(frozen=True)
class GridSpec:
    dt: float | None = None
    t_start: float | None = None
    t_end: float | None = None
    nz_per_section: int = 64


@dataclass(frozen=True)
class OutputSpec:
    out_dir: str = "out"
    name: str = "run"
    snapshot: bool = False
    snapshot_times: tuple = ()
    plot: bool = False
    echo_window: tuple | None = None
    reference_mode: str = "auto"
    noise_floor: float = 0.02


@dataclass(frozen=True)
class SweepAxisSpec:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    metric: str = "efficiency"
    pin: str | None = None
    workers: int = 1
    check_convergence: bool = True


@dataclass(frozen=True)
class RunConfig:
    medium: MediumSpec
    signal: SignalSpec = field(default_factory=SignalSpec)
    schedule: tuple = ()
    grid: GridSpec = field(default_factory=GridSpec)
    outputs: OutputSpec = field(default_factory=OutputSpec)
    scenario: PhysicalScenario | None = None
    sweep: SweepSpec | None = None

    # -- building blocks for the solver ---------------------------------
    def build_medium(self):
        m = self.medium
        if self.scenario is not None:
            b = coupling_from_physical(self.scenario)
        elif m.b is not None:
            b = m.b
        else:
            b = m.zeta_eff * m.delta_omega_c / (4 * m.d)
        td = m.doppler_td
        if td is None:
            td = math.inf
            if self.scenario is not None and self.scenario.temperature > 0:
                td = doppler_time(self.scenario)
        return CombMedium(M=m.M, d=m.d, L0=m.L0, b=b, delta_omega_c=m.delta_omega_c,
                          gamma31=m.gamma31, doppler_td=td)

    def build_schedule(self, medium=None):
        medium = self.build_medium() if medium is None else medium
        events = []
        for rec in self.schedule:
            rec = dict(rec)
            kind, time = rec.pop("kind"), rec.pop("time")
            if kind == "phase_ramp" and "tau" in rec:
                rec["delta_phi"] = medium.delta_omega_c * rec.pop("tau")
            events.append(make_event(kind, time, **rec))
        return ControlSchedule(tuple(events))

    @property
    def duration(self):
        s = self.signal
        if s.kind == "peak_train":
            return min(p.duration for p in s.peaks)
        if s.kind == "csv":
            return intensity_fwhm(read_csv(s.path))
        return s.duration

    def build_input(self):
        s, g = self.signal, self.grid
        dt = g.dt if g.dt is not None else self.duration / 100
        if s.kind == "gaussian":
            return gaussian(s.duration, s.center, s.energy, t0=g.t_start, dt=dt)
        if s.kind == "peak_train":
            return peak_train(s.peaks, t0=g.t_start, dt=dt)
        env = read_csv(s.path)
        t0 = env.t0 if g.t_start is None else g.t_start
        n = int(round((env.t_end - t0) / dt)) + 1
        return env.resample(t0, dt, n)

    def build_grid(self, medium=None, schedule=None):
        medium = self.build_medium() if medium is None else medium
        schedule = self.build_schedule(medium) if schedule is None else schedule
        dt = self.grid.dt if self.grid.dt is not None else self.duration / 100
        t_end = self.grid.t_end
        if t_end is None:
            last = max([0.0] + [e.time for e in schedule.events])
            if self.outputs.echo_window is not None:
                last = max(last, self.outputs.echo_window[1])
            t_end = last + 2 * medium.T0
        return Grid(dt=dt, t_end=t_end, nz_per_section=self.grid.nz_per_section)


_MEDIUM_KEYS = {"M", "d", "L0", "T0", "delta_omega_c", "b", "zeta_eff", "gamma31", "doppler_td"}
_SCENARIO_KINDS = {
    "signal_frequency": "angular_frequency", "signal_wavelength": "length",
    "dipole_matrix_element": "dipole", "control_rabi": "angular_frequency",
    "one_photon_detuning": "angular_frequency", "atomic_density": "density",
    "refractive_index": "dimensionless", "temperature": "temperature",
    "atomic_mass": "mass", "signal_wavenumber": "wavenumber",
}
_EVENT_KINDS = {"time": "time", "delta_phi": "phase", "tau": "time", "factor": "dimensionless",
                "offset": "angular_frequency"}
SWEEP_PARAMETERS = {"zeta_eff": "dimensionless", "T0_over_dt_signal": "dimensionless",
                    "T_sw": "time", "gamma31": "rate", "doppler_td": "time",
                    "M": "dimensionless", "delta_omega_c": "angular_frequency"}


def _parse_medium(raw):
    sec = _section(raw, "medium", required=True)
    _reject_unknown(sec, _MEDIUM_KEYS, "medium")
    M = _get(sec, "M", "dimensionless", "medium", required=True)
    if M != int(M) or M < 1:
        raise ConfigError("medium.M", f"must be a positive integer, got {sec['M']!r}")
    d = _get(sec, "d", "length", "medium", required=True)
    L0 = _get(sec, "L0", "length", "medium", default=d)
    if ("T0" in sec) == ("delta_omega_c" in sec):
        raise ConfigError("medium.T0", "give exactly one of T0 or delta_omega_c")
    if "T0" in sec:
        T0 = _get(sec, "T0", "time", "medium")
        if not T0 > 0:
            raise ConfigError("medium.T0", "must be positive")
        dw = _TWO_PI / T0
    else:
        dw = _get(sec, "delta_omega_c", "angular_frequency", "medium")
    b = _get(sec, "b", "coupling", "medium")
    zeta = _get(sec, "zeta_eff", "dimensionless", "medium")
    coupling_sources = [k for k in ("b", "zeta_eff") if k in sec] + (["scenario"] if raw.get("scenario") else [])
    if len(coupling_sources) != 1:
        raise ConfigError("medium.b", "exactly one of medium.b, medium.zeta_eff or a scenario "
                                      f"block must provide the coupling (got {coupling_sources or 'none'})")
    td = _get(sec, "doppler_td", "time", "medium")
    spec = MediumSpec(M=int(M), d=d, L0=L0, delta_omega_c=dw, b=b, zeta_eff=zeta,
                      gamma31=_get(sec, "gamma31", "rate", "medium", default=0.0), doppler_td=td)
    try:
        CombMedium(M=spec.M, d=d, L0=L0, b=b or 0.0, delta_omega_c=dw, gamma31=spec.gamma31,
                   doppler_td=td if td is not None else math.inf)
    except ValueError as exc:
        raise ConfigError("medium", str(exc)) from None
    return spec


def _parse_scenario(raw):
    sec = raw.get("scenario")
    if not sec:
        return None
    if not isinstance(sec, dict):
        raise ConfigError("scenario", "must be a mapping")
    _reject_unknown(sec, _SCENARIO_KINDS, "scenario")
    vals = {k: _get(sec, k, kind, "scenario") for k, kind in _SCENARIO_KINDS.items() if k in sec}
    n = vals.get("refractive_index", 1.0)
    if "signal_wavelength" in vals:
        lam = vals.pop("signal_wavelength")
        vals.setdefault("signal_frequency", _TWO_PI * const.c / lam)
        vals.setdefault("signal_wavenumber", _TWO_PI * n / lam)
    for req in ("signal_frequency", "dipole_matrix_element", "control_rabi",
                "one_photon_detuning", "atomic_density"):
        if req not in vals:
            raise ConfigError(f"scenario.{req}", "missing required value")
    try:
        return PhysicalScenario(**vals)
    except ValueError as exc:
        raise ConfigError("scenario", str(exc)) from None


def _parse_signal(raw):
    sec = _section(raw, "signal")
    _reject_unknown(sec, {"kind", "duration", "center", "energy", "peaks", "path"}, "signal")
    kind = sec.get("kind", "gaussian")
    if kind not in ("gaussian", "peak_train", "csv"):
        raise ConfigError("signal.kind", f"unknown generator {kind!r}")
    peaks = []
    if kind == "peak_train":
        raw_peaks = sec.get("peaks")
        if not raw_peaks:
            raise ConfigError("signal.peaks", "peak_train needs at least one peak")
        default_dur = _get(sec, "duration", "time", "signal", default=None)
        for i, p in enumerate(raw_peaks):
            path = f"signal.peaks[{i}]"
            _reject_unknown(p, {"center", "duration", "weight", "phase"}, path)
            dur = _get(p, "duration", "time", path, default=default_dur)
            if dur is None:
                raise ConfigError(f"{path}.duration", "missing required value")
            peaks.append(Peak(center=_get(p, "center", "time", path, required=True), duration=dur,
                              weight=_get(p, "weight", "dimensionless", path, default=1.0),
                              phase=_get(p, "phase", "phase", path, default=0.0)))
    if kind == "csv" and not sec.get("path"):
        raise ConfigError("signal.path", "csv signal needs a path")
    duration = _get(sec, "duration", "time", "signal", default=50e-9)
    if not duration > 0:
        raise ConfigError("signal.duration", "must be positive")
    return SignalSpec(kind=kind, duration=duration,
                      center=_get(sec, "center", "time", "signal", default=0.0),
                      energy=_get(sec, "energy", "dimensionless", "signal", default=1.0),
                      peaks=tuple(peaks), path=sec.get("path"))


def _parse_schedule(raw):
    recs = raw.get("schedule") or []
    if not isinstance(recs, list):
        raise ConfigError("schedule", "must be a list of events")
    out = []
    for i, rec in enumerate(recs):
        path = f"schedule[{i}]"
        if not isinstance(rec, dict):
            raise ConfigError(path, "event must be a mapping")
        kind = rec.get("kind")
        if kind not in EVENT_TYPES:
            raise ConfigError(f"{path}.kind", f"unknown event kind {kind!r}")
        allowed = {"time", "kind", "mode", "delta_phi", "tau", "factor", "offset"}
        _reject_unknown(rec, allowed, path)
        canon = {"time": _get(rec, "time", "time", path, required=True), "kind": kind}
        for k, v in rec.items():
            if k in ("time", "kind"):
                continue
            canon[k] = v if k == "mode" else parse_quantity(v, _EVENT_KINDS[k], f"{path}.{k}")
        try:
            params = {k: v for k, v in canon.items() if k not in ("time", "kind", "tau")}
            if kind == "phase_ramp" and "tau" in canon:
                params["delta_phi"] = 0.0
            make_event(kind, canon["time"], **params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(path, str(exc)) from None
        out.append(canon)
    return tuple(out)


def _parse_grid(raw):
    sec = _section(raw, "grid")
    _reject_unknown(sec, {"dt", "t_start", "t_end", "nz_per_section"}, "grid")
    nz = _get(sec, "nz_per_section", "dimensionless", "grid", default=64)
    if nz != int(nz) or nz < 8:
        raise ConfigError("grid.nz_per_section", "must be an integer >= 8")
    dt = _get(sec, "dt", "time", "grid")
    if dt is not None and not dt > 0:
        raise ConfigError("grid.dt", "must be positive")
    return GridSpec(dt=dt, t_start=_get(sec, "t_start", "time", "grid"),
                    t_end=_get(sec, "t_end", "time", "grid"), nz_per_section=int(nz))


def _parse_outputs(raw):
    sec = _section(raw, "outputs")
    _reject_unknown(sec, {f.name for f in fields(OutputSpec)}, "outputs")
    window = sec.get("echo_window")
    if window is not None:
        if not isinstance(window, (list, tuple)) or len(window) != 2:
            raise ConfigError("outputs.echo_window", "must be a [start, stop] pair")
        window = tuple(parse_quantity(v, "time", "outputs.echo_window") for v in window)
        if not window[0] < window[1]:
            raise ConfigError("outputs.echo_window", "start must precede stop")
    mode = sec.get("reference_mode", "auto")
    if mode not in ("auto", "forward", "reversed"):
        raise ConfigError("outputs.reference_mode", f"unknown mode {mode!r}")
    snaps = tuple(parse_quantity(v, "time", "outputs.snapshot_times")
                  for v in sec.get("snapshot_times") or ())
    return OutputSpec(out_dir=str(sec.get("out_dir", "out")), name=str(sec.get("name", "run")),
                      snapshot=bool(sec.get("snapshot", False)), snapshot_times=snaps,
                      plot=bool(sec.get("plot", False)), echo_window=window,
                      reference_mode=mode,
                      noise_floor=_get(sec, "noise_floor", "dimensionless", "outputs", default=0.02))


def _axis_values(spec, kind, path):
    if isinstance(spec, dict):
        _reject_unknown(spec, {"start", "stop", "num"}, path)
        start = parse_quantity(spec.get("start"), kind, f"{path}.start")
        stop = parse_quantity(spec.get("stop"), kind, f"{path}.stop")
        num = int(spec.get("num", 2))
        if num < 1:
            raise ConfigError(f"{path}.num", "must be >= 1")
        if num == 1:
            return (start,)
        return tuple(start + (stop - start) * i / (num - 1) for i in range(num))
    if not isinstance(spec, (list, tuple)) or not spec:
        raise ConfigError(path, "values must be a non-empty list or {start, stop, num}")
    return tuple(parse_quantity(v, kind, path) for v in spec)


def _parse_sweep(raw):
    sec = raw.get("sweep")
    if not sec:
        return None
    _reject_unknown(sec, {"axes", "metric", "pin", "workers", "check_convergence"}, "sweep")
    axes = []
    for i, ax in enumerate(sec.get("axes") or []):
        path = f"sweep.axes[{i}]"
        name = ax.get("parameter")
        if name not in SWEEP_PARAMETERS:
            raise ConfigError(f"{path}.parameter", f"unknown sweep parameter {name!r}")
        vals = _axis_values(ax.get("values"), SWEEP_PARAMETERS[name], f"{path}.values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError(f"{path}.values", "must be strictly ascending")
        axes.append(SweepAxisSpec(name, vals))
    if not 1 <= len(axes) <= 2:
        raise ConfigError("sweep.axes", "need one or two axes")
    metric = sec.get("metric", "efficiency")
    if metric not in ("efficiency", "fidelity"):
        raise ConfigError("sweep.metric", f"unknown metric {metric!r}")
    pin = sec.get("pin")
    if pin not in (None, "b", "zeta_eff"):
        raise ConfigError("sweep.pin", f"must be 'b' or 'zeta_eff', got {pin!r}")
    return SweepSpec(axes=tuple(axes), metric=metric, pin=pin,
                     workers=int(sec.get("workers", 1)),
                     check_convergence=bool(sec.get("check_convergence", True)))


def parse_config(raw, base_dir=None):
    """Validate a raw mapping and return a canonical :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    _reject_unknown(raw, {"medium", "scenario", "signal", "schedule", "grid", "outputs", "sweep"},
                    "<root>")
    signal = _parse_signal(raw)
    if signal.kind == "csv" and base_dir is not None and not Path(signal.path).is_absolute():
        signal = replace(signal, path=str(Path(base_dir) / signal.path))
    return RunConfig(medium=_parse_medium(raw), signal=signal, schedule=_parse_schedule(raw),
                     grid=_parse_grid(raw), outputs=_parse_outputs(raw),
                     scenario=_parse_scenario(raw), sweep=_parse_sweep(raw))


def load_config(path):
    path = Path(path)
    with path.open() as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"YAML syntax error: {exc}") from None
    return parse_config(raw, base_dir=path.parent)


def config_to_dict(cfg):
    """Canonical SI mapping that :func:`parse_config` maps back to ``cfg``."""
    m = cfg.medium
    medium = {"M": m.M, "d": m.d, "L0": m.L0, "delta_omega_c": m.delta_omega_c,
              "gamma31": m.gamma31}
    if m.b is not None:
        medium["b"] = m.b
    if m.zeta_eff is not None:
        medium["zeta_eff"] = m.zeta_eff
    if m.doppler_td is not None:
        medium["doppler_td"] = m.doppler_td
    s = cfg.signal
    signal = {"kind": s.kind, "duration": s.duration, "center": s.center, "energy": s.energy}
    if s.peaks:
        signal["peaks"] = [{"center": p.center, "duration": p.duration, "weight": p.weight,
                            "phase": p.phase} for p in s.peaks]
    if s.path is not None:
        signal["path"] = s.path
    grid = {k: v for k, v in vars(cfg.grid).items() if v is not None}
    o = cfg.outputs
    outputs = {"out_dir": o.out_dir, "name": o.name, "snapshot": o.snapshot,
               "snapshot_times": list(o.snapshot_times), "plot": o.plot,
               "reference_mode": o.reference_mode, "noise_floor": o.noise_floor}
    if o.echo_window is not None:
        outputs["echo_window"] = list(o.echo_window)
    out = {"medium": medium, "signal": signal, "schedule": [dict(r) for r in cfg.schedule],
           "grid": grid, "outputs": outputs}
    if cfg.scenario is not None:
        out["scenario"] = dict(vars(cfg.scenario))
    if cfg.sweep is not None:
        sw = cfg.sweep
        out["sweep"] = {"metric": sw.metric, "workers": sw.workers,
                        "check_convergence": sw.check_convergence,
                        "axes": [{"parameter": a.parameter, "values": list(a.values)}
                                 for a in sw.axes]}
        if sw.pin is not None:
            out["sweep"]["pin"] = sw.pin
    return out


def dump_config(cfg):
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
