"""Parameter sweeps over one or two axes, and a simple grid-then-refine maximiser."""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from pathlib import Path

import numpy as np

from gfcomb.config import SWEEP_PARAMETERS, ConfigError, RunConfig
from gfcomb.metrics import default_echo_window, detect_echoes, efficiency, fidelity
from gfcomb.signals import energy
from gfcomb.solver import SimulationError, convergence_check, simulate

# parameters that move the comb spacing and therefore need a pinning rule
_SPACING_PARAMETERS = {"T0_over_dt_signal", "delta_omega_c"}


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    values: tuple

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("a sweep axis needs at least one value")
        if not all(math.isfinite(v) or self.parameter == "doppler_td" for v in vals):
            raise ValueError(f"{self.parameter} values must be finite")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError(f"{self.parameter} values must be strictly ascending")
        _check_domain(self.parameter, vals)
        object.__setattr__(self, "values", vals)


def _check_domain(name, vals):
    lo = min(vals)
    if name in ("zeta_eff", "gamma31") and lo < 0:
        raise ValueError(f"{name} must be >= 0")
    if name in ("T0_over_dt_signal", "T_sw", "doppler_td", "delta_omega_c") and lo <= 0:
        raise ValueError(f"{name} must be positive")
    if name == "M" and any(v != int(v) or v < 1 for v in vals):
        raise ValueError("M values must be positive integers")


@dataclass
class SweepResult:
    axes: tuple
    metric_name: str
    values: np.ndarray
    converged: np.ndarray
    echo_count: np.ndarray
    errors: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.values.shape

    def argmax(self):
        """Axis values of the largest finite cell."""
        flat = np.where(np.isfinite(self.values), self.values, -np.inf)
        idx = np.unravel_index(int(np.argmax(flat)), flat.shape)
        return {ax.parameter: ax.values[i] for ax, i in zip(self.axes, idx)}, float(flat[idx])

    def to_csv(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["axis1", "axis2", "value", "converged"])
            for idx in np.ndindex(self.values.shape):
                x = self.axes[0].values[idx[0]]
                y = self.axes[1].values[idx[1]] if len(self.axes) > 1 else ""
                w.writerow([repr(x), repr(y) if y != "" else "", repr(float(self.values[idx])),
                            int(bool(self.converged[idx]))])

    def summary(self):
        best, value = self.argmax()
        return {
            "metric": self.metric_name,
            "axes": [{"parameter": a.parameter, "values": list(a.values)} for a in self.axes],
            "best": best,
            "best_value": value,
            "converged_cells": int(np.sum(self.converged)),
            "cells": int(self.values.size),
            "errors": {",".join(map(str, k)): v for k, v in self.errors.items()},
        }

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.summary(), indent=2) + "\n")


def apply_parameters(cfg: RunConfig, assignments: dict, pin=None) -> RunConfig:
    """Return a copy of ``cfg`` with sweep parameters substituted.

    The coupling is carried either as ``b`` or as ``zeta_eff``. A zeta axis,
    or ``pin='zeta_eff'``, holds zeta fixed and adjusts ``b``; ``pin='b'``
    holds ``b``. Changing the comb spacing without a pin is an error.
    """
    if _SPACING_PARAMETERS & set(assignments) and pin is None and "zeta_eff" not in assignments:
        raise ConfigError("sweep.pin", "sweeping the comb spacing needs pin: b or zeta_eff")
    base = cfg.build_medium()
    med = cfg.medium
    mode = "zeta" if (pin == "zeta_eff" or "zeta_eff" in assignments) else "b"
    dw, zeta, b = base.delta_omega_c, base.zeta_eff, base.b
    schedule = list(cfg.schedule)
    updates = {}
    for name, value in assignments.items():
        if name == "zeta_eff":
            zeta = value
        elif name == "delta_omega_c":
            dw = value
        elif name == "T0_over_dt_signal":
            dw = 2 * math.pi / (value * cfg.duration)
        elif name == "gamma31":
            updates["gamma31"] = value
        elif name == "doppler_td":
            updates["doppler_td"] = value
        elif name == "M":
            updates["M"] = int(value)
        elif name == "T_sw":
            for i, rec in enumerate(schedule):
                if rec["kind"] == "gradient_flip":
                    schedule[i] = {**rec, "time": value}
                    break
            else:
                raise ConfigError("schedule", "T_sw sweep needs a gradient_flip event")
        else:
            raise ConfigError("sweep.axes", f"unknown sweep parameter {name!r}")
    if mode == "zeta":
        coupling = {"zeta_eff": zeta, "b": None}
    else:
        coupling = {"b": b, "zeta_eff": None}
    updates.setdefault("doppler_td", base.doppler_td)
    med = replace(med, delta_omega_c=dw, **coupling, **updates)
    return replace(cfg, medium=med, schedule=tuple(schedule), scenario=None, sweep=None)


def evaluate(cfg: RunConfig, metric="efficiency", check_convergence=False):
    """Simulate one configuration; return ``(value, converged, echo_count)``."""
    medium = cfg.build_medium()
    schedule = cfg.build_schedule(medium)
    inp = cfg.build_input()
    grid = cfg.build_grid(medium, schedule)
    window = cfg.outputs.echo_window or default_echo_window(medium, schedule)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rec = simulate(medium, schedule, inp, grid)
        converged = True
        if check_convergence:
            converged = convergence_check(medium, schedule, inp, grid, window).passed
    if metric == "efficiency":
        value = efficiency(rec.output, rec.input, window)
    elif metric == "fidelity":
        mode = cfg.outputs.reference_mode
        if mode == "auto":
            flip = schedule.first("gradient_flip")
            mode = "reversed" if flip is not None and flip.mode == "retune" else "forward"
        if energy(rec.output.window(*window)) == 0:
            value = 0.0
        else:
            value = fidelity(rec.output, rec.input, window, mode)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    echoes = detect_echoes(rec.output, cfg.outputs.noise_floor, energy(rec.input))
    return float(value), bool(converged), len(echoes.echoes)


def _cell(args):
    cfg, metric, check = args
    try:
        return evaluate(cfg, metric, check) + (None,)
    except (ValueError, SimulationError, FloatingPointError) as exc:
        return math.nan, False, 0, f"{type(exc).__name__}: {exc}"


def _map(tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def grid_sweep(template: RunConfig, axes, metric="efficiency", *, pin=None, workers=1,
               check_convergence=True) -> SweepResult:
    """Evaluate ``metric`` on the cross product of one or two axes.

    Cells run in row-major order (serially or on a process pool); a failing
    cell stores NaN and its message in ``errors`` and the sweep continues.
    """
    axes = tuple(axes)
    if not 1 <= len(axes) <= 2:
        raise ValueError("grid_sweep takes one or two axes")
    if metric not in ("efficiency", "fidelity"):
        raise ValueError(f"unknown metric {metric!r}")
    names = [a.parameter for a in axes]
    if _SPACING_PARAMETERS & set(names) and pin is None and "zeta_eff" not in names:
        raise ConfigError("sweep.pin", "sweeping the comb spacing needs pin: b or zeta_eff")
    shape = tuple(len(a.values) for a in axes)
    indices = list(np.ndindex(shape))
    tasks = []
    for idx in indices:
        assign = {a.parameter: a.values[i] for a, i in zip(axes, idx)}
        tasks.append((apply_parameters(template, assign, pin), metric, check_convergence))
    out = _map(tasks, workers)
    values = np.full(shape, np.nan)
    conv = np.zeros(shape, dtype=bool)
    count = np.zeros(shape, dtype=int)
    errors = {}
    for idx, (v, c, n, err) in zip(indices, out):
        values[idx], conv[idx], count[idx] = v, c, n
        if err is not None:
            errors[idx] = err
    return SweepResult(axes, metric, values, conv, count, errors)


@dataclass
class MaximizeResult:
    best: dict
    value: float
    evaluations: int
    coarse: SweepResult


def maximize(template: RunConfig, bounds: dict, metric="efficiency", *, pin=None,
             coarse_points=9, workers=1, rel_step=0.01) -> MaximizeResult:
    """Coarse grid search, then pattern search with step halving.

    Around the incumbent, each axis is probed at +/- step; any improvement
    moves the incumbent, otherwise all steps halve. Stops once every step
    is below ``rel_step`` of its range.
    """
    if not 1 <= len(bounds) <= 2:
        raise ValueError("maximize takes bounds on one or two parameters")
    names = list(bounds)
    for name, (lo, hi) in bounds.items():
        if not lo < hi:
            raise ValueError(f"bounds for {name} must satisfy lo < hi")
    axes = [SweepAxis(n, tuple(np.linspace(*bounds[n], coarse_points))) for n in names]
    coarse = grid_sweep(template, axes, metric, pin=pin, workers=workers, check_convergence=False)
    best, value = coarse.argmax()
    if not math.isfinite(value):
        raise ValueError("every coarse cell failed; see the coarse result's errors")
    cache = {tuple(best[n] for n in names): value}
    steps = {n: (bounds[n][1] - bounds[n][0]) / (coarse_points - 1) for n in names}
    evaluations = coarse.values.size

    def score(point):
        nonlocal evaluations
        key = tuple(point[n] for n in names)
        if key not in cache:
            evaluations += 1
            v, _, _, err = _cell((apply_parameters(template, point, pin), metric, False))
            cache[key] = v if err is None else -math.inf
        return cache[key]

    while any(steps[n] >= rel_step * (bounds[n][1] - bounds[n][0]) for n in names):
        moved = False
        for n in names:
            for sign in (1, -1):
                x = min(max(best[n] + sign * steps[n], bounds[n][0]), bounds[n][1])
                if x == best[n]:
                    continue
                trial = {**best, n: x}
                v = score(trial)
                if v > value:
                    best, value, moved = trial, v, True
        if not moved:
            steps = {n: s / 2 for n, s in steps.items()}
    return MaximizeResult(best, value, evaluations, coarse)
