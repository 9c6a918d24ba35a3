"""Command-line front end: ``gfcomb {run,sweep,analytic,derive}``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from gfcomb import __version__, kernel
from gfcomb.analytic import first_pass_output, first_pass_prediction
from gfcomb.config import ConfigError, dump_config, load_config, parse_config, parse_quantity
from gfcomb.medium import comb_period, coupling_from_physical, doppler_time, finesse
from gfcomb.metrics import default_echo_window, detect_echoes, efficiency
from gfcomb.signals import energy, read_csv, write_csv
from gfcomb.solver import SimulationError, simulate, write_record_csv, write_snapshots_csv
from gfcomb.sweep import SweepAxis, grid_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _prepare_dir(path):
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    probe = path / ".write_test"
    probe.write_text("")
    probe.unlink()
    return path


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _write_meta(out, name, command, extra):
    meta = {"command": command, "version": __version__, "backend": kernel.BACKEND,
            "created": datetime.datetime.now(datetime.timezone.utc).isoformat(), **extra}
    _write_json(out / f"{name}_meta.json", meta)


def _plot_trace(record, path, window):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("warning: matplotlib not installed; skipping plot", file=sys.stderr)
        return
    fig, ax = plt.subplots(figsize=(7, 3.5))
    t = record.times * 1e9
    ax.plot(t, record.input.intensity, lw=1, color="0.5", label="input")
    ax.plot(t, record.output.intensity, lw=1.2, color="C3", label="output")
    ax.axvspan(window[0] * 1e9, window[1] * 1e9, color="C0", alpha=0.08, label="echo window")
    ax.set_xlabel("t [ns]")
    ax.set_ylabel("|a|^2")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _plot_sweep(result, path):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("warning: matplotlib not installed; skipping plot", file=sys.stderr)
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    x = np.asarray(result.axes[0].values)
    if len(result.axes) == 2 and result.values.shape[0] > 1 and result.values.shape[1] > 1:
        y = np.asarray(result.axes[1].values)
        cs = ax.contourf(x, y, result.values.T, levels=20)
        fig.colorbar(cs, ax=ax, label=result.metric_name)
        ax.set_ylabel(result.axes[1].parameter)
    else:
        ax.plot(x, result.values.reshape(len(x), -1), marker="o")
        ax.set_ylabel(result.metric_name)
    ax.set_xlabel(result.axes[0].parameter)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_run(args):
    cfg = load_config(args.config)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    medium = cfg.build_medium()
    schedule = cfg.build_schedule(medium)
    inp = cfg.build_input()
    grid = cfg.build_grid(medium, schedule)
    window = cfg.outputs.echo_window or default_echo_window(medium, schedule)
    snapshot = args.snapshot or cfg.outputs.snapshot
    snap_times = cfg.outputs.snapshot_times
    if snapshot and not snap_times:
        snap_times = tuple(np.linspace(inp.t0, grid.t_end, 11))
    out = _prepare_dir(args.out_dir or cfg.outputs.out_dir)
    name = cfg.outputs.name

    start = time.perf_counter()
    record = simulate(medium, schedule, inp, grid, snapshot_times=snap_times if snapshot else ())
    elapsed = time.perf_counter() - start

    mode = cfg.outputs.reference_mode
    if mode == "auto":
        flip = schedule.first("gradient_flip")
        mode = "reversed" if flip is not None and flip.mode == "retune" else "forward"
    if cfg.signal.kind == "peak_train":
        marks = [p.center for p in cfg.signal.peaks]
    elif cfg.signal.kind == "gaussian":
        marks = [cfg.signal.center]
    else:
        marks = [float(record.input.times[np.argmax(record.input.intensity)])]
    report = detect_echoes(record.output, cfg.outputs.noise_floor, energy(record.input),
                           reference=record.input, reference_mode=mode, transmitted_time=marks)
    eta = efficiency(record.output, record.input, window)
    data = {
        "echo_report": report.to_dict(),
        "efficiency": eta,
        "echo_window": list(window),
        "medium": {"M": medium.M, "d": medium.d, "L0": medium.L0, "b": medium.b,
                   "delta_omega_c": medium.delta_omega_c, "gamma31": medium.gamma31,
                   "doppler_td": None if math.isinf(medium.doppler_td) else medium.doppler_td,
                   "zeta_eff": medium.zeta_eff, "T0": medium.T0,
                   "finesse": None if math.isinf(finesse(medium)) else finesse(medium)},
        "events": record.event_log,
    }
    write_record_csv(record, out / f"{name}_output.csv")
    _write_json(out / f"{name}_report.json", data)
    if snapshot:
        write_snapshots_csv(record, out / f"{name}_snapshots.csv")
    if args.plot or cfg.outputs.plot:
        _plot_trace(record, out / f"{name}_plot.svg", window)
    _write_meta(out, name, "run", {"config": str(args.config), "runtime_seconds": elapsed})

    print(f"efficiency in [{window[0] * 1e9:.1f}, {window[1] * 1e9:.1f}) ns: {eta:.4f}")
    print(f"transmitted fraction: {report.transmitted_fraction:.4f}")
    for e in report.echoes:
        print(f"echo at {e.center_time * 1e9:.2f} ns: fraction {e.energy_fraction:.4f}, "
              f"FWHM {e.fwhm * 1e9:.2f} ns")
    print(f"outputs written to {out}")
    return EXIT_OK


def cmd_sweep(args):
    cfg = load_config(args.config)
    if args.dump_config:
        sys.stdout.write(dump_config(cfg))
        return EXIT_OK
    if cfg.sweep is None:
        raise ConfigError("sweep", "config has no sweep section")
    out = _prepare_dir(args.out_dir or cfg.outputs.out_dir)
    name = cfg.outputs.name
    sw = cfg.sweep
    axes = [SweepAxis(a.parameter, a.values) for a in sw.axes]
    workers = args.workers if args.workers is not None else sw.workers
    start = time.perf_counter()
    result = grid_sweep(cfg, axes, sw.metric, pin=sw.pin, workers=workers,
                        check_convergence=sw.check_convergence)
    elapsed = time.perf_counter() - start
    result.to_csv(out / f"{name}_sweep.csv")
    result.to_json(out / f"{name}_sweep.json")
    if args.plot or cfg.outputs.plot:
        _plot_sweep(result, out / f"{name}_sweep.svg")
    _write_meta(out, name, "sweep", {"config": str(args.config), "runtime_seconds": elapsed,
                                     "workers": workers})
    best, value = result.argmax()
    print(f"{result.metric_name} max {value:.4f} at {best}")
    if result.errors:
        print(f"{len(result.errors)} cell(s) failed; see {name}_sweep.json", file=sys.stderr)
    print(f"outputs written to {out}")
    return EXIT_OK


def cmd_analytic(args):
    if args.config:
        cfg = load_config(args.config)
        medium = cfg.build_medium()
        zeta, F, T0 = medium.zeta_eff, finesse(medium), medium.T0
    else:
        if args.zeta is None:
            raise ConfigError("--zeta", "give --zeta or --config")
        zeta = parse_quantity(args.zeta, "dimensionless", "--zeta")
        F = parse_quantity(args.finesse, "dimensionless", "--finesse")
        T0 = parse_quantity(args.T0, "time", "--T0") if args.T0 is not None else None
    if not zeta >= 0:
        raise ConfigError("--zeta", "must be >= 0")
    if not F > 0:
        raise ConfigError("--finesse", "must be positive")
    pred = first_pass_prediction(zeta, F, T0 or 0.0)
    print(f"zeta_eff: {zeta:.6g}")
    print(f"finesse: {F:.6g}")
    print(f"transmitted amplitude factor: {pred.transmitted_amplitude_factor:.6g}")
    print(f"echo amplitude factor: {pred.echo_amplitude_factor:.6g}")
    print(f"transmitted fraction: {pred.transmitted_fraction:.4f}")
    print(f"echo efficiency: {pred.echo_efficiency:.4f}")
    if args.input:
        if T0 is None:
            raise ConfigError("--T0", "needed to place the echo of an input envelope")
        inp = read_csv(args.input)
        out = _prepare_dir(args.out_dir or ".")
        write_csv(first_pass_output(inp, zeta, F, T0), out / "analytic_output.csv")
        print(f"predicted envelope written to {out / 'analytic_output.csv'}")
    return EXIT_OK


_DERIVE_FLAGS = {
    "wavelength": "signal_wavelength", "signal_frequency": "signal_frequency",
    "dipole": "dipole_matrix_element", "rabi": "control_rabi",
    "detuning": "one_photon_detuning", "density": "atomic_density",
    "temperature": "temperature", "mass": "atomic_mass", "refractive_index": "refractive_index",
}


def cmd_derive(args):
    if args.config:
        cfg = load_config(args.config)
        if cfg.scenario is None:
            raise ConfigError("scenario", "derive needs a scenario section")
        scenario, med = cfg.scenario, cfg.medium
        geometry = {"M": med.M, "d": med.d, "delta_omega_c": med.delta_omega_c,
                    "gamma31": med.gamma31}
    else:
        raw_s = {v: getattr(args, k) for k, v in _DERIVE_FLAGS.items() if getattr(args, k) is not None}
        raw = {"medium": {"M": args.M, "d": args.d, "T0": args.T0, "gamma31": args.gamma31},
               "scenario": raw_s}
        cfg = parse_config(raw)
        scenario, med = cfg.scenario, cfg.medium
        geometry = {"M": med.M, "d": med.d, "delta_omega_c": med.delta_omega_c,
                    "gamma31": med.gamma31}
    b = coupling_from_physical(scenario)
    td = doppler_time(scenario) if scenario.atomic_mass > 0 else math.inf
    medium = cfg.build_medium()
    values = {"b": b, "doppler_td": td, "zeta_eff": medium.zeta_eff, "T0": comb_period(medium),
              "finesse": finesse(medium), "M": geometry["M"], "d": geometry["d"]}
    print(f"b = |g|^2 N: {b:.6g} 1/(s m)")
    print(f"doppler time t_d: {td * 1e6:.4g} us" if math.isfinite(td) else "doppler time t_d: inf")
    print(f"zeta_eff: {values['zeta_eff']:.4f}")
    print(f"T0: {values['T0'] * 1e9:.2f} ns")
    print(f"finesse: {values['finesse']:.6g}")
    if args.out_dir:
        out = _prepare_dir(args.out_dir)
        _write_json(out / "derive.json",
                    {k: (None if isinstance(v, float) and math.isinf(v) else v)
                     for k, v in values.items()})
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="gfcomb", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gfcomb {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required, help="YAML run configuration")
        sp.add_argument("--out-dir", help="output directory (overrides outputs.out_dir)")
        sp.add_argument("--plot", action="store_true", help="also write an SVG plot")
        sp.add_argument("--snapshot", action="store_true", help="also write field snapshots")
        sp.add_argument("--dump-config", action="store_true",
                        help="print the canonical (SI) configuration and exit")

    sp = sub.add_parser("run", help="simulate one configuration")
    common(sp, True)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run the configuration's parameter sweep")
    common(sp, True)
    sp.add_argument("--workers", type=int, help="worker processes (overrides sweep.workers)")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("analytic", help="closed-form first-pass prediction")
    common(sp, False)
    sp.add_argument("--zeta", help="effective optical thickness per section")
    sp.add_argument("--finesse", default="inf", help="comb finesse (default inf)")
    sp.add_argument("--T0", help="comb period, e.g. '400 ns'")
    sp.add_argument("--input", help="input envelope CSV (t_seconds, re, im)")
    sp.set_defaults(func=cmd_analytic)

    sp = sub.add_parser("derive", help="derive b, t_d, zeta_eff, T0 and finesse from physics")
    common(sp, False)
    for flag, help_ in (("wavelength", "signal wavelength, e.g. '795 nm'"),
                        ("signal-frequency", "signal angular frequency"),
                        ("dipole", "transition dipole, e.g. '1.73 e a0'"),
                        ("rabi", "control Rabi frequency, e.g. '220 MHz'"),
                        ("detuning", "one-photon detuning, e.g. '-0.7 GHz'"),
                        ("density", "atomic density, e.g. '1e11 cm^-3'"),
                        ("temperature", "temperature, e.g. '100 uK'"),
                        ("mass", "atomic mass, e.g. '86.909 u'"),
                        ("refractive-index", "refractive index (default 1)")):
        sp.add_argument(f"--{flag}", help=help_)
    sp.add_argument("--M", default=9, help="number of sections")
    sp.add_argument("--d", default="0.56 mm", help="section length")
    sp.add_argument("--T0", default="400 ns", help="comb period")
    sp.add_argument("--gamma31", default=0, help="spin decoherence rate")
    sp.set_defaults(func=cmd_derive)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
