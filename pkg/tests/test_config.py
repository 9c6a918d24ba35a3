import math
from pathlib import Path

import pytest
import yaml

from gfcomb.config import ConfigError, dump_config, load_config, parse_config, parse_quantity

CONFIGS = sorted((Path(__file__).parents[1] / "src" / "gfcomb" / "configs").glob("*.yaml"))


def minimal(**medium):
    base = {"M": 9, "d": "0.56 mm", "L0": "1 mm", "T0": "400 ns", "zeta_eff": 1.28}
    base.update(medium)
    return {"medium": {k: v for k, v in base.items() if v is not None}}


@pytest.mark.parametrize("text,kind,value", [
    ("50 ns", "time", 50e-9), ("1.5us", "time", 1.5e-6), ("0.56 mm", "length", 0.56e-3),
    ("-0.7 GHz", "angular_frequency", -2 * math.pi * 0.7e9), ("3e6 rad/s", "angular_frequency", 3e6),
    ("1e11 cm^-3", "density", 1e17), ("100 uK", "temperature", 1e-4), ("inf", "time", math.inf),
    (2.5, "time", 2.5), ("1e5 /s", "rate", 1e5),
])
def test_units(text, kind, value):
    assert parse_quantity(text, kind, "k") == pytest.approx(value)


@pytest.mark.parametrize("text", ["50 parsecs", "fast", "ns 50"])
def test_bad_units_name_the_key(text):
    with pytest.raises(ConfigError, match="medium.T0"):
        parse_config(minimal(T0=text))


def test_exactly_one_coupling_source():
    with pytest.raises(ConfigError, match="coupling"):
        parse_config(minimal(zeta_eff=None))
    with pytest.raises(ConfigError, match="coupling"):
        parse_config(minimal(b=9e9))


def test_period_or_spacing():
    cfg = parse_config(minimal(T0=None, delta_omega_c="2.5 MHz"))
    assert cfg.build_medium().T0 == pytest.approx(400e-9)
    with pytest.raises(ConfigError, match="T0"):
        parse_config(minimal(delta_omega_c=1e7))


def test_unknown_keys_rejected():
    raw = minimal()
    raw["grid"] = {"dz": 1}
    with pytest.raises(ConfigError, match="grid.dz"):
        parse_config(raw)


def test_schedule_errors_name_the_event():
    raw = minimal()
    raw["schedule"] = [{"kind": "gradient_flip", "time": "130 ns", "mode": "sideways"}]
    with pytest.raises(ConfigError, match=r"schedule\[0\]"):
        parse_config(raw)


def test_tau_ramp_resolved_against_medium():
    raw = minimal(T0="450 ns")
    raw["schedule"] = [{"kind": "phase_ramp", "time": "50 ns", "tau": "112.5 ns"}]
    cfg = parse_config(raw)
    ev = cfg.build_schedule().events[0]
    assert ev.delta_phi == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_bundled_configs_round_trip(path):
    cfg = load_config(path)
    again = parse_config(yaml.safe_load(dump_config(cfg)))
    assert again == cfg
    assert again.build_medium() == cfg.build_medium()


def test_scenario_config_derives_caption_thickness():
    cfg = load_config(CONFIGS[[p.stem for p in CONFIGS].index("fig2_gfc")])
    med = cfg.build_medium()
    assert med.zeta_eff == pytest.approx(1.28, abs=0.01)
    assert med.T0 == pytest.approx(400e-9)
    assert med.doppler_td == pytest.approx(1e-6)


def test_yaml_syntax_error(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("medium: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(p)


def test_csv_signal_path_is_relative_to_config(tmp_path):
    from gfcomb.signals import gaussian, write_csv
    write_csv(gaussian(50e-9), tmp_path / "in.csv")
    raw = minimal()
    raw["signal"] = {"kind": "csv", "path": "in.csv"}
    (tmp_path / "c.yaml").write_text(yaml.safe_dump(raw))
    cfg = load_config(tmp_path / "c.yaml")
    assert cfg.duration == pytest.approx(50e-9, rel=1e-3)
    assert len(cfg.build_input()) > 100
