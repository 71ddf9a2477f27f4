import json
import math

import pytest

from lifi_uplink.config import DEFAULTS, PRESETS, ConfigError, load_document, parse_config, parse_range


def test_defaults_and_sitting_preset_agree(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("{}")
    a = parse_config(str(path), "table3-sitting")
    b = parse_config()
    assert a.raw == b.raw == DEFAULTS
    assert a.geom.z_hat == pytest.approx(2.25)
    assert a.budget.n0 == pytest.approx(6.40621e-22, rel=1e-5)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_build(name):
    parse_config(preset=name)


def test_standing_preset():
    cfg = parse_config(preset="table3-standing")
    assert cfg.geom.z_u == 1.25
    assert cfg.orient.pose == "standing"


def test_degree_aliases(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"optics": {"fov_deg": 30}}))
    assert parse_config(str(path)).optics.fov == pytest.approx(math.radians(30))
    cfg = parse_config(overrides=["orientation.pose=\"custom\"", "orientation.mu_L_deg=20", "orientation.sigma_L_deg=5"])
    assert cfg.orient.mu_L == pytest.approx(math.radians(20))


def test_overrides_apply_last(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"blockers": {"lambda_b": 0.3}}))
    cfg = parse_config(str(path), "fig4-default", ["blockers.lambda_b=0.2", "run.seed=7"])
    assert cfg.lambda_b == 0.2 and cfg.run["seed"] == 7


@pytest.mark.parametrize("override, field", [
    ("geometry.height=2", "geometry.height"),
    ("geometry.z_u=3.5", "geometry"),
    ("network.lambda_a=0", "network.lambda_a"),
    ("modulation.m_max=12", "modulation.m_max"),
    ("orientation.pose=\"lying\"", "orientation.pose"),
    ("run.trials=0", "run.trials"),
    ("run.xi_db=\"1:2\"", "run.xi_db"),
    ("network.layout=\"hex\"", "network.layout"),
])
def test_invalid_documents_name_the_field(override, field):
    with pytest.raises(ConfigError) as err:
        parse_config(overrides=[override])
    assert str(err.value).startswith(field)


def test_bad_files(tmp_path):
    with pytest.raises(ConfigError):
        load_document(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_document(str(bad))
    with pytest.raises(ConfigError):
        load_document(preset="nope")


def test_parse_range():
    assert parse_range("60:110:100") == (60.0, 110.0, 100)
    for bad in ("1:2", "a:b:c", "5:1:3", "1:2:0"):
        with pytest.raises(ConfigError):
            parse_range(bad)
