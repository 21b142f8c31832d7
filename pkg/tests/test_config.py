import json
import math

import pytest

from leafvsa.config import Config, config_from_dict, config_to_dict, load_config
from leafvsa.errors import ConfigError


def write(tmp_path, obj, name="c.json"):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_minimal_spring_block_gets_defaults(tmp_path):
    cfg = load_config(write(tmp_path, {"spring": {"n": 4}}))
    assert cfg.spring.n == 4
    assert cfg.screw == Config().screw
    assert cfg.sim.dt == 1e-4


def test_thickness_rule_named(tmp_path):
    with pytest.raises(ConfigError, match="thickness exceeds width"):
        load_config(write(tmp_path, {"spring": {"t": 0.02}}))


def test_zero_travel_rule_named(tmp_path):
    with pytest.raises(ConfigError, match="strictly positive"):
        load_config(write(tmp_path, {"screw": {"x_min": 0.0}}))


def test_all_violations_reported():
    bad = {"spring": {"E": -1}, "dynamics": {"J_l": 0}, "sim": {"dt": 0},
           "control": {"motor1": {"kp": -2}}, "extra": 1}
    with pytest.raises(ConfigError) as info:
        config_from_dict(bad)
    problems = info.value.problems
    assert len(problems) >= 5
    text = " ".join(problems)
    for needle in ("spring.E", "J_l", "sim.dt", "control.motor1.kp", "extra"):
        assert needle in text


def test_unknown_field_rejected():
    with pytest.raises(ConfigError, match="screw.pitch"):
        config_from_dict({"screw": {"pitch": 1}})


def test_travel_beyond_spring_length():
    with pytest.raises(ConfigError, match="x_max"):
        config_from_dict({"spring": {"L": 0.05}})


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.json")


def test_parse_error_position(tmp_path):
    with pytest.raises(ConfigError, match=r"line 2, column"):
        load_config(write(tmp_path, '{"spring":\n  {"n": }}'))


def test_null_limits_mean_unbounded():
    cfg = config_from_dict({"control": {"motor2": {"u_max": None, "u_min": -1.0}}})
    assert cfg.motor2.u_max == math.inf and cfg.motor2.u_min == -1.0


def test_round_trip():
    cfg = config_from_dict({"spring": {"n": 6}, "control": {"motor1": {"u_max": 50.0}}})
    again = config_from_dict(json.loads(json.dumps(config_to_dict(cfg))))
    assert again == cfg
