import copy
import json

import pytest

from multiprio.config import ConfigError, config_from_dict, parse_config

MINIMAL = {
    "schema": 1,
    "map": {"lanes": {"a": {"loop": {"center": [0, 0], "length": 6, "height": 3, "radius": 1.0}}}},
    "vehicles": [{"lane": "a", "start_s": 0.0, "speed": 0.8}],
}


def doc(**kw):
    d = copy.deepcopy(MINIMAL)
    d.update(kw)
    return d


def violations(d):
    with pytest.raises(ConfigError) as err:
        config_from_dict(d)
    return err.value.violations


def test_minimal_config_gets_defaults():
    cfg = config_from_dict(doc())
    assert cfg.strategy == "explore" and cfg.seeds == [0] and cfg.timing == "synthetic"
    assert cfg.n_steps == 35 and cfg.n_vehicles == 1
    assert cfg.mpa.step_time == 0.2 and cfg.mpa.horizon == 6


def test_step_count_from_duration():
    assert config_from_dict(doc(duration=7.0, step_time=0.2)).n_steps == 35
    assert config_from_dict(doc(duration=1.0, step_time=0.1)).n_steps == 10


def test_misspelled_strategy_names_field_and_options():
    (msg,) = violations(doc(strategy="optimaal"))
    assert msg.startswith("strategy:")
    for name in ("constant", "random", "constraint", "color", "optimal", "explore"):
        assert name in msg


def test_all_violations_reported_together():
    errs = violations(doc(strategy="optimaal", duration=7.05, budget=0, seeds=[1.5], bogus=1))
    fields = {e.split(":")[0] for e in errs}
    assert {"strategy", "duration", "budget", "seeds", "bogus"} <= fields


def test_non_integral_duration_rejected():
    assert any(e.startswith("duration") for e in violations(doc(duration=7.1)))


def test_speed_must_be_a_level():
    d = doc(vehicles=[{"lane": "a", "start_s": 0.0, "speed": 0.7}])
    assert any("speed" in e for e in violations(d))


def test_open_path_rejected():
    lanes = {"a": {"start": [0, 0, 0], "segments": [["line", 2.0], ["arc", 1.0, 90]]}}
    d = doc(map={"lanes": lanes})
    assert any("not closed" in e for e in violations(d))


def test_unknown_lane_and_vehicle_count():
    d = doc(vehicles=[{"lane": "z", "speed": 0.8}], n_vehicles=2)
    errs = violations(d)
    assert any("unknown lane" in e for e in errs)
    assert any(e.startswith("n_vehicles") for e in errs)


def test_schema_version_required():
    assert any(e.startswith("schema") for e in violations(doc(schema=2)))


def test_parse_file_and_bad_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc(name="x")))
    assert parse_config(p).name == "x"
    p.write_text("{")
    with pytest.raises(ConfigError):
        parse_config(p)
