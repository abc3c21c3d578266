import pytest

from utils.config import Config, ConfigError, SimConfig, config, load_flat_config


def test_yaml_defaults_load():
    sim = SimConfig.from_config(config)
    assert sim.comm_radius == 10.0
    assert sim.message_budget == 222
    assert sim.rows == 6 and sim.cols == 2 and sim.forklifts == 4
    assert config.get("profiles.lossy.drop_rate") == 0.2


def test_get_with_missing_path():
    assert config.get("simulation.nowhere", "fallback") == "fallback"
    assert config.get_section("nowhere") == {}


def test_missing_yaml_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        Config(str(tmp_path / "absent.yaml"))


def test_overrides_coerce_types():
    sim = SimConfig().with_overrides({"comm-radius": "12.5", "rows": 3.0, "seed": None})
    assert sim.comm_radius == 12.5
    assert sim.rows == 3
    assert sim.seed == SimConfig().seed


def test_overrides_reject_unknown_and_bad_values():
    with pytest.raises(ConfigError):
        SimConfig().with_overrides({"colour": "red"})
    with pytest.raises(ConfigError):
        SimConfig().with_overrides({"rows": 2.5})
    with pytest.raises(ConfigError):
        SimConfig().with_overrides({"period": "fast"})


@pytest.mark.parametrize("field, value", [
    ("duration", -5.0),
    ("period", 0.0),
    ("drop_rate", 1.5),
    ("latency", 2.0),
    ("quarantine", 0),
    ("loading_empty", 11),
    ("duration", float("inf")),
    ("duration", float("nan")),
    ("drop_rate", float("nan")),
    ("max_speed", float("inf")),
])
def test_validate_rejects_out_of_range(field, value):
    with pytest.raises(ConfigError, match=field):
        SimConfig().with_overrides({field: value}).validate()


def test_validate_accepts_defaults():
    assert SimConfig().validate() == SimConfig()


def test_flat_manifest(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed = 7\n# comment\n\ndrop-rate = 0.1  # lossy\nscenario = spawn-demo\n")
    values = load_flat_config(str(path))
    assert values == {"seed": 7, "drop_rate": 0.1, "scenario": "spawn-demo"}
    sim = SimConfig().with_overrides(values)
    assert (sim.seed, sim.drop_rate, sim.scenario) == (7, 0.1, "spawn-demo")


def test_flat_manifest_rejects_malformed_lines(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("seed 7\n")
    with pytest.raises(ConfigError, match="run.cfg:1"):
        load_flat_config(str(path))
