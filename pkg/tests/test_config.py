import pytest

from gridshell import data
from gridshell.services.config import LOCAL_KEYS, Config
from gridshell.services.errors import ConfigError


def test_load_writes_defaults(tmp_path):
    path = tmp_path / "config.yml"
    config = Config.load(path)
    assert path.is_file()
    assert config == Config()


def test_load_rejects_unknown_keys(tmp_path):
    path = tmp_path / "config.yml"
    path.write_text("N: 4\nCOLOUR: red\n")
    with pytest.raises(ConfigError, match="COLOUR"):
        Config.load(path)


def test_environment_overrides_file(tmp_path, monkeypatch):
    path = tmp_path / "config.yml"
    path.write_text("N: 4\n")
    monkeypatch.setenv("GRIDSHELL_N", "6")
    monkeypatch.setenv("GRIDSHELL_LAMBDA", "2.5")
    config = Config.load(path)
    assert config.N == 6
    assert config.LAMBDA == 2.5


def test_override_converts_strings():
    config = Config().override(**{"n": "7", "lambda": "none"})
    assert config.N == 7
    assert config.LAMBDA is None
    assert Config().override(atlas_cache="no").ATLAS_CACHE is False


def test_override_unknown_key():
    with pytest.raises(ConfigError, match="Unknown config key"):
        Config().override(colour="red")


@pytest.mark.parametrize(
    "values",
    [
        {"N": 1},
        {"MU": -1.0},
        {"MIN_GAP": 0},
        {"PLANAR_INIT": "spiral"},
        {"SCHEMA_VERSION": 99},
        {"EPSILON": 0.0},
    ],
)
def test_invalid_values(values):
    with pytest.raises(ConfigError):
        Config(**values)


def test_ints_become_floats():
    config = Config(MU=1, ROTATION=0)
    assert isinstance(config.MU, float)
    assert isinstance(config.ROTATION, float)


def test_portable_dict_drops_local_keys():
    portable = Config().as_dict(portable=True)
    assert not set(LOCAL_KEYS) & set(portable)
    assert portable["N"] == 5


def test_derived_configs():
    config = Config(POPULATION=10, SEED=3, MU=0.5, WIDTH=0.1)
    assert config.ga.population == 10
    assert config.ga.seed == 3
    assert config.planar.mu == 0.5
    assert config.planar.width == 0.1


def test_bundled_examples_load():
    assert "moon" in data.examples()
    for name in data.examples():
        config = Config.load(data.example(name))
        assert config.MESH.startswith("builtin:")
