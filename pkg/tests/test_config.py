import pytest

from errors import ConfigError
from utils.configutil.configutil import IniConfigHandler


def _handler(tmp_path, text: str = "", env: str = None) -> IniConfigHandler:
    ini = tmp_path / "config.ini"
    ini.write_text(text, encoding="utf-8")
    env_file = tmp_path / ".env"
    if env is not None:
        env_file.write_text(env, encoding="utf-8")
    return IniConfigHandler(ini, env_file=env_file)


def test_defaults_when_file_is_missing(tmp_path, monkeypatch):
    monkeypatch.delenv("PATE_SEED", raising=False)
    handler = IniConfigHandler(tmp_path / "absent.ini", env_file=tmp_path / ".env")
    spec = handler.split_spec()
    assert (spec.train_fraction, spec.seed) == (0.7, 42)
    params = handler.boost_params()
    assert (params.n_trees, params.max_depth, params.learning_rate, params.reg_lambda) == (100, 6, 0.3, 1.0)
    settings = handler.geo_settings()
    assert settings.radius_m == 1000.0 and settings.grid_index
    assert (settings.window.start, settings.window.end) == (360, 1440)


def test_values_are_coerced(tmp_path, monkeypatch):
    monkeypatch.delenv("PATE_SEED", raising=False)
    handler = _handler(tmp_path, "[boost]\nTREES=12\nETA=0.1\n[geo]\nGRID_INDEX=off\n[run]\nJOBS=3\n")
    assert handler.boost_params().n_trees == 12
    assert handler.boost_params(n_trees=5).n_trees == 5
    assert handler.boost_params().learning_rate == 0.1
    assert handler.geo_settings().grid_index is False
    assert handler.jobs() == 3 and handler.jobs(2) == 2


@pytest.mark.parametrize("text, section, key", [
    ("[split]\nTRAIN_FRACTION=1.5\n", "split", "TRAIN_FRACTION"),
    ("[boost]\nTREES=zero\n", "boost", "TREES"),
    ("[geo]\nGRID_INDEX=maybe\n", "geo", "GRID_INDEX"),
])
def test_invalid_value_names_section_and_key(tmp_path, text, section, key):
    with pytest.raises(ConfigError) as info:
        _handler(tmp_path, text)
    assert (info.value.section, info.value.key) == (section, key)


def test_seed_precedence(tmp_path, monkeypatch):
    monkeypatch.delenv("PATE_SEED", raising=False)
    handler = _handler(tmp_path, "[split]\nSEED=5\n", env="PATE_SEED=6\n")
    assert handler.seed() == 6
    monkeypatch.setenv("PATE_SEED", "7")
    assert handler.seed() == 7
    assert handler.seed(8) == 8
    monkeypatch.delenv("PATE_SEED")
    (tmp_path / ".env").unlink()
    assert _handler(tmp_path, "[split]\nSEED=5\n").seed() == 5


def test_bad_environment_seed(tmp_path, monkeypatch):
    monkeypatch.setenv("PATE_SEED", "-3")
    with pytest.raises(ConfigError):
        _handler(tmp_path).seed()
