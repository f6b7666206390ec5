"""RunConfig validation, environment loading and the profile store."""

import pytest
from dotenv import load_dotenv
from pydantic import ValidationError

from biscount.config import RunConfig
from biscount.config_store import JSONConfigStore
from biscount.errors import ProfileNotFoundError


def test_defaults():
    cfg = RunConfig()
    assert cfg.epsilon == 0.3
    assert cfg.seed == 0
    assert cfg.t0_override is None
    assert cfg.near_cut_strategy == "auto"
    assert cfg.brute_force_threshold == 24
    assert cfg.enforce_regime


def test_epsilon_is_clamped_to_one():
    assert RunConfig(epsilon=3.0).epsilon == 1.0
    cfg = RunConfig()
    cfg.epsilon = 2.0
    assert cfg.epsilon == 1.0


@pytest.mark.parametrize(
    "field, value",
    [
        ("epsilon", 0),
        ("seed", -1),
        ("t0_override", 0),
        ("workers", 0),
        ("near_cut_strategy", "greedy"),
        ("scan_limit", 27),
        ("no_such_field", 1),
    ],
)
def test_invalid_values_are_rejected(field, value):
    with pytest.raises(ValidationError):
        RunConfig(**{field: value})


def test_from_env(monkeypatch):
    monkeypatch.setenv("BISCOUNT_EPSILON", "0.4")
    monkeypatch.setenv("BISCOUNT_WORKERS", "3")
    monkeypatch.setenv("BISCOUNT_SEED", " ")
    cfg = RunConfig.from_env(seed=9, c_const=None)
    assert cfg.epsilon == 0.4
    assert cfg.workers == 3
    assert cfg.seed == 9
    assert cfg.c_const == 1.0


def test_from_env_reads_dotenv(tmp_path, monkeypatch):
    (tmp_path / ".env").write_text("BISCOUNT_SAMPLE_BUDGET=1234\n", encoding="utf-8")
    monkeypatch.setattr("biscount.config.load_dotenv", lambda: load_dotenv(tmp_path / ".env"))
    assert RunConfig.from_env().sample_budget == 1234


def test_merged_ignores_none():
    cfg = RunConfig(seed=5).merged(seed=None, epsilon=0.2)
    assert cfg.seed == 5
    assert cfg.epsilon == 0.2


def test_store_round_trip(tmp_path):
    store = JSONConfigStore(tmp_path / "nested" / "profiles.json")
    assert store.load_all() == {}
    store.save("desk", RunConfig(t0_override=2, enforce_regime=False))
    store.save("ci", RunConfig(seed=3))
    again = JSONConfigStore(tmp_path / "nested" / "profiles.json")
    assert set(again.load_all()) == {"ci", "desk"}
    desk = again.load("desk")
    assert desk.t0_override == 2 and not desk.enforce_regime
    assert desk.model_fields_set == {"t0_override", "enforce_regime"}


def test_store_missing_profile(tmp_path):
    with pytest.raises(ProfileNotFoundError, match="nope") as err:
        JSONConfigStore(tmp_path / "profiles.json").load("nope")
    assert isinstance(err.value, KeyError)


def test_store_default_path_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("BISCOUNT_PROFILE_PATH", str(tmp_path / "p.json"))
    assert JSONConfigStore().path == tmp_path / "p.json"
    monkeypatch.delenv("BISCOUNT_PROFILE_PATH")
    assert str(JSONConfigStore().path) == "config/profiles.json"
