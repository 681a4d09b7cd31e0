"""Tests for RunConfig: JSON round trip against a tmp_path."""

import json

import pytest
from mdgcn_hsi import constants
from mdgcn_hsi.errors import ConfigError, ParameterError
from mdgcn_hsi.run_config import RunConfig, read_run_config, write_run_config


@pytest.fixture
def target(tmp_path):
    return tmp_path / "config.json"


def test_defaults():
    c = RunConfig()
    assert c.per_class == 30
    assert c.val_fraction == 0.1
    assert c.k is None
    assert c.m == 0.1
    assert c.gamma == 0.2
    assert c.scales == (1, 2, 3)
    assert c.layers == 2
    assert c.hidden == 20
    assert (c.alpha, c.beta) == (0.1, 0.01)
    assert c.iters == 5000
    assert c.lr == 0.0005
    assert c.variant == "mdgcn"
    assert c.seed == 0


def test_read_merges_saved_values_over_defaults(target):
    target.write_text(json.dumps({"seed": 7, "scales": [2, 4], "variant": "mgcn"}))
    c = read_run_config(target)
    # Saved values win
    assert c.seed == 7
    assert c.scales == (2, 4)
    assert c.variant == "fixed-graph"
    # Missing keys fall back to defaults
    assert c.iters == 5000
    assert c.gamma == 0.2


def test_write_then_read_roundtrip(target):
    c = RunConfig(cube="/data/c.hsic", k=120, scales="1,3", variant="single_scale(3)", lr=0.01)
    write_run_config(c, target)
    assert read_run_config(target) == c
    saved = json.loads(target.read_text())
    assert saved["scales"] == [1, 3]
    assert saved["variant"] == "single-scale=3"


def test_write_creates_parent_directory(tmp_path):
    path = tmp_path / "a" / "b" / "config.json"
    write_run_config(RunConfig(), path)
    assert path.exists()


def test_corrupt_json_is_a_config_error(target):
    target.write_text("not json at all {{{")
    with pytest.raises(ConfigError, match="not valid JSON"):
        read_run_config(target)


def test_non_object_is_a_config_error(target):
    target.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        read_run_config(target)


def test_unknown_key_is_a_config_error(target):
    target.write_text(json.dumps({"learning_rate": 0.1}))
    with pytest.raises(ConfigError, match="learning_rate") as info:
        read_run_config(target)
    assert str(info.value).startswith(f"{target}: ")


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"iterations": 3})
    assert RunConfig.from_dict({"iters": 3}).iters == 3


def test_bad_variant_rejected():
    with pytest.raises(ParameterError):
        RunConfig(variant="gcn")


def test_updated_keeps_other_fields():
    c = RunConfig(seed=3).updated(variant="fixed-graph")
    assert (c.seed, c.variant) == (3, "fixed-graph")


def test_train_config_carries_model_settings():
    tc = RunConfig(iters=7, lr=0.1, scales=(2, 1), variant="single-scale=1", seed=9).train_config()
    assert tc.iterations == 7
    assert tc.learning_rate == 0.1
    assert tc.scales == (2, 1)
    assert tc.effective_scales == (1,)
    assert tc.seed == 9
    assert tc.dynamic


def test_defaults_has_all_documented_keys():
    """Every run-level knob is present in DEFAULTS."""
    documented = {
        "cube",
        "labels",
        "split",
        "out",
        "palette",
        "per_class",
        "val_fraction",
        "k",
        "m",
        "slic_iters",
        "gamma",
        "scales",
        "layers",
        "hidden",
        "alpha",
        "beta",
        "iters",
        "lr",
        "variant",
        "seed",
        "log_every",
    }
    assert documented == set(RunConfig.DEFAULTS)


def test_defaults_match_constants():
    d = RunConfig.DEFAULTS
    assert d["per_class"] == constants.DEFAULT_PER_CLASS
    assert d["m"] == constants.DEFAULT_COMPACTNESS
    assert d["gamma"] == constants.DEFAULT_GAMMA
    assert d["scales"] == constants.DEFAULT_SCALES
    assert d["iters"] == constants.DEFAULT_ITERATIONS
    assert d["lr"] == constants.DEFAULT_LEARNING_RATE
    assert d["variant"] == constants.VARIANT_MDGCN
