import json

import pytest

from enslsr.config import ConfigError, RunConfig, config_from_dict, load_config, override


def test_defaults():
    cfg = RunConfig()
    assert cfg.task == "stacking" and cfg.n_tuples == 2500
    assert cfg.mapping.subset_fraction == 0.85 and cfg.mapping.d == 16
    assert cfg.mapping.seeds == tuple(range(1, 11))
    assert cfg.roadmap.n_eps == 50 and cfg.roadmap.min_cluster_size == 1
    assert cfg.planner.max_paths == 50
    e = cfg.ensemble
    assert (e.measure, e.substitution_cost, e.tau, e.insertion_cost, e.deletion_cost) == ("su+sn", 1.0, 0.5, 0.5, 1.0)
    assert cfg.eval.n_pairs == 1000
    assert not cfg.directed
    assert config_from_dict({"task": "harvesting"}).directed
    assert config_from_dict({"task": "harvesting"}).n_tuples == 5000


def test_empty_config_is_all_defaults():
    assert config_from_dict({}) == RunConfig()


@pytest.mark.parametrize(
    "raw, field",
    [
        ({"dataset": {"frac_no_action": 1.5}}, "dataset.frac_no_action"),
        ({"mapping": {"p_merge": -0.1}}, "mapping.p_merge"),
        ({"mapping": {"subset_fraction": 0}}, "mapping.subset_fraction"),
        ({"roadmap": {"c_max": [0]}}, "roadmap.c_max"),
        ({"ensemble": {"measure": "cos"}}, "ensemble.measure"),
        ({"task": "folding"}, "task"),
        ({"eval": {"n_pairs": 0}}, "eval.n_pairs"),
        ({"mapping": {"colour": 1}}, "mapping.colour"),
        ({"extras": {}}, "extras"),
    ],
)
def test_invalid_fields_are_named(raw, field):
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        config_from_dict(raw)


def test_lists_and_scalars(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"roadmap": {"c_max": 5}, "mapping": {"seeds": [3, 4]}}))
    cfg = load_config(path)
    assert cfg.roadmap.c_max == (5,) and cfg.mapping.seeds == (3, 4)


def test_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{")
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.json")


def test_override():
    cfg = override(RunConfig(), "mapping.sigma_noise=0.1")
    assert cfg.mapping.sigma_noise == 0.1
    cfg = override(cfg, "roadmap.c_max=[1,10]")
    assert cfg.roadmap.c_max == (1, 10)
    cfg = override(cfg, "task=harvesting")
    assert cfg.task == "harvesting"
    with pytest.raises(ConfigError):
        override(cfg, "mapping.nope=1")
    with pytest.raises(ConfigError):
        override(cfg, "mapping.sigma_noise")
    with pytest.raises(ConfigError, match="mapping.p_split"):
        override(cfg, "mapping.p_split=2")


def test_derived_objects():
    cfg = override(RunConfig(), "ensemble.substitution_cost=2")
    assert cfg.edit_costs().substitution_cost == 2
    assert cfg.mapping_config().subset_fraction == 0.85
