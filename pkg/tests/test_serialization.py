import json

import numpy as np
import pytest

from enslsr.mapping import make_module
from enslsr.roadmap import build_roadmap
from enslsr.serialization import (
    FormatError,
    load_dataset,
    load_json,
    load_observation,
    module_from_dict,
    module_to_dict,
    roadmap_from_dict,
    roadmap_to_dict,
    save_dataset,
    save_json,
    save_observation,
)
from enslsr.tasks import sample_eval_pair


def test_dataset_roundtrip(tmp_path, small_harvesting_data):
    path = tmp_path / "d.jsonl"
    save_dataset(small_harvesting_data, path, "harvesting", 4)
    header, loaded = load_dataset(path)
    assert header == {"task": "harvesting", "seed": 4, "n_tuples": 400, "format_version": 1}
    assert loaded == small_harvesting_data
    for a, b in zip(loaded, small_harvesting_data):
        assert a.first.nuisance == b.first.nuisance
        assert a.rho == b.rho
    # rewrite is byte-identical
    again = tmp_path / "e.jsonl"
    save_dataset(loaded, again, "harvesting", 4)
    assert again.read_bytes() == path.read_bytes()


def test_dataset_record_fields(tmp_path, small_stacking_data):
    path = tmp_path / "d.jsonl"
    save_dataset(small_stacking_data, path, "stacking", 3)
    lines = path.read_text().splitlines()
    assert len(lines) == 301
    record = json.loads(lines[1])
    assert set(record) == {"i_index", "j_index", "i_state", "j_state", "i_nuisance", "j_nuisance", "a", "u"}


def test_dataset_errors(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(FormatError):
        load_dataset(empty)
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"task": "stacking", "seed": 0, "n_tuples": 0, "format_version": 9}) + "\n")
    with pytest.raises(FormatError):
        load_dataset(bad)
    short = tmp_path / "short.jsonl"
    short.write_text(json.dumps({"task": "stacking", "seed": 0, "n_tuples": 2, "format_version": 1}) + "\n")
    with pytest.raises(FormatError):
        load_dataset(short)


def test_observation_roundtrip(tmp_path):
    start, _ = sample_eval_pair("harvesting", 3, pair_id=3)
    path = tmp_path / "o.json"
    save_observation(start, path)
    back = load_observation(path)
    assert back == start and back.nuisance == start.nuisance


def test_module_roundtrip(small_stacking_data):
    module = make_module(small_stacking_data, 7)
    d = module_to_dict(module)
    assert d["train_subset"] == sorted(d["train_subset"])
    back = module_from_dict(json.loads(json.dumps(d)), small_stacking_data)
    np.testing.assert_array_equal(back.train_latents, module.train_latents)
    assert back.merged_into == module.merged_into


def test_roadmap_roundtrip(tmp_path, small_stacking_data):
    module = make_module(small_stacking_data, 7)
    roadmap = build_roadmap(small_stacking_data, module, 10)
    path = tmp_path / "r.json"
    save_json(roadmap_to_dict(roadmap), path)
    back = roadmap_from_dict(load_json(path))
    assert back.edges == roadmap.edges
    assert back.epsilon_used == roadmap.epsilon_used and back.c_max == 10
    for a, b in zip(back.nodes, roadmap.nodes):
        np.testing.assert_array_equal(a.centroid, b.centroid)
        assert a.composition == b.composition
    d = roadmap_to_dict(roadmap)
    d["nodes"] = d["nodes"][::-1]
    with pytest.raises(FormatError):
        roadmap_from_dict(d)
