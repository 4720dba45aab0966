import csv
import json

import pytest

from enslsr.cli import main
from enslsr.evaluation import CSV_FIELDS
from enslsr.serialization import load_json, roadmap_from_dict, save_observation
from enslsr.roadmap import wcc_count
from enslsr.tasks import Observation, SystemState, sample_nuisance

import numpy as np


def write_config(path, **sections):
    path.write_text(json.dumps(sections))
    return str(path)


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def stacking_run(workdir):
    cfg = write_config(
        workdir / "cfg.json",
        task="stacking",
        dataset={"n_tuples": 2500, "seed": 1},
        mapping={"seeds": [1, 2, 3]},
        eval={"n_pairs": 20},
    )
    assert main(["gen-dataset", "--config", cfg, "--out", str(workdir / "ds.jsonl")]) == 0
    assert main(["--threads", "2", "build", "--config", cfg, "--dataset", str(workdir / "ds.jsonl"), "--out", str(workdir / "models")]) == 0
    return cfg


def test_gen_dataset_is_reproducible(workdir, stacking_run):
    out = workdir / "again.jsonl"
    assert main(["gen-dataset", "--config", stacking_run, "--out", str(out)]) == 0
    assert out.read_bytes() == (workdir / "ds.jsonl").read_bytes()
    assert len(out.read_text().splitlines()) == 2501


def test_build_writes_one_module_per_seed(workdir, stacking_run):
    models = workdir / "models"
    assert sorted(p.name for p in models.glob("module_seed*.json")) == [f"module_seed{s}.json" for s in (1, 2, 3)]
    roadmaps = sorted(models.glob("roadmap_seed*_cmax20.json"))
    assert len(roadmaps) == 3
    for p in roadmaps:
        r = roadmap_from_dict(load_json(p))
        assert wcc_count(r) <= r.c_max


def test_build_many_cmax_shares_one_module(workdir, stacking_run):
    out = workdir / "cmax_models"
    code = main(
        ["build", "--config", stacking_run, "--set", "mapping.seeds=[4]", "--set", "roadmap.c_max=[1,10,20]",
         "--dataset", str(workdir / "ds.jsonl"), "--out", str(out)]
    )
    assert code == 0
    assert len(list(out.glob("module_seed*.json"))) == 1
    assert len(list(out.glob("roadmap_seed4_cmax*.json"))) == 3


def test_plan_and_trace(workdir, stacking_run, capsys):
    s, g = workdir / "s.json", workdir / "g.json"
    assert main(["sample-pair", "--config", stacking_run, "--pair-id", "2", "--start", str(s), "--goal", str(g)]) == 0
    capsys.readouterr()
    assert main(["plan", "--models", str(workdir / "models"), "--start", str(s), "--goal", str(g), "--trace"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["n_members"] == 3 and out["selected"]
    for p in out["selected"]:
        assert len(p["node_sequence"]) == len(p["actions"]) + 1 == len(p["states"])
    assert len(out["trace"]) == sum(out["plans_per_member"])
    row = out["trace"][0]
    assert set(row) == {"i", "j", "c", "best"}
    assert all(set(b) == {"k", "l", "s_u", "s_n", "s"} for b in row["best"])
    assert main(["plan", "--models", str(workdir / "models"), "--start", str(s), "--goal", str(g), "--naive"]) == 0
    naive = json.loads(capsys.readouterr().out)
    assert len(naive["selected"]) == sum(naive["plans_per_member"])


def test_eval_members_csv(workdir, stacking_run):
    out = workdir / "members.csv"
    assert main(["eval", "--config", stacking_run, "--models", str(workdir / "models"), "--sweep", "members", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(CSV_FIELDS)
    rows = list(csv.DictReader(text.splitlines()))
    assert {r["m"] for r in rows} == {"3"}
    assert all(r["n_pairs"] == "20" for r in rows)
    again = workdir / "members2.csv"
    main(["--threads", "1", "eval", "--config", stacking_run, "--models", str(workdir / "models"), "--sweep", "members", "--out", str(again)])
    assert again.read_bytes() == out.read_bytes()


def test_eval_cmax_and_pairs_flag(workdir, stacking_run):
    out = workdir / "cmax.csv"
    code = main(
        ["eval", "--config", stacking_run, "--set", "mapping.seeds=[4]", "--set", "roadmap.c_max=[1,10,20]",
         "--models", str(workdir / "cmax_models"), "--sweep", "cmax", "--pairs", "10", "--out", str(out)]
    )
    assert code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert [r["c_max"] for r in rows] == ["1", "10", "20", ""]
    assert all(r["n_pairs"] == "10" for r in rows)


def test_unreachable_harvesting_pair_exits_4(tmp_path):
    # noise-free members recover the true directed graph, so no spurious path can exist
    cfg = write_config(
        tmp_path / "h.json",
        task="harvesting",
        mapping={"seeds": [1, 2], "sigma_noise": 0.0, "p_merge": 0.0, "p_split": 0.0, "subset_fraction": 1.0},
    )
    assert main(["gen-dataset", "--config", cfg, "--out", str(tmp_path / "h.jsonl")]) == 0
    assert main(["build", "--config", cfg, "--dataset", str(tmp_path / "h.jsonl"), "--out", str(tmp_path / "m")]) == 0
    rng = np.random.default_rng(0)
    boxed = SystemState("harvesting", ((0, 0), (1, 0), (2, 0), (3, 0)))
    vine = SystemState("harvesting", ((0, 1), (1, 1), (2, 1), (3, 1)))
    save_observation(Observation(10**6, boxed, sample_nuisance("harvesting", rng)), tmp_path / "s.json")
    save_observation(Observation(10**6 + 1, vine, sample_nuisance("harvesting", rng)), tmp_path / "g.json")
    code = main(["plan", "--models", str(tmp_path / "m"), "--start", str(tmp_path / "s.json"), "--goal", str(tmp_path / "g.json")])
    assert code == 4


def test_exit_codes(tmp_path, capsys):
    bad = write_config(tmp_path / "bad.json", dataset={"frac_no_action": 1.5})
    assert main(["gen-dataset", "--config", bad, "--out", str(tmp_path / "x")]) == 2
    assert "dataset.frac_no_action" in capsys.readouterr().err
    good = write_config(tmp_path / "good.json", dataset={"n_tuples": 10})
    assert main(["gen-dataset", "--config", good, "--out", str(tmp_path / "no" / "x")]) == 3
    assert main(["gen-dataset", "--config", str(tmp_path / "missing.json"), "--out", "x"]) == 3
    assert main(["plan", "--models", str(tmp_path), "--start", "a", "--goal", "b"]) == 3
    assert main(["eval", "--config", good, "--models", str(tmp_path), "--sweep", "bogus", "--out", "x"]) == 2
    assert main(["gen-dataset", "--config", good, "--set", "dataset.nope=1", "--out", "x"]) == 2


def test_threads_env(tmp_path, monkeypatch):
    good = write_config(tmp_path / "good.json", dataset={"n_tuples": 10})
    monkeypatch.setenv("ENS_LSR_THREADS", "abc")
    assert main(["gen-dataset", "--config", good, "--out", str(tmp_path / "x")]) == 2
    monkeypatch.setenv("ENS_LSR_THREADS", "2")
    assert main(["gen-dataset", "--config", good, "--out", str(tmp_path / "x")]) == 0
