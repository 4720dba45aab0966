import csv
import io

import pytest

from enslsr.ensemble import MEASURES
from enslsr.evaluation import (
    CSV_FIELDS,
    PlanCache,
    System,
    build_cmax_members,
    build_members,
    evaluate_system,
    rows_to_csv,
    summarize,
    sweep_cmax,
    sweep_members,
    sweep_similarity,
    _record,
)
from enslsr.tasks import all_states, sample_eval_pairs, shortest_action_sequence, verify_plan

from conftest import NOISE_FREE, make_plan


@pytest.fixture(scope="module")
def members(stacking_data):
    return build_members(stacking_data, list(range(1, 6)), c_max=20)


@pytest.fixture(scope="module")
def pairs():
    return sample_eval_pairs("stacking", 80, seed=5)


@pytest.fixture(scope="module")
def cache(members, pairs):
    return PlanCache(members, pairs)


def test_metric_definitions_on_hand_built_records():
    start, goal = sample_eval_pairs("stacking", 1, seed=0)[0]
    right = shortest_action_sequence(start.state, goal.state)
    good = make_plan(0, 0, [u.as_array() for u in right], [{0}] * (len(right) + 1))
    bad = make_plan(0, 1, [], [{0}])
    judged = [verify_plan(start, goal, p) for p in (good, bad)]
    assert judged == [True, False]
    rec = _record(0, (start, goal), judged, [good, bad], False)
    assert rec.any_correct and not rec.all_correct and rec.path_found
    assert rec.n_zero_length == 1
    empty = _record(1, (start, goal), [], [], False)
    assert not (empty.any_correct or empty.all_correct or empty.path_found)
    s = summarize("x", [rec, empty])
    assert (s.pct_all, s.pct_any, s.pct_exists, s.n_pairs) == (0.0, 50.0, 50.0, 2)


def test_evaluate_system_rejects_bad_input(members, pairs):
    with pytest.raises(ValueError):
        evaluate_system(System("x", (0,), "single"))
    with pytest.raises(ValueError):
        evaluate_system(System("x", (0, 1), "single"), members, pairs)
    with pytest.raises(ValueError):
        evaluate_system(System("x", (0,), "vote"), members, pairs)
    with pytest.raises(ValueError):
        evaluate_system(System("x", (0,)), members, [])


def test_metric_ordering_and_existence_identity(cache, members):
    ids = tuple(range(len(members)))
    singles = [evaluate_system(System(f"s{k}", (k,), "single"), cache=cache)[0] for k in ids]
    for kind in ("ensemble", "naive"):
        records, summary = evaluate_system(System(kind, ids, kind), cache=cache)
        assert summary.pct_all <= summary.pct_any <= summary.pct_exists <= 100
        for r in records:
            assert r.path_found == any(s[r.pair_id].path_found for s in singles)
            assert (not r.all_correct) or r.path_found
            assert (not r.any_correct) or r.path_found


def test_correct_plans_replay(cache, members, pairs):
    for pair_id, (start, goal) in enumerate(pairs[:30]):
        for k in range(len(members)):
            for p in cache.plan_set(pair_id, k).plans:
                if cache.is_correct(pair_id, k, p):
                    assert verify_plan(start, goal, p.action_plan)


def test_sweep_members_schema(members, pairs, cache):
    rows = sweep_members(members, pairs, seed=3, m_values=range(3, 6), cache=cache)
    assert len(rows) == 3 * 5
    assert {r["system"] for r in rows} == {"ens", "naive", "individual_mean", "individual_min", "individual_max"}
    assert [r["m"] for r in rows if r["system"] == "ens"] == [3, 4, 5]
    for m in (3, 4, 5):
        by = {r["system"]: r for r in rows if r["m"] == m}
        assert by["individual_min"]["pct_all"] <= by["individual_mean"]["pct_all"] <= by["individual_max"]["pct_all"]
        assert all(r["seed"] == 3 and r["n_pairs"] == 80 for r in by.values())


def test_sweep_similarity_has_all_measures(members, pairs, cache):
    rows = sweep_similarity(members, pairs, m_values=[3, 4], cache=cache)
    assert len(rows) == 2 * len(MEASURES)
    assert [r["measure"] for r in rows[: len(MEASURES)]] == list(MEASURES)
    assert [r["m"] for r in rows] == [3] * len(MEASURES) + [4] * len(MEASURES)
    assert all(r["experiment"] == "similarity" and r["system"] == "ens" for r in rows)


def test_sweep_cmax_rows(small_harvesting_data):
    values = [1, 10, 20]
    members = build_cmax_members(small_harvesting_data, 1, values, directed=True)
    assert all(m.module is members[0].module for m in members)
    pairs = sample_eval_pairs("harvesting", 40, seed=1)
    rows = sweep_cmax(members, pairs)
    assert [r["c_max"] for r in rows] == [1, 10, 20, ""]
    assert rows[-1]["system"] == "ens" and rows[-1]["m"] == 3
    ens = rows[-1]["pct_exists"]
    assert all(ens >= r["pct_exists"] for r in rows[:-1])


def test_csv_format_and_determinism(stacking_data):
    pairs = sample_eval_pairs("stacking", 30, seed=9)

    def run():
        ms = build_members(stacking_data, [1, 2, 3], c_max=20)
        return rows_to_csv(sweep_members(ms, pairs, m_values=[3]))

    text = run()
    assert text == run()
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 5
    assert all(len(r["pct_all"].split(".")[1]) == 4 for r in rows)


def test_thread_count_does_not_change_members(stacking_data):
    a = build_members(stacking_data, [1, 2, 3], c_max=20, threads=1)
    b = build_members(stacking_data, [1, 2, 3], c_max=20, threads=3)
    for x, y in zip(a, b):
        assert x.roadmap.edges == y.roadmap.edges
        assert x.roadmap.epsilon_used == y.roadmap.epsilon_used


def test_noise_free_member_is_perfect(stacking_data):
    members = build_members(stacking_data, [1], c_max=20, config=NOISE_FREE)
    pairs = sample_eval_pairs("stacking", 50, seed=2)
    _, s = evaluate_system(System("s", (0,), "single"), members, pairs)
    assert s.pct_all == s.pct_exists == 100.0


def test_all_states_have_ground_truth_paths_in_stacking():
    states = all_states("stacking")
    assert all(shortest_action_sequence(states[0], s) is not None for s in states)
