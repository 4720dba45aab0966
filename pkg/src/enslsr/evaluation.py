"""Evaluation harness: % all / % any / % exists metrics and experiment sweeps.

Sweeps take already-built members and a fixed list of start/goal pairs and
return CSV rows (dicts keyed by :data:`CSV_FIELDS`).
"""

from __future__ import annotations

import csv
import io
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .ensemble import MEASURES, EditCosts, naive_select, select_plans
from .mapping import MappingConfig, MappingModule, make_module
from .planner import DEFAULT_MAX_PATHS, Member, PlanSet, VisualActionPlan, plan_member
from .roadmap import build_roadmap
from .tasks import Observation, TransitionTuple, verify_plan

CSV_FIELDS = (
    "experiment",
    "system",
    "m",
    "c_max",
    "measure",
    "seed",
    "pct_all",
    "pct_any",
    "pct_exists",
    "n_pairs",
    "n_truncated",
)

Pair = tuple[Observation, Observation]


@dataclass(frozen=True)
class System:
    """What to evaluate: one member, an ENS-LSR, or the naive ensemble.

    ``members`` are positions in the member list handed to the evaluator.
    """

    label: str
    members: tuple[int, ...]
    kind: str = "ensemble"  # "single" | "ensemble" | "naive"
    measure: str = "su+sn"


@dataclass(frozen=True)
class EvalRecord:
    pair_id: int
    start_index: int
    goal_index: int
    start_state: tuple
    goal_state: tuple
    n_plans: int
    all_correct: bool
    any_correct: bool
    path_found: bool
    plan_lengths: tuple[int, ...]
    truncated: bool

    @property
    def n_zero_length(self) -> int:
        return sum(1 for n in self.plan_lengths if n == 0)


@dataclass(frozen=True)
class MetricSummary:
    label: str
    pct_all: float
    pct_any: float
    pct_exists: float
    n_pairs: int
    n_truncated: int


class PlanCache:
    """Member plans and plan correctness, computed once per (pair, member)."""

    def __init__(
        self,
        members: Sequence[Member],
        pairs: Sequence[Pair],
        max_paths: int = DEFAULT_MAX_PATHS,
    ):
        self.members = list(members)
        self.pairs = list(pairs)
        self.max_paths = max_paths
        self._plans: dict[tuple[int, int], PlanSet] = {}
        self._correct: dict[tuple[int, int, int], bool] = {}

    def plan_set(self, pair_id: int, member: int) -> PlanSet:
        key = (pair_id, member)
        if key not in self._plans:
            start, goal = self.pairs[pair_id]
            self._plans[key] = plan_member(self.members[member], start, goal, self.max_paths)
        return self._plans[key]

    def is_correct(self, pair_id: int, member: int, plan: VisualActionPlan) -> bool:
        key = (pair_id, member, plan.path_id)
        if key not in self._correct:
            start, goal = self.pairs[pair_id]
            self._correct[key] = verify_plan(start, goal, plan)
        return self._correct[key]


def _record(pair_id: int, pair: Pair, judged: list[bool], plans, truncated: bool) -> EvalRecord:
    start, goal = pair
    found = bool(plans)
    return EvalRecord(
        pair_id=pair_id,
        start_index=start.index,
        goal_index=goal.index,
        start_state=start.state.cells,
        goal_state=goal.state.cells,
        n_plans=len(plans),
        all_correct=found and all(judged),
        any_correct=any(judged),
        path_found=found,
        plan_lengths=tuple(p.n_actions for p in plans),
        truncated=truncated,
    )


def summarize(label: str, records: Sequence[EvalRecord]) -> MetricSummary:
    n = len(records)
    pct = lambda k: 100.0 * k / n if n else 0.0  # noqa: E731
    return MetricSummary(
        label=label,
        pct_all=pct(sum(r.all_correct for r in records)),
        pct_any=pct(sum(r.any_correct for r in records)),
        pct_exists=pct(sum(r.path_found for r in records)),
        n_pairs=n,
        n_truncated=sum(r.truncated for r in records),
    )


def evaluate_system(
    system: System,
    members: Sequence[Member] | None = None,
    pairs: Sequence[Pair] | None = None,
    cache: PlanCache | None = None,
    costs: EditCosts = EditCosts(),
) -> tuple[list[EvalRecord], MetricSummary]:
    """Judge every plan ``system`` outputs on every pair with the task oracle."""
    if cache is None:
        if members is None or pairs is None:
            raise ValueError("need members and pairs, or a cache")
        cache = PlanCache(members, pairs)
    if not cache.pairs:
        raise ValueError("no evaluation pairs")
    if system.kind not in ("single", "ensemble", "naive"):
        raise ValueError(f"unknown system kind {system.kind!r}")
    if system.kind == "single" and len(system.members) != 1:
        raise ValueError("a single system has exactly one member")

    records = []
    for pair_id, pair in enumerate(cache.pairs):
        sets = [cache.plan_set(pair_id, k) for k in system.members]
        truncated = any(s.truncated for s in sets)
        if system.kind == "ensemble":
            plans = select_plans(sets, system.measure, costs).selected
        else:
            plans = naive_select(sets)
        member_of = {s.member_id: k for k, s in zip(system.members, sets)}
        judged = [cache.is_correct(pair_id, member_of[p.member_id], p) for p in plans]
        records.append(_record(pair_id, pair, judged, plans, truncated))
    return records, summarize(system.label, records)


# --------------------------------------------------------------------------
# member construction


def build_member(
    dataset: Sequence[TransitionTuple],
    member_id: int,
    model_seed: int,
    c_max: int,
    config: MappingConfig = MappingConfig(),
    min_cluster_size: int = 1,
    directed: bool = False,
    n_eps: int = 50,
    module: MappingModule | None = None,
) -> Member:
    if module is None:
        module = make_module(dataset, model_seed, config)
    roadmap = build_roadmap(dataset, module, c_max, min_cluster_size, directed, n_eps)
    return Member(member_id, module, roadmap)


def build_members(
    dataset: Sequence[TransitionTuple],
    model_seeds: Sequence[int],
    c_max: int,
    config: MappingConfig = MappingConfig(),
    min_cluster_size: int = 1,
    directed: bool = False,
    n_eps: int = 50,
    threads: int = 1,
) -> list[Member]:
    """One member per model seed (distinct mapping modules, same ``c_max``)."""

    def build(k: int) -> Member:
        return build_member(
            dataset, k, model_seeds[k], c_max, config, min_cluster_size, directed, n_eps
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(build, range(len(model_seeds))))


def build_cmax_members(
    dataset: Sequence[TransitionTuple],
    model_seed: int,
    c_max_values: Sequence[int],
    config: MappingConfig = MappingConfig(),
    min_cluster_size: int = 1,
    directed: bool = False,
    n_eps: int = 50,
    threads: int = 1,
) -> list[Member]:
    """One shared mapping module, one roadmap per ``c_max`` value."""
    module = make_module(dataset, model_seed, config)

    def build(k: int) -> Member:
        return build_member(
            dataset, k, model_seed, c_max_values[k], config, min_cluster_size, directed, n_eps,
            module=module,
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(build, range(len(c_max_values))))


# --------------------------------------------------------------------------
# sweeps


def _row(experiment, summary: MetricSummary, m, c_max, measure, seed) -> dict:
    return {
        "experiment": experiment,
        "system": summary.label,
        "m": m,
        "c_max": c_max,
        "measure": measure,
        "seed": seed,
        "pct_all": summary.pct_all,
        "pct_any": summary.pct_any,
        "pct_exists": summary.pct_exists,
        "n_pairs": summary.n_pairs,
        "n_truncated": summary.n_truncated,
    }


def _stat_row(experiment, label, summaries, fn, m, c_max, seed) -> dict:
    stat = MetricSummary(
        label=label,
        pct_all=fn([s.pct_all for s in summaries]),
        pct_any=fn([s.pct_any for s in summaries]),
        pct_exists=fn([s.pct_exists for s in summaries]),
        n_pairs=summaries[0].n_pairs,
        n_truncated=max(s.n_truncated for s in summaries),
    )
    return _row(experiment, stat, m, c_max, "", seed)


def sweep_members(
    members: Sequence[Member],
    pairs: Sequence[Pair],
    seed: int = 0,
    m_values: Iterable[int] = range(3, 11),
    measure: str = "su+sn",
    cache: PlanCache | None = None,
) -> list[dict]:
    """ENS-LSR, naive ensemble and individual statistics for the first m members."""
    cache = cache or PlanCache(members, pairs)
    c_max = members[0].roadmap.c_max
    singles = [
        evaluate_system(System(f"single_{k}", (k,), "single"), cache=cache)[1]
        for k in range(len(members))
    ]
    rows = []
    for m in m_values:
        if m > len(members):
            break
        ids = tuple(range(m))
        _, ens = evaluate_system(System("ens", ids, "ensemble", measure), cache=cache)
        _, naive = evaluate_system(System("naive", ids, "naive"), cache=cache)
        rows.append(_row("members", ens, m, c_max, measure, seed))
        rows.append(_row("members", naive, m, c_max, "", seed))
        for label, fn in (("individual_mean", statistics.fmean), ("individual_min", min), ("individual_max", max)):
            rows.append(_stat_row("members", label, singles[:m], fn, m, c_max, seed))
    return rows


def sweep_cmax(
    members: Sequence[Member],
    pairs: Sequence[Pair],
    seed: int = 0,
    measure: str = "su+sn",
    cache: PlanCache | None = None,
) -> list[dict]:
    """One row per member (each with its own ``c_max``) plus the full ensemble."""
    cache = cache or PlanCache(members, pairs)
    rows = []
    for k, member in enumerate(members):
        _, s = evaluate_system(System("single", (k,), "single"), cache=cache)
        rows.append(_row("cmax", s, 1, member.roadmap.c_max, "", seed))
    _, ens = evaluate_system(System("ens", tuple(range(len(members))), "ensemble", measure), cache=cache)
    rows.append(_row("cmax", ens, len(members), "", measure, seed))
    return rows


def sweep_similarity(
    members: Sequence[Member],
    pairs: Sequence[Pair],
    seed: int = 0,
    measures: Sequence[str] = MEASURES,
    m_values: Iterable[int] = range(3, 11),
    costs: EditCosts = EditCosts(),
    cache: PlanCache | None = None,
) -> list[dict]:
    """ENS-LSR with each similarity measure plugged into the selection."""
    cache = cache or PlanCache(members, pairs)
    c_max = members[0].roadmap.c_max
    rows = []
    for m in m_values:
        if m > len(members):
            break
        for measure in measures:
            system = System("ens", tuple(range(m)), "ensemble", measure)
            _, s = evaluate_system(system, cache=cache, costs=costs)
            rows.append(_row("similarity", s, m, c_max, measure, seed))
    return rows


def _format(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for row in rows:
        writer.writerow([_format(row[k]) for k in CSV_FIELDS])
    return buffer.getvalue()


def write_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))
