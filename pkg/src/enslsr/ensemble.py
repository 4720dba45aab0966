"""Plan similarity measures and ensemble plan selection.

The default selection scores each plan by summing, over every other member,
the best combined action + node similarity it reaches against that member's
plans, and keeps the plans with the highest score. The naive baseline keeps
every plan.

Ablation measures that are undefined for plans of different length return
``None``; those comparisons are skipped when taking a member's best match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import sparse

from .planner import PlanSet, VisualActionPlan
from .tasks import Action

MEASURES = ("su+sn", "su", "sn", "su_eucl", "su_edit", "sn_indiv")
SCORE_TOLERANCE = 1e-9


def collapse(actions: Sequence[Action]) -> np.ndarray:
    if not actions:
        return np.zeros(0)
    return np.concatenate([u.as_array() for u in actions])


def preprocess_action_pair(
    actions_a: Sequence[Action], actions_b: Sequence[Action]
) -> tuple[np.ndarray, np.ndarray]:
    """Collapse both action plans and zero-pad the shorter at the tail."""
    a, b = collapse(actions_a), collapse(actions_b)
    n = max(a.size, b.size)
    return np.pad(a, (0, n - a.size)), np.pad(b, (0, n - b.size))


def action_sim_cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity mapped to [0, 1].

    Two zero vectors agree (1); a zero vector never corroborates a nonzero
    one (0).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    sa = float(np.abs(a).max()) if a.size else 0.0
    sb = float(np.abs(b).max()) if b.size else 0.0
    if sa == 0.0 and sb == 0.0:
        return 1.0
    if sa == 0.0 or sb == 0.0:
        return 0.0
    # rescale so squared norms cannot under- or overflow
    a, b = a / sa, b / sb
    cos = float(a @ b) / math.sqrt(float(a @ a) * float(b @ b))
    return 0.5 * (1.0 + min(1.0, max(-1.0, cos)))


def node_sim_jaccard(a: frozenset[int] | set[int], b: frozenset[int] | set[int]) -> float:
    union = len(a | b)
    if union == 0:
        return 1.0
    return len(a & b) / union


def action_sim_euclid(actions_a: Sequence[Action], actions_b: Sequence[Action]) -> float | None:
    if len(actions_a) != len(actions_b):
        return None
    return -float(np.linalg.norm(collapse(actions_a) - collapse(actions_b)))


def action_sim_edit(
    actions_a: Sequence[Action],
    actions_b: Sequence[Action],
    tau: float = 0.5,
    insertion_cost: float = 0.5,
    deletion_cost: float = 1.0,
    substitution_cost: float = 1.0,
) -> float:
    """Negated weighted edit distance turning ``actions_a`` into ``actions_b``.

    Two actions match when their 4-vectors are closer than ``tau``.
    """
    a = [u.as_array() for u in actions_a]
    b = [u.as_array() for u in actions_b]
    n, m = len(a), len(b)
    table = np.zeros((n + 1, m + 1))
    table[1:, 0] = deletion_cost * np.arange(1, n + 1)
    table[0, 1:] = insertion_cost * np.arange(1, m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            same = np.linalg.norm(a[i - 1] - b[j - 1]) < tau
            table[i, j] = min(
                table[i - 1, j - 1] + (0.0 if same else substitution_cost),
                table[i - 1, j] + deletion_cost,
                table[i, j - 1] + insertion_cost,
            )
    return -float(table[n, m])


def node_sim_indiv(
    compositions_a: Sequence[frozenset[int]], compositions_b: Sequence[frozenset[int]]
) -> float | None:
    """Sum of position-wise Jaccard similarities; ``None`` for unequal lengths."""
    if len(compositions_a) != len(compositions_b):
        return None
    return float(sum(node_sim_jaccard(a, b) for a, b in zip(compositions_a, compositions_b)))


# --------------------------------------------------------------------------
# plan-level measures


@dataclass(frozen=True)
class EditCosts:
    tau: float = 0.5
    insertion_cost: float = 0.5
    deletion_cost: float = 1.0
    substitution_cost: float = 1.0


def plan_action_similarity(p: VisualActionPlan, q: VisualActionPlan) -> float:
    a, b = preprocess_action_pair(p.action_plan, q.action_plan)
    return action_sim_cosine(a, b)


def plan_node_similarity(p: VisualActionPlan, q: VisualActionPlan) -> float:
    return node_sim_jaccard(p.composition_union, q.composition_union)


def plan_measure(measure: str, costs: EditCosts = EditCosts()) -> Callable:
    """Pairwise plan similarity function for one of :data:`MEASURES`."""
    if measure == "su+sn":
        return lambda p, q: plan_action_similarity(p, q) + plan_node_similarity(p, q)
    if measure == "su":
        return plan_action_similarity
    if measure == "sn":
        return plan_node_similarity
    if measure == "su_eucl":
        return lambda p, q: action_sim_euclid(p.action_plan, q.action_plan)
    if measure == "su_edit":
        return lambda p, q: action_sim_edit(
            p.action_plan,
            q.action_plan,
            costs.tau,
            costs.insertion_cost,
            costs.deletion_cost,
            costs.substitution_cost,
        )
    if measure == "sn_indiv":
        return lambda p, q: node_sim_indiv(p.node_compositions, q.node_compositions)
    raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")


# --------------------------------------------------------------------------
# selection


class BestMatch(NamedTuple):
    member: int  # position of the compared member in the input list
    path: int  # position of the best plan within that member's plans
    score: float


@dataclass(frozen=True)
class ScoredPlan:
    plan: VisualActionPlan
    member: int  # position of the plan's member in the input list
    score: float
    best_matches: tuple[BestMatch, ...] = field(default=(), repr=False)


class Selection(NamedTuple):
    selected: list[VisualActionPlan]
    scores: list[ScoredPlan]


def _pairwise_cosine(plans: Sequence[VisualActionPlan]) -> np.ndarray:
    width = max(p.collapsed_actions.size for p in plans)
    vectors = np.zeros((len(plans), width))
    for k, p in enumerate(plans):
        vectors[k, : p.collapsed_actions.size] = p.collapsed_actions
    scale = np.abs(vectors).max(axis=1, initial=0.0)
    vectors /= np.where(scale > 0, scale, 1.0)[:, None]
    norms2 = np.einsum("ij,ij->i", vectors, vectors)
    gram = vectors @ vectors.T
    denom = np.sqrt(np.outer(norms2, norms2))
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.clip(gram / denom, -1.0, 1.0)
    sim = 0.5 * (1.0 + cos)
    zero = norms2 == 0.0
    sim[zero, :] = 0.0
    sim[:, zero] = 0.0
    sim[np.ix_(zero, zero)] = 1.0
    return sim


def _pairwise_jaccard(plans: Sequence[VisualActionPlan]) -> np.ndarray:
    arrays = [np.fromiter(p.composition_union, dtype=np.int64) for p in plans]
    lengths = np.array([a.size for a in arrays])
    flat = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.int64)
    _, columns = np.unique(flat, return_inverse=True)
    rows = np.repeat(np.arange(len(plans)), lengths)
    incidence = sparse.csr_matrix(
        (np.ones(flat.size), (rows, columns.ravel())),
        shape=(len(plans), int(columns.max()) + 1 if flat.size else 1),
    )
    inter = (incidence @ incidence.T).toarray()
    union = lengths[:, None] + lengths[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = inter / union
    sim[union == 0] = 1.0
    return sim


def _similarity_matrix(plans, owner: np.ndarray, measure: str, costs: EditCosts) -> np.ndarray:
    """Plan-by-plan similarity across members; NaN where undefined."""
    if measure in ("su+sn", "su", "sn"):
        total = np.zeros((len(plans), len(plans)))
        if measure != "sn":
            total += _pairwise_cosine(plans)
        if measure != "su":
            total += _pairwise_jaccard(plans)
        return total
    fn = plan_measure(measure, costs)
    out = np.full((len(plans), len(plans)), np.nan)
    for r, p in enumerate(plans):
        for c, q in enumerate(plans):
            if owner[r] != owner[c]:
                value = fn(p, q)
                if value is not None:
                    out[r, c] = value
    return out


def select_plans(
    plan_sets: Sequence[PlanSet],
    measure: str = "su+sn",
    costs: EditCosts = EditCosts(),
) -> Selection:
    """Keep the plans most corroborated by the other ensemble members.

    A plan's score is the sum, over every other member, of its best
    similarity against that member's plans; members with no plans, or with
    only undefined comparisons, add nothing. All plans within
    ``SCORE_TOLERANCE`` of the top score are selected.
    """
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    plans = [p for s in plan_sets for p in s.plans]
    if not plans:
        return Selection([], [])
    owner = np.repeat(np.arange(len(plan_sets)), [len(s) for s in plan_sets])
    offsets = np.concatenate([[0], np.cumsum([len(s) for s in plan_sets])])
    sim = _similarity_matrix(plans, owner, measure, costs)

    scores = np.zeros(len(plans))
    matches: list[list[BestMatch]] = [[] for _ in plans]
    for k, s in enumerate(plan_sets):
        if not len(s):
            continue
        block = sim[:, offsets[k] : offsets[k + 1]]
        defined = ~np.isnan(block)
        has_any = defined.any(axis=1)
        best = np.where(defined, block, -np.inf).argmax(axis=1)
        for r in np.flatnonzero((owner != k) & has_any):
            value = block[r, best[r]]
            scores[r] += value
            matches[r].append(BestMatch(k, int(best[r]), float(value)))

    top = scores.max()
    scored = [
        ScoredPlan(p, int(owner[r]), float(scores[r]), tuple(matches[r]))
        for r, p in enumerate(plans)
    ]
    selected = [p for p, c in zip(plans, scores) if c >= top - SCORE_TOLERANCE]
    return Selection(selected, scored)


def naive_select(plan_sets: Sequence[PlanSet]) -> list[VisualActionPlan]:
    return [p for s in plan_sets for p in s.plans]
