"""Ensemble latent-space-roadmap visual action planning on simulated pick-and-place tasks."""

from .ensemble import MEASURES, EditCosts, naive_select, select_plans
from .evaluation import (
    PlanCache,
    System,
    build_cmax_members,
    build_member,
    build_members,
    evaluate_system,
    rows_to_csv,
    sweep_cmax,
    sweep_members,
    sweep_similarity,
)
from .mapping import MappingConfig, decode, encode, make_module
from .planner import Member, PlanSet, VisualActionPlan, all_shortest_paths, nearest_node, plan_member
from .roadmap import Roadmap, build_roadmap, wcc_count
from .tasks import (
    HARVESTING,
    STACKING,
    Action,
    Observation,
    SystemState,
    apply_action,
    generate_dataset,
    sample_eval_pairs,
    verify_plan,
)

__version__ = "0.1.0"

__all__ = [
    "HARVESTING", "MEASURES", "STACKING", "Action", "EditCosts", "MappingConfig", "Member",
    "Observation", "PlanCache", "PlanSet", "Roadmap", "System", "SystemState", "VisualActionPlan",
    "all_shortest_paths", "apply_action", "build_cmax_members", "build_member", "build_members",
    "build_roadmap", "decode", "encode", "evaluate_system", "generate_dataset", "make_module",
    "naive_select", "nearest_node", "plan_member", "rows_to_csv", "sample_eval_pairs",
    "select_plans", "sweep_cmax", "sweep_members", "sweep_similarity", "verify_plan", "wcc_count",
]
