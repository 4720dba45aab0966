"""Command-line interface: ``ens-lsr {gen-dataset,build,sample-pair,plan,eval}``.

Exit codes: 0 ok, 2 bad config or arguments, 3 I/O or file-format failure,
4 no plan found.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import ConfigError, RunConfig, load_config, override
from .ensemble import naive_select, plan_action_similarity, plan_node_similarity, select_plans
from .evaluation import (
    PlanCache,
    build_member,
    rows_to_csv,
    sweep_cmax,
    sweep_members,
    sweep_similarity,
)
from .mapping import make_module
from .planner import Member, plan_member
from .roadmap import wcc_count
from .serialization import (
    FORMAT_VERSION,
    FormatError,
    load_dataset,
    load_json,
    load_observation,
    module_from_dict,
    module_to_dict,
    observation_to_dict,
    roadmap_from_dict,
    roadmap_to_dict,
    save_dataset,
    save_json,
    save_observation,
)
from .tasks import generate_dataset, sample_eval_pair, sample_eval_pairs

EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NO_PLAN = 4

MANIFEST = "manifest.json"
DATASET_COPY = "dataset.jsonl"


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("ENS_LSR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CommandError(EXIT_CONFIG, f"ENS_LSR_THREADS: not an integer: {env!r}")
    return os.cpu_count() or 1


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for assignment in args.set or ():
        cfg = override(cfg, assignment)
    return cfg


def _module_name(seed: int) -> str:
    return f"module_seed{seed}.json"


def _roadmap_name(seed: int, c_max: int) -> str:
    return f"roadmap_seed{seed}_cmax{c_max}.json"


# --------------------------------------------------------------------------
# commands


def cmd_gen_dataset(args) -> int:
    cfg = _config(args)
    d = cfg.dataset
    tuples = generate_dataset(cfg.task, cfg.n_tuples, d.frac_no_action, d.seed, d.walk_length)
    save_dataset(tuples, args.out, cfg.task, d.seed)
    print(f"wrote {len(tuples)} tuples to {args.out}")
    return 0


def cmd_build(args) -> int:
    cfg = _config(args)
    header, dataset = load_dataset(args.dataset)
    if header["task"] != cfg.task:
        raise CommandError(EXIT_CONFIG, f"task: config says {cfg.task!r}, dataset is {header['task']!r}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if Path(args.dataset).resolve() != (out / DATASET_COPY).resolve():
        shutil.copyfile(args.dataset, out / DATASET_COPY)

    def build_seed(seed: int) -> None:
        module = make_module(dataset, seed, cfg.mapping_config())
        save_json(module_to_dict(module), out / _module_name(seed))
        for c_max in cfg.roadmap.c_max:
            member = build_member(
                dataset, 0, seed, c_max,
                min_cluster_size=cfg.roadmap.min_cluster_size,
                directed=cfg.directed,
                n_eps=cfg.roadmap.n_eps,
                module=module,
            )
            save_json(roadmap_to_dict(member.roadmap), out / _roadmap_name(seed, c_max))

    # each seed writes its own files, so thread count never changes the output
    with ThreadPoolExecutor(max_workers=_threads(args)) as pool:
        list(pool.map(build_seed, cfg.mapping.seeds))
    members = [{"model_seed": s, "c_max": c} for s in cfg.mapping.seeds for c in cfg.roadmap.c_max]
    manifest = {
        "task": cfg.task,
        "dataset": DATASET_COPY,
        "members": [
            {**m, "module": _module_name(m["model_seed"]), "roadmap": _roadmap_name(m["model_seed"], m["c_max"])}
            for m in members
        ],
        "format_version": FORMAT_VERSION,
    }
    save_json(manifest, out / MANIFEST)
    # re-read what was written and re-check the component bound
    for entry in manifest["members"]:
        roadmap = roadmap_from_dict(load_json(out / entry["roadmap"]))
        if wcc_count(roadmap) > roadmap.c_max:
            raise CommandError(EXIT_IO, f"{entry['roadmap']}: component bound violated")
    print(f"wrote {len(cfg.mapping.seeds)} modules and {len(members)} roadmaps to {out}")
    return 0


def load_members(models_dir, keep=None) -> tuple[dict, list[Member]]:
    """Members listed in a build directory's manifest, in manifest order.

    ``keep(entry)`` filters manifest entries.
    """
    models = Path(models_dir)
    manifest = load_json(models / MANIFEST)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{models / MANIFEST}: unsupported format_version")
    _, dataset = load_dataset(models / manifest["dataset"])
    modules = {}
    members = []
    for entry in manifest["members"]:
        if keep is not None and not keep(entry):
            continue
        name = entry["module"]
        if name not in modules:
            modules[name] = module_from_dict(load_json(models / name), dataset)
        roadmap = roadmap_from_dict(load_json(models / entry["roadmap"]))
        members.append(Member(len(members), modules[name], roadmap))
    return manifest, members


def _plan_json(plan, score=None) -> dict:
    out = {
        "member_id": plan.member_id,
        "path_id": plan.path_id,
        "node_sequence": list(plan.node_sequence),
        "actions": [list(u.as_array()) for u in plan.action_plan],
        "states": [[list(c) for c in o.state.cells] for o in plan.visual_plan],
        "observation_indices": [o.index for o in plan.visual_plan],
    }
    if score is not None:
        out["score"] = score
    return out


def _trace_row(scored, sets) -> dict:
    best = []
    for b in scored.best_matches:
        other = sets[b.member].plans[b.path]
        best.append(
            {
                "k": b.member,
                "l": b.path,
                "s_u": plan_action_similarity(scored.plan, other),
                "s_n": plan_node_similarity(scored.plan, other),
                "s": b.score,
            }
        )
    return {"i": scored.member, "j": scored.plan.path_id, "c": scored.score, "best": best}


def cmd_sample_pair(args) -> int:
    cfg = _config(args)
    start, goal = sample_eval_pair(cfg.task, (cfg.eval.harness_seed, args.pair_id), args.pair_id)
    save_observation(start, args.start)
    save_observation(goal, args.goal)
    print(json.dumps({"start": observation_to_dict(start)["state"], "goal": observation_to_dict(goal)["state"]}))
    return 0


def cmd_plan(args) -> int:
    _, members = load_members(args.models)
    if not members:
        raise CommandError(EXIT_CONFIG, f"{args.models}: no members in manifest")
    start = load_observation(args.start)
    goal = load_observation(args.goal)
    sets = [plan_member(m, start, goal, args.max_paths) for m in members]
    result: dict = {"n_members": len(members), "plans_per_member": [len(s) for s in sets]}
    if args.naive:
        selected = naive_select(sets)
        result["selected"] = [_plan_json(p) for p in selected]
    else:
        selection = select_plans(sets, args.measure)
        by_plan = {id(s.plan): s for s in selection.scores}
        selected = selection.selected
        result["selected"] = [_plan_json(p, by_plan[id(p)].score) for p in selected]
        if args.trace:
            result["trace"] = [_trace_row(s, sets) for s in selection.scores]
    print(json.dumps(result, indent=2))
    return 0 if selected else EXIT_NO_PLAN


def cmd_eval(args) -> int:
    cfg = _config(args)
    if args.pairs is not None:
        cfg = override(cfg, f"eval.n_pairs={args.pairs}")
    seeds = cfg.mapping.seeds
    c_max = cfg.roadmap.c_max[0]
    if args.sweep == "cmax":
        keep = lambda e: e["model_seed"] == seeds[0] and e["c_max"] in cfg.roadmap.c_max  # noqa: E731
    else:
        keep = lambda e: e["model_seed"] in seeds and e["c_max"] == c_max  # noqa: E731
    manifest, members = load_members(args.models, keep)
    if manifest["task"] != cfg.task:
        raise CommandError(EXIT_CONFIG, f"task: config says {cfg.task!r}, models are {manifest['task']!r}")
    if not members:
        raise CommandError(EXIT_CONFIG, f"{args.models}: no members match the config's seeds/c_max")
    pairs = sample_eval_pairs(cfg.task, cfg.eval.n_pairs, cfg.eval.harness_seed)
    cache = PlanCache(members, pairs, cfg.planner.max_paths)
    seed = cfg.eval.harness_seed
    if args.sweep == "members":
        rows = sweep_members(members, pairs, seed, measure=cfg.ensemble.measure, cache=cache)
    elif args.sweep == "cmax":
        rows = sweep_cmax(members, pairs, seed, measure=cfg.ensemble.measure, cache=cache)
    else:
        rows = sweep_similarity(members, pairs, seed, costs=cfg.edit_costs(), cache=cache)
    Path(args.out).write_text(rows_to_csv(rows))
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ens-lsr", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores, or $ENS_LSR_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p, required=True):
        p.add_argument("--config", required=required, help="JSON run config")
        p.add_argument("--set", action="append", metavar="SECTION.FIELD=VALUE", help="override a config field")

    p = sub.add_parser("gen-dataset", help="generate a transition-tuple dataset")
    with_config(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("build", help="build mapping modules and roadmaps")
    with_config(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("sample-pair", help="write a holdout start/goal observation pair")
    with_config(p, required=False)
    p.add_argument("--pair-id", type=int, default=0)
    p.add_argument("--start", required=True)
    p.add_argument("--goal", required=True)
    p.set_defaults(func=cmd_sample_pair)

    p = sub.add_parser("plan", help="plan from start to goal with the built ensemble")
    p.add_argument("--models", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--naive", action="store_true", help="output every member plan")
    p.add_argument("--trace", action="store_true", help="include the score table")
    p.add_argument("--measure", default="su+sn")
    p.add_argument("--max-paths", type=int, default=50)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("eval", help="run an evaluation sweep and write CSV")
    with_config(p)
    p.add_argument("--models", required=True)
    p.add_argument("--sweep", required=True, choices=("members", "cmax", "similarity"))
    p.add_argument("--out", required=True)
    p.add_argument("--pairs", type=int, default=None, help="override eval.n_pairs")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _threads(args)
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, FormatError, json.JSONDecodeError, KeyError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
