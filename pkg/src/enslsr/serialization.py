"""JSON / JSON-lines persistence for datasets, observations, modules and roadmaps.

Floats are written with Python's shortest round-trip repr, so save/load
cycles are exact and reruns are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from .mapping import MappingConfig, MappingModule, make_module
from .roadmap import Roadmap, RoadmapEdge, RoadmapNode
from .tasks import Action, ActionInfo, Nuisance, Observation, SystemState, TransitionTuple

FORMAT_VERSION = 1


class FormatError(ValueError):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def _check_version(record: dict, what: str) -> None:
    if record.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{what}: unsupported format_version {record.get('format_version')!r}")


def nuisance_to_dict(n: Nuisance) -> dict:
    return {k: v for k, v in asdict(n).items() if v is not None}


def nuisance_from_dict(d: dict) -> Nuisance:
    def tup(key, cast=float):
        return None if d.get(key) is None else tuple(cast(v) for v in d[key])

    return Nuisance(
        jitter=tuple((float(x), float(y)) for x, y in d["jitter"]),
        lighting=float(d["lighting"]),
        scale=tup("scale"),
        orientation=tup("orientation"),
        variant=tup("variant", int),
    )


def observation_to_dict(obs: Observation) -> dict:
    return {
        "index": obs.index,
        "task": obs.state.task,
        "state": [list(c) for c in obs.state.cells],
        "nuisance": nuisance_to_dict(obs.nuisance),
    }


def observation_from_dict(d: dict) -> Observation:
    try:
        state = SystemState(d["task"], tuple(tuple(c) for c in d["state"]))
        return Observation(int(d["index"]), state, nuisance_from_dict(d["nuisance"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad observation record: {exc}") from exc


def save_observation(obs: Observation, path) -> None:
    Path(path).write_text(_dumps(observation_to_dict(obs)) + "\n")


def load_observation(path) -> Observation:
    return observation_from_dict(json.loads(Path(path).read_text()))


# --------------------------------------------------------------------------
# datasets


def dataset_lines(tuples: Sequence[TransitionTuple], task: str, seed) -> list[str]:
    header = {"task": task, "seed": seed, "n_tuples": len(tuples), "format_version": FORMAT_VERSION}
    lines = [_dumps(header)]
    for t in tuples:
        lines.append(
            _dumps(
                {
                    "i_index": t.first.index,
                    "j_index": t.second.index,
                    "i_state": [list(c) for c in t.first.state.cells],
                    "j_state": [list(c) for c in t.second.state.cells],
                    "i_nuisance": nuisance_to_dict(t.first.nuisance),
                    "j_nuisance": nuisance_to_dict(t.second.nuisance),
                    "a": t.rho.a,
                    "u": list(t.rho.u.as_array()) if t.rho.a else None,
                }
            )
        )
    return lines


def save_dataset(tuples: Sequence[TransitionTuple], path, task: str, seed) -> None:
    Path(path).write_text("\n".join(dataset_lines(tuples, task, seed)) + "\n")


def load_dataset(path) -> tuple[dict, list[TransitionTuple]]:
    """Returns the file header and the tuples. Observations sharing an index
    are the same object."""
    with open(path) as fh:
        lines = [line for line in fh if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty dataset file")
    header = json.loads(lines[0])
    _check_version(header, str(path))
    task = header["task"]
    cache: dict[int, Observation] = {}

    def obs(index, state, nuisance) -> Observation:
        if index not in cache:
            cache[index] = Observation(
                index, SystemState(task, tuple(tuple(c) for c in state)), nuisance_from_dict(nuisance)
            )
        return cache[index]

    tuples = []
    for line in lines[1:]:
        r = json.loads(line)
        rho = ActionInfo(1, Action.from_array(r["u"])) if r["a"] else ActionInfo(0)
        tuples.append(
            TransitionTuple(
                obs(r["i_index"], r["i_state"], r["i_nuisance"]),
                obs(r["j_index"], r["j_state"], r["j_nuisance"]),
                rho,
            )
        )
    if len(tuples) != header["n_tuples"]:
        raise FormatError(f"{path}: header says {header['n_tuples']} tuples, found {len(tuples)}")
    return header, tuples


# --------------------------------------------------------------------------
# mapping modules and roadmaps


def module_to_dict(module: MappingModule) -> dict:
    c = module.config
    return {
        "model_seed": module.model_seed,
        "d": c.d,
        "sigma_noise": c.sigma_noise,
        "p_merge": c.p_merge,
        "p_split": c.p_split,
        "subset_fraction": c.subset_fraction,
        "train_subset": list(module.train_subset),
        "format_version": FORMAT_VERSION,
    }


def module_from_dict(d: dict, dataset: Sequence[TransitionTuple]) -> MappingModule:
    """Rebuild a module; centroid tables are re-derived from the seed."""
    _check_version(d, "module")
    config = MappingConfig(
        d=d["d"],
        sigma_noise=d["sigma_noise"],
        p_merge=d["p_merge"],
        p_split=d["p_split"],
        subset_fraction=d.get("subset_fraction", 0.85),
    )
    return make_module(dataset, d["model_seed"], config, train_subset=d["train_subset"])


def roadmap_to_dict(roadmap: Roadmap) -> dict:
    return {
        "directed": roadmap.directed,
        "c_max": roadmap.c_max,
        "epsilon_used": roadmap.epsilon_used,
        "nodes": [
            {
                "node_id": n.node_id,
                "centroid": [float(v) for v in n.centroid],
                "composition": sorted(n.composition),
            }
            for n in roadmap.nodes
        ],
        "edges": [
            {
                "from": e.source,
                "to": e.target,
                "mean_action": list(e.mean_action.as_array()),
                "support_count": e.support_count,
            }
            for e in roadmap.edges
        ],
        "format_version": FORMAT_VERSION,
    }


def roadmap_from_dict(d: dict) -> Roadmap:
    _check_version(d, "roadmap")
    nodes = tuple(
        RoadmapNode(n["node_id"], np.array(n["centroid"], dtype=float), frozenset(n["composition"]))
        for n in d["nodes"]
    )
    if [n.node_id for n in nodes] != list(range(len(nodes))):
        raise FormatError("roadmap node ids must be 0..n-1 in order")
    edges = tuple(
        RoadmapEdge(e["from"], e["to"], Action.from_array(e["mean_action"]), e["support_count"])
        for e in d["edges"]
    )
    return Roadmap(nodes, edges, bool(d["directed"]), float(d["epsilon_used"]), int(d["c_max"]))


def save_json(obj: dict, path) -> None:
    Path(path).write_text(_dumps(obj) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())
