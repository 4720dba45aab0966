"""Run configuration shared by every CLI command.

A config file is a JSON object with the sections below. Omitted fields take
their defaults; unknown sections or fields are rejected.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .ensemble import MEASURES, EditCosts
from .mapping import MappingConfig
from .tasks import HARVESTING, TASKS

DEFAULT_TUPLES = {"stacking": 2500, "harvesting": 5000}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetSection:
    n_tuples: int | None = None  # 2500 for stacking, 5000 for harvesting
    frac_no_action: float = 0.2
    seed: int = 0
    walk_length: int = 10


@dataclass(frozen=True)
class MappingSection:
    d: int = 16
    sigma_noise: float = 0.25
    p_merge: float = 1e-4
    p_split: float = 0.02
    subset_fraction: float = 0.85
    seeds: tuple[int, ...] = tuple(range(1, 11))


@dataclass(frozen=True)
class RoadmapSection:
    c_max: tuple[int, ...] = (20,)
    min_cluster_size: int = 1
    n_eps: int = 50
    directed: bool | None = None  # None: directed iff the task is harvesting


@dataclass(frozen=True)
class PlannerSection:
    max_paths: int = 50


@dataclass(frozen=True)
class EnsembleSection:
    measure: str = "su+sn"
    substitution_cost: float = 1.0
    tau: float = 0.5
    insertion_cost: float = 0.5
    deletion_cost: float = 1.0


@dataclass(frozen=True)
class EvalSection:
    n_pairs: int = 1000
    harness_seed: int = 0


@dataclass(frozen=True)
class IOSection:
    output_dir: str = "out"


@dataclass(frozen=True)
class RunConfig:
    task: str = "stacking"
    dataset: DatasetSection = field(default_factory=DatasetSection)
    mapping: MappingSection = field(default_factory=MappingSection)
    roadmap: RoadmapSection = field(default_factory=RoadmapSection)
    planner: PlannerSection = field(default_factory=PlannerSection)
    ensemble: EnsembleSection = field(default_factory=EnsembleSection)
    eval: EvalSection = field(default_factory=EvalSection)
    io: IOSection = field(default_factory=IOSection)

    @property
    def n_tuples(self) -> int:
        return self.dataset.n_tuples or DEFAULT_TUPLES[self.task]

    @property
    def directed(self) -> bool:
        if self.roadmap.directed is None:
            return self.task == HARVESTING
        return self.roadmap.directed

    def mapping_config(self) -> MappingConfig:
        m = self.mapping
        return MappingConfig(m.d, m.sigma_noise, m.p_merge, m.p_split, m.subset_fraction)

    def edit_costs(self) -> EditCosts:
        e = self.ensemble
        return EditCosts(e.tau, e.insertion_cost, e.deletion_cost, e.substitution_cost)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {f.name: f.type for f in fields(RunConfig) if f.name != "task"}
_SECTION_TYPES = {
    "dataset": DatasetSection,
    "mapping": MappingSection,
    "roadmap": RoadmapSection,
    "planner": PlannerSection,
    "ensemble": EnsembleSection,
    "eval": EvalSection,
    "io": IOSection,
}


def _section(name: str, raw) -> object:
    cls = _SECTION_TYPES[name]
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{name}.{key}: unknown field")
    values = {}
    for key, value in raw.items():
        if key in ("seeds", "c_max"):
            value = tuple(value) if isinstance(value, list) else (value,)
        values[key] = value
    return cls(**values)


def _check(cfg: RunConfig) -> None:
    def need(ok: bool, where: str, what: str) -> None:
        if not ok:
            raise ConfigError(f"{where}: {what}")

    def is_int(v) -> bool:
        return isinstance(v, int) and not isinstance(v, bool)

    def is_num(v) -> bool:
        return isinstance(v, (int, float)) and not isinstance(v, bool)

    need(cfg.task in TASKS, "task", f"must be one of {TASKS}")
    d = cfg.dataset
    need(d.n_tuples is None or (is_int(d.n_tuples) and d.n_tuples > 0), "dataset.n_tuples", "must be a positive integer")
    need(is_num(d.frac_no_action) and 0 <= d.frac_no_action < 1, "dataset.frac_no_action", "must be in [0, 1)")
    need(is_int(d.seed) and d.seed >= 0, "dataset.seed", "must be a non-negative integer")
    need(is_int(d.walk_length) and d.walk_length > 0, "dataset.walk_length", "must be a positive integer")
    m = cfg.mapping
    need(is_int(m.d) and m.d > 0, "mapping.d", "must be a positive integer")
    need(is_num(m.sigma_noise) and m.sigma_noise >= 0, "mapping.sigma_noise", "must be >= 0")
    need(is_num(m.p_merge) and 0 <= m.p_merge <= 1, "mapping.p_merge", "must be in [0, 1]")
    need(is_num(m.p_split) and 0 <= m.p_split <= 1, "mapping.p_split", "must be in [0, 1]")
    need(is_num(m.subset_fraction) and 0 < m.subset_fraction <= 1, "mapping.subset_fraction", "must be in (0, 1]")
    need(bool(m.seeds) and all(is_int(s) and s >= 0 for s in m.seeds), "mapping.seeds", "must be non-negative integers")
    r = cfg.roadmap
    need(bool(r.c_max) and all(is_int(c) and c >= 1 for c in r.c_max), "roadmap.c_max", "must be integers >= 1")
    need(is_int(r.min_cluster_size) and r.min_cluster_size >= 1, "roadmap.min_cluster_size", "must be >= 1")
    need(is_int(r.n_eps) and r.n_eps >= 2, "roadmap.n_eps", "must be >= 2")
    need(r.directed is None or isinstance(r.directed, bool), "roadmap.directed", "must be true, false or null")
    need(is_int(cfg.planner.max_paths) and cfg.planner.max_paths >= 1, "planner.max_paths", "must be >= 1")
    e = cfg.ensemble
    need(e.measure in MEASURES, "ensemble.measure", f"must be one of {MEASURES}")
    for name in ("substitution_cost", "tau", "insertion_cost", "deletion_cost"):
        need(is_num(getattr(e, name)) and getattr(e, name) >= 0, f"ensemble.{name}", "must be >= 0")
    need(is_int(cfg.eval.n_pairs) and cfg.eval.n_pairs > 0, "eval.n_pairs", "must be a positive integer")
    need(is_int(cfg.eval.harness_seed) and cfg.eval.harness_seed >= 0, "eval.harness_seed", "must be a non-negative integer")
    need(isinstance(cfg.io.output_dir, str), "io.output_dir", "must be a string")


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    values = {}
    for key, value in raw.items():
        if key == "task":
            values["task"] = value
        elif key in _SECTIONS:
            values[key] = _section(key, value)
        else:
            raise ConfigError(f"{key}: unknown field")
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    _check(cfg)
    return cfg


def load_config(path) -> RunConfig:
    """Parse and validate a config file. Raises ConfigError on bad content
    and OSError when the file cannot be read."""
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return config_from_dict(raw)


def override(cfg: RunConfig, assignment: str) -> RunConfig:
    """Apply ``section.field=value`` (value parsed as JSON, else a string)."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r}: expected key=value")
    key, text = assignment.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    raw = cfg.to_dict()
    if key == "task":
        raw["task"] = value
    else:
        section, _, name = key.partition(".")
        if section not in _SECTIONS or not name:
            raise ConfigError(f"{key}: unknown field")
        if name not in raw[section]:
            raise ConfigError(f"{key}: unknown field")
        raw[section][name] = value
    for section in ("mapping", "roadmap"):
        for name in ("seeds", "c_max"):
            if name in raw[section] and isinstance(raw[section][name], tuple):
                raw[section][name] = list(raw[section][name])
    return config_from_dict(raw)


__all__ = ["ConfigError", "RunConfig", "config_from_dict", "load_config", "override"]
