"""Synthetic mapping modules standing in for a learned encoder/decoder.

Each distinct state gets a pseudo-random centroid on the unit sphere, keyed
by ``(model_seed, state)``. Observations are encoded as their state's
centroid plus a nuisance-keyed offset of norm ``sigma_noise``. Two kinds of
structural error can be injected:

* merges: two distinct states share one centroid (drawn per unordered state
  pair with probability ``p_merge``; a state is merged at most once);
* splits: a state owns a second centroid (drawn per state with probability
  ``p_split``) and its observations route to one of the two by a hash of
  their nuisance record.

Decoding returns the nearest training observation in latent space.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tasks import TASKS, Observation, SystemState, TransitionTuple

_MERGE_STREAM = 1
_SPLIT_STREAM = 2
_SUBSET_STREAM = 3
_SECOND_CENTROID = 7


@dataclass(frozen=True)
class MappingConfig:
    d: int = 16
    sigma_noise: float = 0.25
    p_merge: float = 1e-4
    p_split: float = 0.02
    subset_fraction: float = 0.85

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.sigma_noise < 0:
            raise ValueError("sigma_noise must be >= 0")
        for name in ("p_merge", "p_split"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0.0 < self.subset_fraction <= 1.0:
            raise ValueError("subset_fraction must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class MappingModule:
    model_seed: int
    config: MappingConfig
    task: str
    train_subset: tuple[int, ...]
    merged_into: dict[SystemState, SystemState] = field(repr=False)
    split_states: frozenset[SystemState] = field(repr=False)
    train_observations: tuple[Observation, ...] = field(repr=False)
    train_latents: np.ndarray = field(repr=False)

    @property
    def d(self) -> int:
        return self.config.d


def _unit_vector(seed_words: Sequence[int], d: int) -> np.ndarray:
    v = np.random.default_rng(list(seed_words)).standard_normal(d)
    return v / np.linalg.norm(v)


def state_centroid(module: MappingModule, state: SystemState, route: int = 0) -> np.ndarray:
    """Centroid of ``state`` in ``module``'s latent space.

    ``route`` selects the second centroid of a split state.
    """
    owner = module.merged_into.get(state, state)
    words = [module.model_seed, TASKS.index(state.task), *owner.key()]
    if route and state in module.split_states:
        words = [*words, _SECOND_CENTROID]
    return _unit_vector(words, module.d)


def _route(module: MappingModule, obs: Observation) -> int:
    if obs.state not in module.split_states:
        return 0
    h = hashlib.sha256(obs.nuisance.digest + module.model_seed.to_bytes(8, "little"))
    return h.digest()[0] & 1


def _noise_direction(module: MappingModule, obs: Observation) -> np.ndarray:
    digest = obs.nuisance.digest
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return _unit_vector([module.model_seed, obs.index, *words], module.d)


def encode(module: MappingModule, obs: Observation) -> np.ndarray:
    z = state_centroid(module, obs.state, _route(module, obs))
    if module.config.sigma_noise > 0:
        z = z + module.config.sigma_noise * _noise_direction(module, obs)
    return z


def encode_many(module: MappingModule, observations: Sequence[Observation]) -> np.ndarray:
    if not observations:
        return np.zeros((0, module.d))
    return np.stack([encode(module, o) for o in observations])


def decode(module: MappingModule, z: np.ndarray) -> Observation:
    """Training observation whose encoding is closest to ``z``."""
    dist2 = np.sum((module.train_latents - np.asarray(z)) ** 2, axis=1)
    # train_observations are sorted by index, so argmin breaks ties low
    return module.train_observations[int(np.argmin(dist2))]


def training_observations(
    dataset: Sequence[TransitionTuple], subset: Sequence[int]
) -> tuple[Observation, ...]:
    seen: dict[int, Observation] = {}
    for t in subset:
        tup = dataset[t]
        seen.setdefault(tup.first.index, tup.first)
        seen.setdefault(tup.second.index, tup.second)
    return tuple(seen[i] for i in sorted(seen))


def _select_subset(n: int, fraction: float, model_seed: int) -> tuple[int, ...]:
    k = max(1, int(round(fraction * n)))
    rng = np.random.default_rng([model_seed, _SUBSET_STREAM])
    return tuple(sorted(int(i) for i in rng.choice(n, size=k, replace=False)))


def _draw_merges(states: list[SystemState], p: float, model_seed: int) -> dict:
    n = len(states)
    if n < 2 or p <= 0:
        return {}
    rng = np.random.default_rng([model_seed, _MERGE_STREAM])
    rows, cols = np.triu_indices(n, k=1)
    hits = np.flatnonzero(rng.random(rows.size) < p)
    merged: dict[SystemState, SystemState] = {}
    taken: set[int] = set()
    for h in hits:
        a, b = int(rows[h]), int(cols[h])
        if a in taken or b in taken:
            continue
        taken.update((a, b))
        merged[states[b]] = states[a]
    return merged


def make_module(
    dataset: Sequence[TransitionTuple],
    model_seed: int,
    config: MappingConfig = MappingConfig(),
    train_subset: Sequence[int] | None = None,
) -> MappingModule:
    """Build a mapping module for ``dataset``.

    ``train_subset`` defaults to a seeded uniform draw of
    ``config.subset_fraction`` of the tuple indices.
    """
    if not dataset:
        raise ValueError("dataset is empty")
    if model_seed < 0:
        raise ValueError("model_seed must be non-negative")
    task = dataset[0].first.state.task
    states = sorted(
        {t.first.state for t in dataset} | {t.second.state for t in dataset},
        key=SystemState.key,
    )
    merged = _draw_merges(states, config.p_merge, model_seed)
    split_rng = np.random.default_rng([model_seed, _SPLIT_STREAM])
    split = frozenset(s for s, r in zip(states, split_rng.random(len(states))) if r < config.p_split)
    if train_subset is None:
        subset = _select_subset(len(dataset), config.subset_fraction, model_seed)
    else:
        subset = tuple(sorted(int(i) for i in train_subset))
    observations = training_observations(dataset, subset)
    module = MappingModule(
        model_seed=model_seed,
        config=config,
        task=task,
        train_subset=subset,
        merged_into=merged,
        split_states=split,
        train_observations=observations,
        train_latents=np.zeros((0, config.d)),
    )
    object.__setattr__(module, "train_latents", encode_many(module, observations))
    return module
