"""Latent Space Roadmap construction.

Training latents are clustered by single linkage at a radius ``epsilon``.
Each surviving cluster becomes a node, and every ``a = 1`` tuple whose
endpoints fall in two different nodes contributes its action to the edge
between them. The radius is swept and the roadmap with the most edges whose
weakly connected component count stays within ``c_max`` is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .mapping import MappingModule, encode_many, training_observations
from .tasks import Action, TransitionTuple

# column permutation turning (px, py, rx, ry) into (rx, ry, px, py)
_REVERSE = np.array([2, 3, 0, 1])


class NoFeasibleEpsilon(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class RoadmapNode:
    node_id: int
    centroid: np.ndarray
    composition: frozenset[int]


@dataclass(frozen=True)
class RoadmapEdge:
    source: int
    target: int
    mean_action: Action
    support_count: int


@dataclass(frozen=True, eq=False)
class Roadmap:
    nodes: tuple[RoadmapNode, ...]
    edges: tuple[RoadmapEdge, ...]
    directed: bool
    epsilon_used: float
    c_max: int
    # (epsilon, n_edges, n_components) for every swept radius
    sweep: tuple[tuple[float, int, int], ...] = field(default=(), repr=False)

    @cached_property
    def centroids(self) -> np.ndarray:
        if not self.nodes:
            return np.zeros((0, 0))
        return np.stack([n.centroid for n in self.nodes])

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for e in self.edges:
            out[e.source].append(e.target)
        return tuple(tuple(sorted(s)) for s in out)

    @cached_property
    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for e in self.edges:
            out[e.target].append(e.source)
        return tuple(tuple(sorted(s)) for s in out)

    @cached_property
    def edge_map(self) -> dict[tuple[int, int], RoadmapEdge]:
        return {(e.source, e.target): e for e in self.edges}


def _n_components(n_nodes: int, sources: np.ndarray, targets: np.ndarray) -> int:
    if n_nodes == 0:
        return 0
    graph = coo_matrix(
        (np.ones(len(sources)), (sources, targets)), shape=(n_nodes, n_nodes)
    ).tocsr()
    n, _ = connected_components(graph, directed=True, connection="weak")
    return int(n)


def wcc_count(roadmap: Roadmap) -> int:
    """Number of connected components when edge direction is ignored."""
    src = np.array([e.source for e in roadmap.edges], dtype=int)
    dst = np.array([e.target for e in roadmap.edges], dtype=int)
    return _n_components(len(roadmap.nodes), src, dst)


def _canonical_labels(raw: np.ndarray) -> np.ndarray:
    # relabel clusters 0..k-1 by first occurrence
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse]


def cluster_at(latents: np.ndarray, epsilon: float) -> np.ndarray:
    """Single-linkage cluster labels at radius ``epsilon``.

    Points end up together iff they are joined by a chain of hops of length
    at most ``epsilon``. Labels are numbered by first occurrence.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    latents = np.asarray(latents, dtype=float)
    if len(latents) < 2:
        return np.zeros(len(latents), dtype=int)
    return _cluster(linkage(latents, method="single"), epsilon)


def _cluster(tree: np.ndarray, epsilon: float) -> np.ndarray:
    return _canonical_labels(fcluster(tree, t=epsilon, criterion="distance"))


@dataclass
class _Partition:
    node_of_point: np.ndarray  # -1 for pruned points
    n_nodes: int
    keys: np.ndarray  # unique source * n_nodes + target
    inverse: np.ndarray  # tuple -> position in keys
    actions: np.ndarray  # oriented action per contributing tuple
    n_components: int


def _partition(
    labels: np.ndarray,
    min_cluster_size: int,
    first: np.ndarray,
    second: np.ndarray,
    actions: np.ndarray,
    directed: bool,
) -> _Partition:
    sizes = np.bincount(labels)
    keep = sizes >= min_cluster_size
    node_of_cluster = np.full(sizes.size, -1)
    node_of_cluster[keep] = np.arange(int(keep.sum()))
    node_of_point = node_of_cluster[labels]
    n_nodes = int(keep.sum())

    a = node_of_point[first]
    b = node_of_point[second]
    ok = (a >= 0) & (b >= 0) & (a != b)
    a, b, acts = a[ok], b[ok], actions[ok]
    if not directed:
        flip = a > b
        a, b = np.where(flip, b, a), np.where(flip, a, b)
        acts = np.where(flip[:, None], acts[:, _REVERSE], acts)
    keys, inverse = np.unique(a * n_nodes + b, return_inverse=True)
    n_comp = _n_components(n_nodes, keys // max(n_nodes, 1), keys % max(n_nodes, 1))
    return _Partition(node_of_point, n_nodes, keys, inverse.ravel(), acts, n_comp)


def _n_edges(part: _Partition, directed: bool) -> int:
    return int(part.keys.size) * (1 if directed else 2)


def epsilon_grid(tree: np.ndarray, n_eps: int = 50) -> np.ndarray:
    """Radii spanning the 5th-95th percentile of single-linkage merge heights."""
    heights = tree[:, 2]
    lo, hi = np.percentile(heights, [5, 95])
    grid = np.linspace(lo, hi, n_eps)
    tiny = np.finfo(float).eps
    return np.maximum(grid, tiny)


def build_roadmap(
    dataset: Sequence[TransitionTuple],
    module: MappingModule,
    c_max: int,
    min_cluster_size: int = 1,
    directed: bool = False,
    n_eps: int = 50,
) -> Roadmap:
    """Build the roadmap of ``module``'s training tuples.

    Among the swept radii, the one yielding the most edges subject to at most
    ``c_max`` weakly connected components wins; ties go to the smaller
    radius. If no swept radius is feasible the sweep is extended with
    ``n_eps`` more radii up to the largest merge height, where all points
    form a single cluster.
    """
    if c_max < 1:
        raise ValueError("c_max must be >= 1")
    if min_cluster_size < 1:
        raise ValueError("min_cluster_size must be >= 1")
    observations = training_observations(dataset, module.train_subset)
    if len(observations) == len(module.train_observations):
        latents = module.train_latents
    else:
        latents = encode_many(module, observations)
    position = {o.index: k for k, o in enumerate(observations)}
    moves = [dataset[t] for t in module.train_subset if dataset[t].rho.a == 1]
    first = np.array([position[t.first.index] for t in moves], dtype=int)
    second = np.array([position[t.second.index] for t in moves], dtype=int)
    actions = np.array([t.rho.u.as_array() for t in moves]).reshape(-1, 4)

    if len(observations) < 2:
        tree = None
        candidates = [1.0]
    else:
        tree = linkage(latents, method="single")
        candidates = list(epsilon_grid(tree, n_eps))

    def labels_at(eps: float) -> np.ndarray:
        if tree is None:
            return np.zeros(len(observations), dtype=int)
        return _cluster(tree, eps)

    sweep = []
    best: tuple[int, float, _Partition] | None = None
    for eps in candidates:
        part = _partition(labels_at(eps), min_cluster_size, first, second, actions, directed)
        n_edges = _n_edges(part, directed)
        sweep.append((float(eps), n_edges, part.n_components))
        if part.n_components <= c_max and (best is None or n_edges > best[0]):
            best = (n_edges, float(eps), part)
    if best is None and tree is not None:
        top = float(tree[:, 2].max())
        for eps in np.linspace(candidates[-1], top, n_eps + 1)[1:]:
            part = _partition(labels_at(eps), min_cluster_size, first, second, actions, directed)
            n_edges = _n_edges(part, directed)
            sweep.append((float(eps), n_edges, part.n_components))
            if part.n_components <= c_max and (best is None or n_edges > best[0]):
                best = (n_edges, float(eps), part)
    if best is None:
        raise NoFeasibleEpsilon(f"no radius gives at most {c_max} components")

    _, eps, part = best
    return _assemble(part, latents, observations, directed, eps, c_max, tuple(sweep))


def _assemble(part, latents, observations, directed, eps, c_max, sweep) -> Roadmap:
    n = part.n_nodes
    nodes = []
    for node_id in range(n):
        members = np.flatnonzero(part.node_of_point == node_id)
        nodes.append(
            RoadmapNode(
                node_id=node_id,
                centroid=latents[members].mean(axis=0),
                composition=frozenset(observations[k].index for k in members),
            )
        )
    counts = np.bincount(part.inverse, minlength=part.keys.size)
    sums = np.zeros((part.keys.size, 4))
    np.add.at(sums, part.inverse, part.actions)
    edges = []
    for key, total, count in zip(part.keys, sums, counts):
        src, dst = divmod(int(key), n)
        mean = total / count
        edges.append(RoadmapEdge(src, dst, Action.from_array(mean), int(count)))
        if not directed:
            edges.append(RoadmapEdge(dst, src, Action.from_array(mean[_REVERSE]), int(count)))
    edges.sort(key=lambda e: (e.source, e.target))
    return Roadmap(tuple(nodes), tuple(edges), directed, eps, c_max, sweep)
