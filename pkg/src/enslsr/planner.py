"""Single-roadmap planning: nearest nodes, all shortest paths, plan assembly."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .mapping import MappingModule, decode, encode
from .roadmap import Roadmap
from .tasks import Action, Observation

DEFAULT_MAX_PATHS = 50


class EmptyRoadmap(ValueError):
    pass


class NoPath(LookupError):
    pass


@dataclass(frozen=True, eq=False)
class VisualActionPlan:
    member_id: int
    path_id: int
    node_sequence: tuple[int, ...]
    latent_plan: np.ndarray = field(repr=False)
    action_plan: tuple[Action, ...]
    visual_plan: tuple[Observation, ...] = field(repr=False)
    node_compositions: tuple[frozenset[int], ...] = field(repr=False)

    @cached_property
    def composition_union(self) -> frozenset[int]:
        return frozenset().union(*self.node_compositions)

    @cached_property
    def collapsed_actions(self) -> np.ndarray:
        """Actions flattened to ``(p_x, p_y, r_x, r_y, ...)``."""
        if not self.action_plan:
            return np.zeros(0)
        return np.concatenate([u.as_array() for u in self.action_plan])

    @property
    def n_actions(self) -> int:
        return len(self.action_plan)


@dataclass(frozen=True)
class PlanSet:
    member_id: int
    plans: tuple[VisualActionPlan, ...] = ()
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.plans)


@dataclass(frozen=True, eq=False)
class Member:
    """One S-LSR: a mapping module and a roadmap built in its latent space."""

    member_id: int
    module: MappingModule
    roadmap: Roadmap

    @cached_property
    def node_observations(self) -> tuple[Observation, ...]:
        return tuple(decode(self.module, n.centroid) for n in self.roadmap.nodes)


def nearest_node(roadmap: Roadmap, z: np.ndarray) -> int:
    if not roadmap.nodes:
        raise EmptyRoadmap("roadmap has no nodes")
    dist2 = np.sum((roadmap.centroids - np.asarray(z)) ** 2, axis=1)
    return int(np.argmin(dist2))


def _bfs_distances(neighbours: Sequence[Sequence[int]], root: int) -> dict[int, int]:
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in neighbours[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def all_shortest_paths(
    roadmap: Roadmap, src: int, dst: int, max_paths: int = DEFAULT_MAX_PATHS
) -> tuple[list[tuple[int, ...]], bool]:
    """All minimum-hop paths from ``src`` to ``dst``.

    Returns the paths in lexicographic order, cut after ``max_paths``, and a
    flag telling whether the cut dropped any path. Edge direction is
    respected because undirected roadmaps store both orientations.
    """
    n = len(roadmap.nodes)
    if not (0 <= src < n and 0 <= dst < n):
        raise IndexError("node id out of range")
    forward = _bfs_distances(roadmap.successors, src)
    if dst not in forward:
        raise NoPath(f"node {dst} unreachable from {src}")
    length = forward[dst]
    # keep only nodes that lie on some shortest path: walk predecessors back
    # from dst through the BFS layers
    on_path = {dst}
    layer = {dst}
    for _ in range(length):
        layer = {
            p
            for v in layer
            for p in roadmap.predecessors[v]
            if forward.get(p) == forward[v] - 1
        }
        on_path |= layer

    def nexts(v: int) -> list[int]:
        return [w for w in roadmap.successors[v] if w in on_path and forward[w] == forward[v] + 1]

    paths: list[tuple[int, ...]] = []
    stack: list[tuple[int, ...]] = [(src,)]
    truncated = False
    while stack:
        path = stack.pop()
        if path[-1] == dst:
            if len(paths) == max_paths:
                truncated = True
                break
            paths.append(path)
            continue
        for w in reversed(nexts(path[-1])):
            stack.append(path + (w,))
    return paths, truncated


def assemble_plan(member: Member, path_id: int, nodes: Sequence[int]) -> VisualActionPlan:
    roadmap = member.roadmap
    actions = tuple(
        roadmap.edge_map[(a, b)].mean_action for a, b in zip(nodes[:-1], nodes[1:])
    )
    return VisualActionPlan(
        member_id=member.member_id,
        path_id=path_id,
        node_sequence=tuple(nodes),
        latent_plan=roadmap.centroids[list(nodes)],
        action_plan=actions,
        visual_plan=tuple(member.node_observations[v] for v in nodes),
        node_compositions=tuple(roadmap.nodes[v].composition for v in nodes),
    )


def plan_member(
    member: Member,
    start: Observation,
    goal: Observation,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> PlanSet:
    """Visual action plans proposed by one S-LSR; empty when no path exists."""
    roadmap = member.roadmap
    src = nearest_node(roadmap, encode(member.module, start))
    dst = nearest_node(roadmap, encode(member.module, goal))
    try:
        paths, truncated = all_shortest_paths(roadmap, src, dst, max_paths)
    except NoPath:
        return PlanSet(member.member_id)
    plans = tuple(assemble_plan(member, j, p) for j, p in enumerate(paths))
    return PlanSet(member.member_id, plans, truncated)
