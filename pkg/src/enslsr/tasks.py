"""Pick-and-place task simulators: box stacking and grape harvesting.

Both tasks place four objects in a small grid of cells. Stacking uses a 3x3
column/level grid with gravity; harvesting uses four vine cells (``y == 1``)
and four box cells (``y == 0``). Cell centers sit at integer coordinates, so
an action's pick and release points are in cell-grid units.

Ground-truth states are only used to generate data and to judge plans; the
planners never see them.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

STACKING = "stacking"
HARVESTING = "harvesting"
TASKS = (STACKING, HARVESTING)

#: Offset for holdout observation indices; training indices stay far below it.
HOLDOUT_BASE = 1_000_000

N_OBJECTS = 4
# harvesting: objects 0, 1 are white bunches, 2, 3 are black bunches
BUNCH_COLORS = (0, 0, 1, 1)

_JITTER = {STACKING: 0.15, HARVESTING: 0.125}

Cell = tuple[int, int]


class InvalidAction(ValueError):
    """Raised when a snapped action is not permitted in the current state."""


def grid_cells(task: str) -> tuple[Cell, ...]:
    if task == STACKING:
        return tuple((x, y) for y in range(3) for x in range(3))
    if task == HARVESTING:
        return tuple((x, y) for y in (0, 1) for x in range(4))
    raise ValueError(f"unknown task {task!r}")


def is_box_cell(cell: Cell) -> bool:
    """Harvesting only: box cells are the bottom row."""
    return cell[1] == 0


@dataclass(frozen=True)
class SystemState:
    """Object-to-cell assignment. ``cells[k]`` is the cell of object ``k``.

    Harvesting bunches of the same color are indistinguishable, so their
    cells are kept sorted within each color pair.
    """

    task: str
    cells: tuple[Cell, ...]

    def __post_init__(self) -> None:
        cells = tuple((int(x), int(y)) for x, y in self.cells)
        if self.task == HARVESTING:
            cells = tuple(sorted(cells[:2])) + tuple(sorted(cells[2:]))
        object.__setattr__(self, "cells", cells)

    def key(self) -> tuple[int, ...]:
        """Flat non-negative integer encoding, stable across runs."""
        return tuple(v for cell in self.cells for v in cell)

    def occupant(self, cell: Cell) -> int | None:
        for k, c in enumerate(self.cells):
            if c == cell:
                return k
        return None

    def is_valid(self) -> bool:
        grid = set(grid_cells(self.task))
        if len(self.cells) != N_OBJECTS or len(set(self.cells)) != N_OBJECTS:
            return False
        if not all(c in grid for c in self.cells):
            return False
        if self.task == STACKING:
            occupied = set(self.cells)
            return all(y == 0 or (x, y - 1) in occupied for x, y in self.cells)
        return True


@dataclass(frozen=True)
class Action:
    """Pick-and-place action with continuous pick and release points."""

    pick: tuple[float, float]
    release: tuple[float, float]

    @classmethod
    def from_array(cls, values: Sequence[float]) -> Action:
        px, py, rx, ry = (float(v) for v in values)
        return cls((px, py), (rx, ry))

    def as_array(self) -> np.ndarray:
        return np.array([*self.pick, *self.release], dtype=float)

    def reversed(self) -> Action:
        return Action(self.release, self.pick)


@dataclass(frozen=True)
class ActionInfo:
    """``a == 1`` when an action took place; ``u`` is ignored otherwise."""

    a: int
    u: Action | None = None


@dataclass(frozen=True)
class Nuisance:
    """Task-irrelevant variation of one observation.

    ``jitter[k]`` is the positional offset of object ``k`` in cell units.
    ``scale``, ``orientation`` and ``variant`` are per object and only used by
    harvesting.
    """

    jitter: tuple[tuple[float, float], ...]
    lighting: float
    scale: tuple[float, ...] | None = None
    orientation: tuple[float, ...] | None = None
    variant: tuple[int, ...] | None = None

    @cached_property
    def digest(self) -> bytes:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).digest()


@dataclass(frozen=True)
class Observation:
    index: int
    state: SystemState
    nuisance: Nuisance = field(compare=False)

    def position(self, obj: int) -> tuple[float, float]:
        """Noisy position of an object as it appears in the observation."""
        x, y = self.state.cells[obj]
        dx, dy = self.nuisance.jitter[obj]
        return (x + dx, y + dy)


@dataclass(frozen=True)
class TransitionTuple:
    first: Observation
    second: Observation
    rho: ActionInfo


# --------------------------------------------------------------------------
# rules


def snap_point(point: Sequence[float]) -> Cell:
    # nearest integer, ties toward the lower index
    return tuple(int(math.ceil(v - 0.5)) for v in point)  # type: ignore[return-value]


def snap(action: Action) -> tuple[Cell, Cell]:
    return snap_point(action.pick), snap_point(action.release)


@lru_cache(maxsize=None)
def valid_moves(state: SystemState) -> tuple[tuple[Cell, Cell], ...]:
    """All permitted (pick cell, release cell) pairs, in a fixed order."""
    occupied = set(state.cells)
    grid = grid_cells(state.task)
    moves = []
    if state.task == STACKING:
        for x, y in sorted(state.cells):
            if (x, y + 1) in occupied:
                continue
            rest = occupied - {(x, y)}
            for cx, cy in grid:
                if (cx, cy) in occupied:
                    continue
                if cy == 0 or (cx, cy - 1) in rest:
                    moves.append(((x, y), (cx, cy)))
    else:
        for pick in sorted(state.cells):
            for release in grid:
                if is_box_cell(release) and release not in occupied:
                    moves.append((pick, release))
    return tuple(moves)


def valid_actions(state: SystemState) -> list[Action]:
    return [Action(tuple(map(float, p)), tuple(map(float, r))) for p, r in valid_moves(state)]


def _move(state: SystemState, pick: Cell, release: Cell) -> SystemState:
    if (pick, release) not in valid_moves(state):
        raise InvalidAction(f"move {pick} -> {release} not allowed in {state.cells}")
    cells = list(state.cells)
    cells[state.occupant(pick)] = release
    return SystemState(state.task, tuple(cells))


def apply_action(state: SystemState, action: Action) -> SystemState:
    """Snap ``action`` to cell centers and execute it."""
    return _move(state, *snap(action))


@lru_cache(maxsize=None)
def all_states(task: str) -> tuple[SystemState, ...]:
    """Every valid state of ``task``, in a deterministic order."""
    grid = grid_cells(task)
    seen = set()
    out = []
    for cells in _placements(grid, N_OBJECTS):
        state = SystemState(task, cells)
        if state in seen or not state.is_valid():
            continue
        seen.add(state)
        out.append(state)
    return tuple(out)


def _placements(grid: Sequence[Cell], k: int) -> Iterable[tuple[Cell, ...]]:
    if k == 0:
        yield ()
        return
    for rest in _placements(grid, k - 1):
        for cell in grid:
            if cell not in rest:
                yield rest + (cell,)


@lru_cache(maxsize=None)
def _transitions(state: SystemState) -> tuple[tuple[tuple[Cell, Cell], SystemState], ...]:
    return tuple((m, _move(state, *m)) for m in valid_moves(state))


@lru_cache(maxsize=4096)
def _bfs_tree(start: SystemState) -> dict[SystemState, tuple[SystemState, tuple[Cell, Cell]] | None]:
    parents: dict = {start: None}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for move, nxt in _transitions(s):
            if nxt not in parents:
                parents[nxt] = (s, move)
                queue.append(nxt)
    return parents


def is_reachable(start: SystemState, goal: SystemState) -> bool:
    return goal in _bfs_tree(start)


def shortest_action_sequence(start: SystemState, goal: SystemState) -> list[Action] | None:
    """A shortest ground-truth action sequence from ``start`` to ``goal``."""
    tree = _bfs_tree(start)
    if goal not in tree:
        return None
    moves = []
    s = goal
    while tree[s] is not None:
        s, move = tree[s]
        moves.append(move)
    return [Action(tuple(map(float, p)), tuple(map(float, r))) for p, r in reversed(moves)]


# --------------------------------------------------------------------------
# data generation


def sample_nuisance(task: str, rng: np.random.Generator) -> Nuisance:
    bound = _JITTER[task]
    jitter = tuple(
        (float(dx), float(dy)) for dx, dy in rng.uniform(-bound, bound, size=(N_OBJECTS, 2))
    )
    lighting = float(rng.uniform(0.0, 1.0))
    if task == STACKING:
        return Nuisance(jitter, lighting)
    return Nuisance(
        jitter,
        lighting,
        scale=tuple(float(v) for v in rng.uniform(0.9, 1.1, N_OBJECTS)),
        orientation=tuple(float(v) for v in rng.uniform(-180.0, 180.0, N_OBJECTS)),
        variant=tuple(int(v) for v in rng.integers(0, 2, N_OBJECTS)),
    )


def generate_dataset(
    task: str,
    n_tuples: int,
    frac_no_action: float = 0.2,
    seed: int = 0,
    walk_length: int = 10,
) -> list[TransitionTuple]:
    """Random-walk dataset of transition tuples.

    Walks apply uniformly drawn valid actions; each starts from a state no
    walk has visited yet (any state once all have been visited). With
    probability ``frac_no_action`` a step instead records a standalone
    no-action pair: two observations of one uniformly drawn state with
    independent nuisance. Action coordinates are the noisy object positions
    in the two observations.
    """
    if n_tuples <= 0:
        raise ValueError("n_tuples must be positive")
    if not 0.0 <= frac_no_action < 1.0:
        raise ValueError("frac_no_action must be in [0, 1)")
    rng = np.random.default_rng(seed)
    states = all_states(task)
    tuples: list[TransitionTuple] = []
    unvisited = dict.fromkeys(states)
    next_index = 0

    def observe(state: SystemState) -> Observation:
        nonlocal next_index
        obs = Observation(next_index, state, sample_nuisance(task, rng))
        next_index += 1
        return obs

    while len(tuples) < n_tuples:
        pool = list(unvisited) or states
        state = pool[rng.integers(len(pool))]
        unvisited.pop(state, None)
        current = observe(state)
        for _ in range(walk_length):
            if len(tuples) == n_tuples:
                break
            if rng.random() < frac_no_action:
                other = states[rng.integers(len(states))]
                tuples.append(TransitionTuple(observe(other), observe(other), ActionInfo(0)))
                continue
            moves = valid_moves(state)
            if not moves:
                break
            pick, release = moves[rng.integers(len(moves))]
            obj = state.occupant(pick)
            state = _move(state, pick, release)
            unvisited.pop(state, None)
            nxt = observe(state)
            u = Action(current.position(obj), nxt.position(state.occupant(release)))
            tuples.append(TransitionTuple(current, nxt, ActionInfo(1, u)))
            current = nxt
    return tuples


def sample_eval_pair(task: str, seed, pair_id: int = 0) -> tuple[Observation, Observation]:
    """Holdout start/goal observations with distinct, reachable states.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    Indices are ``HOLDOUT_BASE + 2 * pair_id`` and the following integer.
    """
    rng = np.random.default_rng(seed)
    states = all_states(task)
    while True:
        start, goal = (states[i] for i in rng.integers(len(states), size=2))
        if start != goal and is_reachable(start, goal):
            break
    base = HOLDOUT_BASE + 2 * pair_id
    return (
        Observation(base, start, sample_nuisance(task, rng)),
        Observation(base + 1, goal, sample_nuisance(task, rng)),
    )


def sample_eval_pairs(task: str, n_pairs: int, seed: int) -> list[tuple[Observation, Observation]]:
    return [sample_eval_pair(task, (seed, k), pair_id=k) for k in range(n_pairs)]


def verify_plan(start: Observation, goal: Observation, plan) -> bool:
    """Replay ``plan``'s actions from the start state and compare with the goal.

    ``plan`` may be a plan object with an ``action_plan`` attribute or a plain
    sequence of actions.
    """
    actions = getattr(plan, "action_plan", plan)
    state = start.state
    for action in actions:
        try:
            state = apply_action(state, action)
        except InvalidAction:
            return False
    return state == goal.state
