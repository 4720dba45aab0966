import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from enslsr.mapping import MappingConfig  # noqa: E402
from enslsr.planner import VisualActionPlan  # noqa: E402
from enslsr.tasks import Action, generate_dataset  # noqa: E402

NOISE_FREE = MappingConfig(sigma_noise=0.0, p_merge=0.0, p_split=0.0, subset_fraction=1.0)


@pytest.fixture(scope="session")
def stacking_data():
    return generate_dataset("stacking", 2500, seed=0)


@pytest.fixture(scope="session")
def small_stacking_data():
    return generate_dataset("stacking", 300, seed=3)


@pytest.fixture(scope="session")
def small_harvesting_data():
    return generate_dataset("harvesting", 400, seed=4)


def make_plan(member_id, path_id, actions, compositions, nodes=None):
    """Hand-built plan for selection tests; only actions and compositions matter."""
    actions = tuple(Action.from_array(a) for a in actions)
    compositions = tuple(frozenset(c) for c in compositions)
    if nodes is None:
        nodes = tuple(range(len(compositions)))
    return VisualActionPlan(
        member_id=member_id,
        path_id=path_id,
        node_sequence=tuple(nodes),
        latent_plan=np.zeros((len(nodes), 2)),
        action_plan=actions,
        visual_plan=(),
        node_compositions=compositions,
    )


def random_plan(rng, member_id, path_id, max_len=4, universe=12, grid=3):
    n = int(rng.integers(0, max_len + 1))
    actions = rng.integers(0, grid, size=(n, 4)).astype(float) + rng.normal(0, 0.2, size=(n, 4))
    compositions = [
        set(rng.choice(universe, size=int(rng.integers(1, 4)), replace=False).tolist())
        for _ in range(n + 1)
    ]
    return make_plan(member_id, path_id, actions, compositions)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
