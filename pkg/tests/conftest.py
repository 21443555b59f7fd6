"""Shared fixtures and instance builders for the test suite."""

from __future__ import annotations

import random

import pytest

from mapd.grid import GridMap, MapdInstance, check_well_formed, parse_map
from mapd.pathing import Path
from mapd.tasks import Task, release_times

# Two-task swap scenario: both tasks have pickup == delivery, agent 1 sits
# one step from task 0's location, agent 0 five steps from task 1's.
SWAP_MAP = "2 5\ne....\n@re.r\n"
SWAP_STARTS = [(1, 4), (1, 1)]
SWAP_TASKS = [
    Task(id=0, pickup=(1, 2), delivery=(1, 2), release=0),
    Task(id=1, pickup=(0, 0), delivery=(0, 0), release=0),
]

CORRIDOR_MAP = "1 5\nr.eee\n"  # single agent, straight-line pickup/delivery


@pytest.fixture
def swap_instance() -> MapdInstance:
    return MapdInstance(grid=parse_map(SWAP_MAP), agent_starts=list(SWAP_STARTS))


@pytest.fixture
def swap_tasks() -> list[Task]:
    return [Task(id=t.id, pickup=t.pickup, delivery=t.delivery, release=t.release)
            for t in SWAP_TASKS]


def raw(path: Path) -> tuple[int, tuple]:
    return (path.start_t, path.cells)


def random_open_map(rng: random.Random, rows: int, cols: int,
                    wall_prob: float = 0.12) -> set:
    blocked = set()
    for r in range(rows):
        for c in range(cols):
            if rng.random() < wall_prob:
                blocked.add((r, c))
    return blocked


def random_well_formed_instance(seed: int, max_tries: int = 400):
    """Deterministic random instance accepted by the well-formedness check:
    a grid up to 12x12, 2-6 agents on non-task endpoints, and 4-10 task
    endpoints.  Returns (instance, rng) for follow-up task generation."""
    rng = random.Random(seed)
    for _ in range(max_tries):
        rows = rng.randint(5, 12)
        cols = rng.randint(5, 12)
        blocked = random_open_map(rng, rows, cols)
        free = [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in blocked]
        n_agents = rng.randint(2, 6)
        n_task_eps = rng.randint(4, 10)
        if len(free) < n_agents + n_task_eps + 4:
            continue
        cells = rng.sample(free, n_agents + n_task_eps)
        nontask = set(cells[:n_agents])
        task_eps = set(cells[n_agents:])
        try:
            grid = GridMap(rows, cols, blocked, task_eps, nontask)
            instance = MapdInstance(grid=grid, agent_starts=sorted(nontask))
        except ValueError:
            continue
        if check_well_formed(instance, []).ok:
            return instance, rng
    raise AssertionError(f"no well-formed instance found for seed {seed}")


def random_task_stream(instance: MapdInstance, rng: random.Random,
                       n_tasks: int, frequency) -> list[Task]:
    endpoints = sorted(instance.grid.task_endpoints)
    releases = release_times(n_tasks, frequency)
    tasks = []
    for j in range(n_tasks):
        pickup = rng.choice(endpoints)
        delivery = rng.choice([e for e in endpoints if e != pickup])
        tasks.append(Task(id=j, pickup=pickup, delivery=delivery, release=releases[j]))
    return tasks
