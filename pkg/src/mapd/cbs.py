"""Conflict-based search: optimal flowtime MAPF against fixed external
spatio-temporal obstacles.

High level: best-first search over constraint-tree nodes ordered by cost.
The first conflict between two planned paths splits the node into two
children, each forbidding one side of the conflict for one agent.  Low
level: the constrained space-time A* from :mod:`mapd.pathing`.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from mapd.grid import Cell, GridMap, HeuristicTable
from mapd.pathing import Path, ReservationTable, SearchConstraints, paths_conflict, plan_constrained

DEFAULT_NODE_CAP = 50_000


class CbsFailure(RuntimeError):
    """Search failed; ``reason`` is 'unsolvable' or 'node_cap'."""

    def __init__(self, message: str, reason: str):
        super().__init__(message)
        self.reason = reason


@dataclass
class MapfQuery:
    """One-shot MAPF instance: per-agent start and goal at a common start
    time, with already-committed paths as external obstacles."""

    grid: GridMap
    h: HeuristicTable
    starts: dict[int, Cell]
    goals: dict[int, Cell]
    start_t: int = 0
    external: ReservationTable = field(default_factory=ReservationTable)

    def __post_init__(self) -> None:
        if set(self.starts) != set(self.goals):
            raise ValueError("starts and goals must cover the same agents")
        starts = list(self.starts.values())
        if len(set(starts)) != len(starts):
            raise ValueError("starts must be pairwise distinct")
        goals = list(self.goals.values())
        if len(set(goals)) != len(goals):
            raise ValueError("goals must be pairwise distinct")
        for agent, goal in self.goals.items():
            if not self.external.goal_safe(goal, max(self.start_t, self.external.max_time + 1)):
                raise ValueError(f"goal {goal} of agent {agent} is terminally reserved")

    @property
    def agents(self) -> list[int]:
        return sorted(self.starts)


@dataclass
class CtNode:
    constraints: dict[int, SearchConstraints]
    paths: dict[int, Path]
    cost: int


def detect_first_conflict(paths: dict[int, Path]) -> tuple | None:
    """Earliest conflict over all agent pairs: ordered by timestep, vertex
    before edge at equal time, then by the (ascending) agent pair.

    Returns ("vertex", t, a, b, cell) or ("edge", t, a, b, u, v) where agent
    ``a`` moves u -> v during t and agent ``b`` moves v -> u.
    """
    agents = sorted(paths)
    best = None
    for i, a in enumerate(agents):
        for b in agents[i + 1:]:
            hit = paths_conflict(paths[a], paths[b])
            if hit is None:
                continue
            kind, t, detail = hit
            rank = (t, 0 if kind == "vertex" else 1, a, b)
            if best is None or rank < best[0]:
                best = (rank, kind, t, a, b, detail)
    if best is None:
        return None
    _, kind, t, a, b, detail = best
    if kind == "vertex":
        return ("vertex", t, a, b, detail)
    u, v = detail
    return ("edge", t, a, b, u, v)


def _extended(constraints: dict[int, SearchConstraints], agent: int,
              vertex: tuple[Cell, int] | None = None,
              edge: tuple[Cell, Cell, int] | None = None) -> dict[int, SearchConstraints]:
    out = dict(constraints)
    old = constraints[agent]
    new = SearchConstraints(vertices=set(old.vertices), edges=set(old.edges))
    if vertex is not None:
        new.vertices.add(vertex)
    if edge is not None:
        new.edges.add(edge)
    out[agent] = new
    return out


def cbs_solve(query: MapfQuery, node_cap: int = DEFAULT_NODE_CAP) -> dict[int, Path]:
    """Flowtime-minimal, pairwise collision-free paths for all query agents,
    also collision-free against the external obstacles (terminal rests
    included).  Raises :class:`CbsFailure` when no solution exists under the
    constraints or the node cap is hit."""
    agents = query.agents
    if not agents:
        return {}

    def low_level(agent: int, constraints: SearchConstraints) -> Path | None:
        return plan_constrained(
            query.grid, query.h, query.starts[agent], query.start_t,
            query.goals[agent], query.external, constraints,
        )

    root_constraints = {a: SearchConstraints() for a in agents}
    root_paths: dict[int, Path] = {}
    for agent in agents:
        path = low_level(agent, root_constraints[agent])
        if path is None:
            raise CbsFailure(
                f"agent {agent} has no path {query.starts[agent]} -> {query.goals[agent]}",
                reason="unsolvable",
            )
        root_paths[agent] = path
    root = CtNode(root_constraints, root_paths, sum(p.cost for p in root_paths.values()))

    counter = itertools.count()
    open_heap: list[tuple[int, int, CtNode]] = [(root.cost, next(counter), root)]
    expanded = 0
    while open_heap:
        _, _, node = heapq.heappop(open_heap)
        expanded += 1
        if expanded > node_cap:
            raise CbsFailure(f"node cap {node_cap} hit", reason="node_cap")
        conflict = detect_first_conflict(node.paths)
        if conflict is None:
            return node.paths
        if conflict[0] == "vertex":
            _, t, a, b, cell = conflict
            branches = [(a, (cell, t), None), (b, (cell, t), None)]
        else:
            _, t, a, b, u, v = conflict
            branches = [(a, None, (u, v, t)), (b, None, (v, u, t))]
        for agent, vertex, edge in branches:
            constraints = _extended(node.constraints, agent, vertex, edge)
            path = low_level(agent, constraints[agent])
            if path is None:
                continue
            paths = dict(node.paths)
            paths[agent] = path
            cost = sum(p.cost for p in paths.values())
            heapq.heappush(open_heap, (cost, next(counter), CtNode(constraints, paths, cost)))
    raise CbsFailure("constraint tree exhausted without a solution", reason="unsolvable")
