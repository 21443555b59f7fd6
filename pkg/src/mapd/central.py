"""Centralized baseline: per-timestep promotion, greedy candidate
construction, Hungarian endpoint assignment, and two-stage CBS planning."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from mapd.assignment import CostMatrix, hungarian, modified_costs
from mapd.cbs import MapfQuery, cbs_solve
from mapd.grid import Cell, GridMap, HeuristicTable
from mapd.pathing import Path, ReservationTable
from mapd.tasks import Task, TaskSet, TaskState


class InfeasibleError(RuntimeError):
    """No eligible endpoint or no reachable endpoint for some free agent."""


@dataclass
class AgentState:
    path: Path
    task: int | None = None       # executing task id, None while free
    endpoint: Cell | None = None  # currently assigned endpoint

    @property
    def occupied(self) -> bool:
        return self.task is not None


@dataclass
class CentralState:
    grid: GridMap
    h: HeuristicTable
    agents: dict[int, AgentState]
    node_cap: int = 50_000
    memoize: bool = False
    _passable_mask: np.ndarray = field(init=False, repr=False)
    _prev_free_goals: dict[int, Cell] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        mask = np.zeros((self.grid.rows, self.grid.cols), dtype=bool)
        for r, c in self.grid.passable:
            mask[r, c] = True
        self._passable_mask = mask

    @classmethod
    def create(cls, grid: GridMap, h: HeuristicTable, starts: list[Cell],
               node_cap: int = 50_000, memoize: bool = False) -> "CentralState":
        agents = {
            i: AgentState(path=Path(0, (cell,)), endpoint=cell)
            for i, cell in enumerate(starts)
        }
        return cls(grid=grid, h=h, agents=agents, node_cap=node_cap, memoize=memoize)

    def positions(self, t: int) -> dict[int, Cell]:
        return {a: st.path.loc_at(t) for a, st in self.agents.items()}


def constrained_costs(grid: GridMap, passable_mask: np.ndarray,
                      occupied_paths: list[Path], start: Cell, t0: int,
                      targets: set[Cell]) -> dict[Cell, int]:
    """Arrival costs from ``start`` at time ``t0`` to every reachable target,
    for paths that never collide with the occupied agents' paths (vertex,
    swap, and terminal-rest rules).  Layered reachability with one boolean
    grid per timestep; blocked cells and blocked directed moves are applied
    per layer."""
    vertex_by_t: dict[int, list[Cell]] = {}
    blocked_moves: dict[int, list[tuple[Cell, Cell]]] = {}
    rests: list[tuple[int, Cell]] = []
    max_res_t = t0
    for path in occupied_paths:
        t = path.start_t
        prev: Cell | None = None
        for cell in path.cells:
            vertex_by_t.setdefault(t, []).append(cell)
            if prev is not None and prev != cell:
                # occupied agent moves prev -> cell during t-1: my move
                # cell -> prev during t-1 would be a swap
                blocked_moves.setdefault(t - 1, []).append((cell, prev))
            prev = cell
            t += 1
        rests.append((path.end_t, path.end_cell))
        max_res_t = max(max_res_t, path.end_t)

    horizon = max(max_res_t, t0) + len(grid.passable) + 1
    rows, cols = grid.rows, grid.cols
    reach = np.zeros((rows, cols), dtype=bool)
    reach[start] = True
    remaining = set(targets)
    out: dict[Cell, int] = {}
    if start in remaining:
        out[start] = 0
        remaining.discard(start)

    def blocked_mask(t: int) -> np.ndarray:
        mask = np.zeros((rows, cols), dtype=bool)
        for cell in vertex_by_t.get(t, ()):
            mask[cell] = True
        for rest_start, cell in rests:
            if t >= rest_start:
                mask[cell] = True
        return mask

    count = np.zeros((rows, cols), dtype=np.int16)
    for t in range(t0, horizon):
        if not remaining or not reach.any():
            break
        count[:] = reach  # waiting in place
        count[:-1, :] += reach[1:, :]
        count[1:, :] += reach[:-1, :]
        count[:, :-1] += reach[:, 1:]
        count[:, 1:] += reach[:, :-1]
        for frm, to in blocked_moves.get(t, ()):
            if reach[frm]:
                count[to] -= 1
        reach = (count > 0) & passable_mask & ~blocked_mask(t + 1)
        arrived = [cell for cell in remaining if reach[cell]]
        for cell in arrived:
            out[cell] = t + 1 - t0
            remaining.discard(cell)
    return out


def promote_agents(state: CentralState, tasks: dict[int, Task], taskset: TaskSet,
                   t: int, log: list | None = None) -> list[int]:
    """Turn free agents standing on a pending pickup into occupied agents,
    in ascending agent id, skipping tasks whose delivery is already some
    agent's assigned endpoint.

    Location-triggered on purpose: execution starts the moment an agent
    occupies the pickup, as in the token solvers.  Gating on a fully rested
    agent can oscillate forever when re-planning keeps routing somebody
    across the pickup cell without stopping.
    """
    positions = state.positions(t)
    newly = []
    for agent in sorted(state.agents):
        st = state.agents[agent]
        if st.occupied:
            continue
        loc = positions[agent]
        here = sorted(
            (tid for tid in taskset
             if tasks[tid].pickup == loc and tasks[tid].state is TaskState.PENDING),
            key=lambda tid: (tasks[tid].release, tid),
        )
        taken = {
            other.endpoint for a, other in state.agents.items()
            if a != agent and other.endpoint is not None
        }
        for tid in here:
            if tasks[tid].delivery in taken:
                continue
            tasks[tid].start_execution(agent, t)
            taskset.remove(tid)
            st.task = tid
            st.endpoint = tasks[tid].delivery
            newly.append(agent)
            if log is not None:
                log.append({"t": t, "agent": agent, "action": "promote",
                            "task": tid, "path_cost": None})
            break
    return newly


def build_candidate_set(state: CentralState, tasks: dict[int, Task], taskset: TaskSet,
                        cost_of: dict[int, dict[Cell, int]],
                        force_parking: bool = False) -> tuple[list[tuple[Cell, str, int | None]], list[int]]:
    """Greedy endpoint pool for the free agents.

    Scans pending tasks in release order and keeps those whose pickup and
    delivery clash with neither the executing deliveries nor earlier picks;
    their pickups form the pool.  Pickups no free agent can currently reach
    are dropped from the pool (unreachable pairs never enter the matching).
    If free agents outnumber the remaining pickups (or ``force_parking``), a
    nearest distinct parking endpoint is reserved for every free agent.
    Returns (pool entries (cell, kind, task id), selected task ids).
    """
    grid = state.grid
    executing_deliveries = {
        tasks[st.task].delivery for st in state.agents.values() if st.occupied
    }
    chosen: list[int] = []
    used: set[Cell] = set()
    for tid in taskset:
        task = tasks[tid]
        if task.pickup in executing_deliveries or task.delivery in executing_deliveries:
            continue
        if task.pickup in used or task.delivery in used:
            continue
        chosen.append(tid)
        used.add(task.pickup)
        used.add(task.delivery)
    free_agents = [a for a in sorted(state.agents) if not state.agents[a].occupied]
    pool: list[tuple[Cell, str, int | None]] = [
        (tasks[tid].pickup, "pickup", tid) for tid in chosen
        if any(cost_of[agent].get(tasks[tid].pickup) is not None for agent in free_agents)
    ]
    if force_parking or len(free_agents) > len(pool):
        excluded = executing_deliveries | used
        parking_taken: set[Cell] = set()
        for agent in free_agents:
            costs = cost_of[agent]
            best: tuple[int, Cell] | None = None
            for cell in sorted(grid.endpoints):
                if cell in excluded or cell in parking_taken:
                    continue
                c = costs.get(cell)
                if c is None:
                    continue
                if best is None or (c, cell) < best:
                    best = (c, cell)
            if best is None:
                raise InfeasibleError(f"no reachable parking endpoint for agent {agent}")
            parking_taken.add(best[1])
            pool.append((best[1], "parking", None))
    return pool, chosen


def _solve_assignment(free_agents: list[int], pool: list[tuple[Cell, str, int | None]],
                      cost_of: dict[int, dict[Cell, int]]) -> dict[int, int] | None:
    """Hungarian matching of free agents onto pool columns (by index) under
    the dominance-shaped costs.  Returns None when some agent would be
    forced onto a column it cannot reach."""
    kinds = [kind for _, kind, _ in pool]
    cells = [cell for cell, _, _ in pool]
    base: list[list[int]] = []
    unreachable: set[tuple[int, int]] = set()
    for i, agent in enumerate(free_agents):
        row = []
        for j, cell in enumerate(cells):
            c = cost_of[agent].get(cell)
            if c is None:
                unreachable.add((i, j))
                row.append(0)  # placeholder, replaced by a sentinel below
            else:
                row.append(c)
        if all((i, j) in unreachable for j in range(len(cells))):
            return None
        base.append(row)
    matrix = modified_costs(free_agents, list(range(len(pool))), kinds, base)
    if unreachable:
        c = len(free_agents)
        big = max((v for row in base for v in row), default=0) + 1
        # larger than any sum of legitimate entries, so a sentinel is picked
        # only when no fully reachable matching exists at all
        sentinel = c * (c * big * big + big) + 1
        for i, j in unreachable:
            matrix.costs[i][j] = sentinel
    picked = hungarian(matrix)
    for agent, j in picked.items():
        if (free_agents.index(agent), j) in unreachable:
            return None
    return picked


def central_step(state: CentralState, tasks: dict[int, Task], taskset: TaskSet,
                 t: int, log: list | None = None) -> None:
    """One decision round: promote, build candidates, assign with the
    Hungarian method on dominance-shaped costs, then plan in two stages
    (newly occupied agents first, free agents second), each stage treating
    every other agent's latest path as a spatio-temporal obstacle."""
    grid = state.grid
    newly_occupied = promote_agents(state, tasks, taskset, t, log)
    positions = state.positions(t)

    free_agents = [a for a in sorted(state.agents) if not state.agents[a].occupied]
    occupied_paths = [st.path for st in state.agents.values() if st.occupied]
    cost_of = {
        agent: constrained_costs(grid, state._passable_mask, occupied_paths,
                                 positions[agent], t, set(grid.endpoints))
        for agent in free_agents
    }

    pool, _ = build_candidate_set(state, tasks, taskset, cost_of)

    assigned_goals: dict[int, Cell] = {}
    if free_agents:
        picked = _solve_assignment(free_agents, pool, cost_of) if pool else None
        if picked is None:
            # tight pickup pool with transiently unreachable cells: retry
            # with a parking fallback column reserved for every free agent
            pool, _ = build_candidate_set(state, tasks, taskset, cost_of,
                                          force_parking=True)
            picked = _solve_assignment(free_agents, pool, cost_of)
            if picked is None:
                raise InfeasibleError("no reachable endpoint assignment exists")
        for agent, j in picked.items():
            cell, kind, tid = pool[j]
            assigned_goals[agent] = cell
            state.agents[agent].endpoint = cell
            if log is not None:
                log.append({"t": t, "agent": agent,
                            "action": "assign_pickup" if kind == "pickup" else "assign_parking",
                            "task": tid, "path_cost": None})
    def external_for(planned: list[int]) -> ReservationTable:
        rt = ReservationTable()
        for agent, st in state.agents.items():
            if agent not in planned:
                rt.add_path(agent, st.path)
        return rt

    if newly_occupied:
        query = MapfQuery(
            grid=grid, h=state.h,
            starts={a: positions[a] for a in newly_occupied},
            goals={a: state.agents[a].endpoint for a in newly_occupied},
            start_t=t, external=external_for(newly_occupied),
        )
        for agent, path in cbs_solve(query, state.node_cap).items():
            state.agents[agent].path = path
            if log is not None:
                log.append({"t": t, "agent": agent, "action": "replan",
                            "task": state.agents[agent].task, "path_cost": path.cost})

    if free_agents:
        can_skip = (
            state.memoize
            and not newly_occupied
            and assigned_goals == state._prev_free_goals
        )
        if not can_skip:
            query = MapfQuery(
                grid=grid, h=state.h,
                starts={a: positions[a] for a in free_agents},
                goals={a: assigned_goals[a] for a in free_agents},
                start_t=t, external=external_for(free_agents),
            )
            for agent, path in cbs_solve(query, state.node_cap).items():
                state.agents[agent].path = path
                if log is not None:
                    log.append({"t": t, "agent": agent, "action": "replan",
                                "task": None, "path_cost": path.cost})
    state._prev_free_goals = assigned_goals
