"""Space-time single-agent planning against a reservation table.

Collision semantics: two agents may not occupy the same cell in the same
timestep, and may not traverse the same edge in opposite directions in the
same timestep.  Moving into a cell another agent just vacated is allowed.
An agent rests forever in the last cell of its path, so that cell is
reserved for every later timestep.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

from mapd.grid import Cell, GridMap, HeuristicTable

INF = float("inf")


class PlanningError(RuntimeError):
    """Planner failure that the protocol cannot recover from."""


class Path:
    """Timestep-indexed location sequence starting at ``start_t``.

    Consecutive cells are identical or adjacent.  After the last cell the
    agent rests there forever; ``loc_at`` reflects that.
    """

    __slots__ = ("start_t", "cells", "pickup_t")

    def __init__(self, start_t: int, cells: tuple[Cell, ...], pickup_t: int | None = None):
        if not cells:
            raise ValueError("a path needs at least one cell")
        self.start_t = start_t
        self.cells = tuple(cells)
        self.pickup_t = pickup_t  # first visit to the pickup, set by plan_path1

    @property
    def end_t(self) -> int:
        return self.start_t + len(self.cells) - 1

    @property
    def end_cell(self) -> Cell:
        return self.cells[-1]

    @property
    def cost(self) -> int:
        """Timesteps until arrival at the final cell."""
        return len(self.cells) - 1

    def loc_at(self, t: int) -> Cell:
        if t < self.start_t:
            raise ValueError(f"path starts at {self.start_t}, queried at {t}")
        return self.cells[min(t - self.start_t, len(self.cells) - 1)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Path)
            and self.start_t == other.start_t
            and self.cells == other.cells
            and self.pickup_t == other.pickup_t
        )

    def __repr__(self) -> str:
        return f"Path(t={self.start_t}, cells={list(self.cells)})"


class ReservationTable:
    """Vertex/edge occupancy index implied by a set of committed paths,
    including the infinite terminal rest at each path's last cell."""

    def __init__(self) -> None:
        self._vertex: dict[tuple[Cell, int], int] = {}
        self._edge: dict[tuple[Cell, Cell, int], int] = {}
        self._rest: dict[Cell, tuple[int, int]] = {}  # cell -> (agent, rest start)
        self._last_busy: dict[Cell, int] = {}  # latest finite vertex reservation per cell
        self.total_len = 0
        self.max_time = 0

    def add_path(self, agent: int, path: Path) -> None:
        t = path.start_t
        prev: Cell | None = None
        for cell in path.cells:
            self._vertex[(cell, t)] = agent
            if self._last_busy.get(cell, -1) < t:
                self._last_busy[cell] = t
            if prev is not None:
                self._edge[(prev, cell, t - 1)] = agent
            prev = cell
            t += 1
        end = path.end_cell
        existing = self._rest.get(end)
        if existing is None or path.end_t < existing[1]:
            self._rest[end] = (agent, path.end_t)
        self.total_len += len(path.cells)
        self.max_time = max(self.max_time, path.end_t)

    def vertex_free(self, cell: Cell, t: int) -> bool:
        if (cell, t) in self._vertex:
            return False
        rest = self._rest.get(cell)
        return rest is None or t < rest[1]

    def edge_free(self, frm: Cell, to: Cell, t: int) -> bool:
        """False iff some agent traverses ``to -> frm`` during timestep t
        (the opposite-direction swap)."""
        return (to, frm, t) not in self._edge

    def goal_safe(self, cell: Cell, t: int) -> bool:
        """True iff resting at ``cell`` from timestep t onward can never
        collide: no terminal rest there and no reservation at any t' >= t."""
        if cell in self._rest:
            return False
        return self._last_busy.get(cell, -1) < t

    def occupant(self, cell: Cell, t: int) -> int | None:
        agent = self._vertex.get((cell, t))
        if agent is not None:
            return agent
        rest = self._rest.get(cell)
        if rest is not None and t >= rest[1]:
            return rest[0]
        return None


def build_reservations(paths: dict[int, Path], exclude: int | None = None) -> ReservationTable:
    """Reservation table over all paths except ``exclude``'s own."""
    rt = ReservationTable()
    for agent, path in paths.items():
        if agent != exclude:
            rt.add_path(agent, path)
    return rt


@dataclass
class SearchConstraints:
    """Extra forbiddances used only by the CBS low-level search."""

    vertices: set[tuple[Cell, int]] = field(default_factory=set)
    edges: set[tuple[Cell, Cell, int]] = field(default_factory=set)

    def latest_vertex_t(self, cell: Cell) -> int:
        return max((t for c, t in self.vertices if c == cell), default=-1)

    def max_time(self) -> int:
        times = [t for _, t in self.vertices] + [t for _, _, t in self.edges]
        return max(times, default=0)


def default_horizon(grid: GridMap, rt: ReservationTable, extra: int = 0) -> int:
    """Search-depth cap guaranteeing termination: enough steps to outwait
    every reservation and still cross the map."""
    n = len(grid.passable)
    return n + rt.total_len + n + extra


def _reconstruct(parents, state) -> list[Cell]:
    cells = []
    while state is not None:
        cells.append(state[0])
        state = parents[state]
    cells.reverse()
    return cells


def plan_path1(grid: GridMap, h: HeuristicTable, start: Cell, start_t: int,
               pickup: Cell, delivery: Cell, rt: ReservationTable,
               horizon: int | None = None) -> Path | None:
    """Cost-minimal collision-free path start -> pickup -> delivery.

    Single A* over (cell, timestep, stage) states, stage flipping at the
    first visit to the pickup, so the two legs are jointly optimal.  The
    delivery is accepted only if the terminal rest there is safe against
    every other reservation.
    """
    if horizon is None:
        horizon = default_horizon(grid, rt)
    h_pick = h.table_for(pickup)
    h_del = h.table_for(delivery)
    pivot = h_pick.get(delivery)
    if pivot is None or start not in (h_pick if start != pickup else h_del):
        return None

    def h_val(cell: Cell, stage: int) -> float:
        if stage == 1:
            return h_del.get(cell, INF)
        hp = h_pick.get(cell, INF)
        return hp + pivot

    start_stage = 1 if start == pickup else 0
    counter = itertools.count()
    start_state = (start, start_t, start_stage)
    open_heap = [(h_val(start, start_stage), 0, start, 1 - start_stage, next(counter), start_state)]
    parents: dict[tuple, tuple | None] = {start_state: None}
    closed: set[tuple] = set()
    while open_heap:
        f, neg_g, _, _, _, state = heapq.heappop(open_heap)
        if state in closed:
            continue
        closed.add(state)
        cell, t, stage = state
        if stage == 1 and cell == delivery and rt.goal_safe(cell, t):
            cells = _reconstruct(parents, state)
            pickup_t = start_t + cells.index(pickup)
            return Path(start_t, tuple(cells), pickup_t=pickup_t)
        g = t - start_t
        if g >= horizon:
            continue
        for nxt in grid.neighbors(cell) + (cell,):
            if not rt.vertex_free(nxt, t + 1):
                continue
            if nxt != cell and not rt.edge_free(cell, nxt, t):
                continue
            nxt_stage = 1 if (stage == 1 or nxt == pickup) else 0
            nxt_state = (nxt, t + 1, nxt_stage)
            if nxt_state in closed or nxt_state in parents:
                continue
            hv = h_val(nxt, nxt_stage)
            if hv == INF:
                continue
            parents[nxt_state] = state
            heapq.heappush(open_heap, (g + 1 + hv, -(g + 1), nxt, 1 - nxt_stage, next(counter), nxt_state))
    return None


def plan_path2(grid: GridMap, start: Cell, start_t: int, candidates: set[Cell],
               rt: ReservationTable, horizon: int | None = None) -> Path | None:
    """Cost-minimal collision-free path to the cheapest reachable candidate
    endpoint (uniform-cost search; terminal rest must be safe)."""
    if not candidates:
        return None
    if horizon is None:
        horizon = default_horizon(grid, rt)
    counter = itertools.count()
    start_state = (start, start_t)
    open_heap = [(0, start, next(counter), start_state)]
    parents: dict[tuple, tuple | None] = {start_state: None}
    closed: set[tuple] = set()
    while open_heap:
        g, _, _, state = heapq.heappop(open_heap)
        if state in closed:
            continue
        closed.add(state)
        cell, t = state
        if cell in candidates and rt.goal_safe(cell, t):
            return Path(start_t, tuple(_reconstruct(parents, state)))
        if g >= horizon:
            continue
        for nxt in grid.neighbors(cell) + (cell,):
            if not rt.vertex_free(nxt, t + 1):
                continue
            if nxt != cell and not rt.edge_free(cell, nxt, t):
                continue
            nxt_state = (nxt, t + 1)
            if nxt_state in closed or nxt_state in parents:
                continue
            parents[nxt_state] = state
            heapq.heappush(open_heap, (g + 1, nxt, next(counter), nxt_state))
    return None


def plan_constrained(grid: GridMap, h: HeuristicTable, start: Cell, start_t: int,
                     goal: Cell, rt: ReservationTable, constraints: SearchConstraints,
                     horizon: int | None = None) -> Path | None:
    """CBS low-level search: like plan_path2 with a single goal, an h-table
    guide, and per-agent constraints.  The goal is accepted only after the
    last vertex constraint on it has expired."""
    if horizon is None:
        horizon = default_horizon(grid, rt, extra=max(0, constraints.max_time() - start_t))
    h_goal = h.table_for(goal)
    if start not in h_goal:
        return None
    goal_clear_t = constraints.latest_vertex_t(goal)
    counter = itertools.count()
    start_state = (start, start_t)
    open_heap = [(h_goal[start], 0, start, next(counter), start_state)]
    parents: dict[tuple, tuple | None] = {start_state: None}
    closed: set[tuple] = set()
    while open_heap:
        f, neg_g, _, _, state = heapq.heappop(open_heap)
        if state in closed:
            continue
        closed.add(state)
        cell, t = state
        if cell == goal and t > goal_clear_t and rt.goal_safe(cell, t):
            return Path(start_t, tuple(_reconstruct(parents, state)))
        g = t - start_t
        if g >= horizon:
            continue
        for nxt in grid.neighbors(cell) + (cell,):
            if (nxt, t + 1) in constraints.vertices:
                continue
            if not rt.vertex_free(nxt, t + 1):
                continue
            if nxt != cell:
                if (cell, nxt, t) in constraints.edges:
                    continue
                if not rt.edge_free(cell, nxt, t):
                    continue
            nxt_state = (nxt, t + 1)
            if nxt_state in closed or nxt_state in parents:
                continue
            hv = h_goal.get(nxt, INF)
            if hv == INF:
                continue
            parents[nxt_state] = state
            heapq.heappush(open_heap, (g + 1 + hv, -(g + 1), nxt, next(counter), nxt_state))
    return None


def paths_conflict(a: Path, b: Path) -> tuple | None:
    """First collision between two paths under the two collision rules,
    terminal rests included.  Returns (kind, t, details) or None, scanning
    timesteps in order with vertex conflicts before edge conflicts.

    A vertex hit is ("vertex", t, cell); an edge hit is ("edge", t, (u, v))
    where path ``a`` moves u -> v during timestep t while ``b`` moves v -> u.
    """
    t0 = max(a.start_t, b.start_t)
    t1 = max(a.end_t, b.end_t) + 1
    for t in range(t0, t1 + 1):
        pa, pb = a.loc_at(t), b.loc_at(t)
        if pa == pb:
            return ("vertex", t, pa)
        na, nb = a.loc_at(t + 1), b.loc_at(t + 1)
        if na == pb and nb == pa and na != pa:
            return ("edge", t, (pa, na))
    return None
