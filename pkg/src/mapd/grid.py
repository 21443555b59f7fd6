"""Grid environment: map parsing, heuristics, and the well-formedness test."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

Cell = tuple[int, int]

LEGEND = {".", "@", "e", "r"}


class MapParseError(ValueError):
    """Raised when a map file does not conform to the grammar."""


class GridMap:
    """4-neighbor grid as an undirected graph over passable cells.

    Task endpoints ('e') are possible pickup/delivery locations; non-task
    endpoints ('r') are agent starts and parking spots.  Both endpoint sets
    are subsets of the passable cells and are disjoint by construction.
    Immutable after construction, safe for shared reads.
    """

    def __init__(self, rows: int, cols: int, blocked: set[Cell],
                 task_endpoints: set[Cell], nontask_endpoints: set[Cell]):
        self.rows = rows
        self.cols = cols
        self.blocked = frozenset(blocked)
        self.task_endpoints = frozenset(task_endpoints)
        self.nontask_endpoints = frozenset(nontask_endpoints)
        self.passable = frozenset(
            (r, c) for r in range(rows) for c in range(cols)
            if (r, c) not in self.blocked
        )
        if self.task_endpoints & self.nontask_endpoints:
            raise ValueError("task and non-task endpoints overlap")
        if not self.task_endpoints <= self.passable or not self.nontask_endpoints <= self.passable:
            raise ValueError("endpoints must be passable cells")
        self._neighbors: dict[Cell, tuple[Cell, ...]] = {}
        for cell in self.passable:
            r, c = cell
            self._neighbors[cell] = tuple(
                n for n in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1))
                if n in self.passable
            )

    @property
    def endpoints(self) -> frozenset[Cell]:
        return self.task_endpoints | self.nontask_endpoints

    def is_passable(self, cell: Cell) -> bool:
        return cell in self.passable

    def neighbors(self, cell: Cell) -> tuple[Cell, ...]:
        """Orthogonally adjacent passable cells; never includes ``cell``."""
        if cell not in self.passable:
            raise ValueError(f"cell {cell} is blocked or out of bounds")
        return self._neighbors[cell]

    def n_edges(self) -> int:
        return sum(len(v) for v in self._neighbors.values()) // 2

    def bfs_from(self, source: Cell) -> dict[Cell, int]:
        """Unconstrained shortest-path lengths from ``source`` to every
        reachable passable cell."""
        dist = {source: 0}
        queue = deque([source])
        while queue:
            cur = queue.popleft()
            d = dist[cur] + 1
            for nxt in self._neighbors[cur]:
                if nxt not in dist:
                    dist[nxt] = d
                    queue.append(nxt)
        return dist


def parse_map(text: str) -> GridMap:
    """Parse map-file content.

    Format: a header line ``rows cols``, then ``rows`` lines of exactly
    ``cols`` characters from {'.', '@', 'e', 'r'}.
    """
    lines = text.splitlines()
    if not lines:
        raise MapParseError("empty map file (line 1)")
    header = lines[0].split()
    if len(header) != 2:
        raise MapParseError("line 1: header must be 'rows cols'")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise MapParseError("line 1: header must contain two integers") from None
    if rows <= 0 or cols <= 0:
        raise MapParseError("line 1: rows and cols must be positive")
    if len(lines) < rows + 1:
        raise MapParseError(f"expected {rows} grid lines, found {len(lines) - 1}")
    blocked: set[Cell] = set()
    task_eps: set[Cell] = set()
    nontask_eps: set[Cell] = set()
    for r in range(rows):
        line = lines[1 + r]
        if len(line) != cols:
            raise MapParseError(f"line {r + 2}: expected {cols} characters, found {len(line)}")
        for c, ch in enumerate(line):
            if ch not in LEGEND:
                raise MapParseError(f"line {r + 2}, column {c + 1}: unknown character {ch!r}")
            if ch == "@":
                blocked.add((r, c))
            elif ch == "e":
                task_eps.add((r, c))
            elif ch == "r":
                nontask_eps.add((r, c))
    return GridMap(rows, cols, blocked, task_eps, nontask_eps)


def serialize_map(grid: GridMap) -> str:
    """Inverse of :func:`parse_map`; round-trips byte-identically."""
    out = [f"{grid.rows} {grid.cols}"]
    for r in range(grid.rows):
        row_chars = []
        for c in range(grid.cols):
            cell = (r, c)
            if cell in grid.blocked:
                row_chars.append("@")
            elif cell in grid.task_endpoints:
                row_chars.append("e")
            elif cell in grid.nontask_endpoints:
                row_chars.append("r")
            else:
                row_chars.append(".")
        out.append("".join(row_chars))
    return "\n".join(out) + "\n"


class HeuristicTable:
    """Exact unconstrained distances from every passable cell to every
    endpoint, used as admissible h-values by all planners."""

    def __init__(self, grid: GridMap):
        self._dist: dict[Cell, dict[Cell, int]] = {}
        for endpoint in grid.endpoints:
            self._dist[endpoint] = grid.bfs_from(endpoint)
        self.max_finite = max(
            (d for table in self._dist.values() for d in table.values()),
            default=0,
        )

    def dist(self, cell: Cell, endpoint: Cell) -> float:
        """Distance in timesteps from ``cell`` to ``endpoint``; inf if
        unreachable or ``endpoint`` is not an endpoint."""
        table = self._dist.get(endpoint)
        if table is None:
            raise KeyError(f"{endpoint} is not an endpoint")
        return table.get(cell, float("inf"))

    def table_for(self, endpoint: Cell) -> dict[Cell, int]:
        return self._dist[endpoint]


def precompute_heuristics(grid: GridMap) -> HeuristicTable:
    """Breadth-first search outward from every endpoint."""
    return HeuristicTable(grid)


@dataclass
class MapdInstance:
    """A map plus agent start cells.  Starts must be pairwise distinct
    endpoints (a start on a task endpoint is tolerated so that degenerate
    instances can still be checked for well-formedness)."""

    grid: GridMap
    agent_starts: list[Cell]

    def __post_init__(self) -> None:
        if len(set(self.agent_starts)) != len(self.agent_starts):
            raise ValueError("agent starts must be pairwise distinct")
        for s in self.agent_starts:
            if s not in self.grid.passable:
                raise ValueError(f"agent start {s} is not passable")
            if s not in self.grid.endpoints:
                raise ValueError(f"agent start {s} is not an endpoint")

    @property
    def n_agents(self) -> int:
        return len(self.agent_starts)


@dataclass
class Violation:
    condition: str  # 'a', 'b' or 'c'
    message: str
    witness: tuple = ()

    def __str__(self) -> str:
        return f"condition ({self.condition}): {self.message}"


@dataclass
class WellFormedness:
    ok: bool
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _connected_avoiding(grid: GridMap, u: Cell, w: Cell, removed: frozenset[Cell]) -> bool:
    """True iff u reaches w in the passable subgraph minus ``removed``."""
    if u == w:
        return True
    seen = {u}
    queue = deque([u])
    while queue:
        cur = queue.popleft()
        for nxt in grid.neighbors(cur):
            if nxt in removed or nxt in seen:
                continue
            if nxt == w:
                return True
            seen.add(nxt)
            queue.append(nxt)
    return False


def check_well_formed(instance: MapdInstance, tasks) -> WellFormedness:
    """Classify an instance against the three well-formedness conditions.

    (a) finitely many tasks; (b) at least as many non-task endpoints as
    agents; (c) every endpoint pair is connected when all other endpoints
    are removed.  Unverifiable inputs produce violations, not errors.
    """
    grid = instance.grid
    violations: list[Violation] = []

    try:
        n_tasks = len(tasks)
    except TypeError:
        n_tasks = None
    if n_tasks is None:
        violations.append(Violation("a", "task stream has no finite length"))

    n_agents = instance.n_agents
    n_parking = len(grid.nontask_endpoints)
    if n_parking < n_agents:
        violations.append(Violation(
            "b",
            f"{n_agents} agents but only {n_parking} non-task endpoint(s)",
            (n_agents, n_parking),
        ))

    endpoints = sorted(grid.endpoints)
    for i, u in enumerate(endpoints):
        for w in endpoints[i + 1:]:
            removed = frozenset(e for e in endpoints if e != u and e != w)
            if not _connected_avoiding(grid, u, w, removed):
                violations.append(Violation(
                    "c",
                    f"every path between endpoints {u} and {w} traverses another endpoint",
                    (u, w),
                ))

    return WellFormedness(ok=not violations, violations=violations)
