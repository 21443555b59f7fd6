"""Discrete-time main loop, metrics collection, trajectory recording, and
collision auditing for all three solvers."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from mapd.central import CentralState, central_step
from mapd.grid import Cell, GridMap, HeuristicTable, MapdInstance, precompute_heuristics
from mapd.pathing import PlanningError
from mapd.tasks import Task, TaskState, release_due
from mapd.token import Token, request_order, tp_token_turn, tpts_get_task

ALGORITHMS = ("tp", "tpts", "central")


class SimulationError(RuntimeError):
    """Run-level failure: nontermination cap, solver failure, or a broken
    protocol invariant."""


@dataclass
class SimConfig:
    algorithm: str = "tp"
    window: int = 100
    cap: int | None = None          # safety cap on timesteps; derived when None
    free_request: bool = False      # also let moving free agents request the token
    audit_every_turn: bool = False  # re-audit all token paths after every turn
    node_cap: int = 50_000          # CBS expansion cap (central only)
    memoize: bool = False           # skip unchanged central replans

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")


@dataclass
class TaskRecord:
    id: int
    release: int
    pickup_time: int
    finish_time: int

    @property
    def service_time(self) -> int:
        return self.finish_time - self.release


@dataclass
class Metrics:
    tasks: list[TaskRecord]
    makespan: int
    runtime_per_timestep: list[float]  # decision-phase seconds, by timestep
    window: int

    @property
    def avg_service_time(self) -> float:
        if not self.tasks:
            return 0.0
        return sum(rec.service_time for rec in self.tasks) / len(self.tasks)

    @property
    def avg_runtime_ms(self) -> float:
        if not self.runtime_per_timestep:
            return 0.0
        return 1000.0 * sum(self.runtime_per_timestep) / len(self.runtime_per_timestep)


@dataclass
class Trajectory:
    agents: list[int]
    frames: list[tuple[Cell, ...]] = field(default_factory=list)

    def loc(self, agent: int, t: int) -> Cell:
        return self.frames[t][self.agents.index(agent)]

    @property
    def horizon(self) -> int:
        return len(self.frames) - 1


def _default_cap(h: HeuristicTable, stream: list[Task]) -> int:
    diameter = max(1, 2 * h.max_finite)
    last_release = max((task.release for task in stream), default=0)
    return 20 * (diameter * max(1, len(stream)) + last_release)


def _fresh_tasks(stream: list[Task]) -> list[Task]:
    return [Task(id=t.id, pickup=t.pickup, delivery=t.delivery, release=t.release)
            for t in stream]


def run(instance: MapdInstance, stream: list[Task], config: SimConfig,
        events: list | None = None,
        h: HeuristicTable | None = None) -> tuple[Metrics, Trajectory]:
    """Simulate one full lifelong run; returns metrics and the executed
    trajectory.  The input stream is not mutated.

    The loop per timestep: release due tasks, run the decision phase (token
    turns or a centralized step), then advance every agent one step.  It
    terminates once every task is finished, or raises
    :class:`SimulationError` at the safety cap.
    """
    grid = instance.grid
    if h is None:
        h = precompute_heuristics(grid)
    stream = sorted(_fresh_tasks(stream), key=lambda task: (task.release, task.id))
    for task in stream:
        if task.pickup not in grid.task_endpoints or task.delivery not in grid.task_endpoints:
            raise ValueError(f"task {task.id} endpoints must be task endpoints")
    tasks = {task.id: task for task in stream}
    cap = config.cap if config.cap is not None else _default_cap(h, stream)

    agents = list(range(instance.n_agents))
    trajectory = Trajectory(agents=agents)
    trajectory.frames.append(tuple(instance.agent_starts))
    runtimes: list[float] = []

    try:
        if config.algorithm in ("tp", "tpts"):
            _run_token(grid, h, instance, stream, tasks, config, cap,
                       trajectory, runtimes, events)
        else:
            _run_central(grid, h, instance, stream, tasks, config, cap,
                         trajectory, runtimes, events)
    except PlanningError as exc:
        raise SimulationError(str(exc)) from exc

    records = [
        TaskRecord(id=task.id, release=task.release,
                   pickup_time=task.pickup_time, finish_time=task.finish_time)
        for task in stream
    ]
    makespan = max((rec.finish_time for rec in records), default=0)
    metrics = Metrics(tasks=records, makespan=makespan,
                      runtime_per_timestep=runtimes, window=config.window)
    return metrics, trajectory


def _run_token(grid: GridMap, h: HeuristicTable, instance: MapdInstance,
               stream: list[Task], tasks: dict[int, Task], config: SimConfig,
               cap: int, trajectory: Trajectory, runtimes: list[float],
               events: list | None) -> None:
    token = Token({i: cell for i, cell in enumerate(instance.agent_starts)})
    positions = {i: cell for i, cell in enumerate(instance.agent_starts)}
    total = len(stream)
    finished = 0
    t = 0
    while finished < total:
        release_due(stream, t, token.taskset)
        tic = time.perf_counter()
        for agent in request_order(token, tasks, t, config.free_request):
            if config.algorithm == "tp":
                tp_token_turn(grid, h, tasks, token, positions, agent, t, events)
            else:
                if not tpts_get_task(grid, h, tasks, token, positions, agent, t, events):
                    raise SimulationError(
                        f"t={t}: agent {agent} failed to find a path to an endpoint")
            if config.audit_every_turn:
                bad = token.audit()
                if bad:
                    raise SimulationError(f"t={t}: token paths collide: {bad}")
        runtimes.append(time.perf_counter() - tic)
        t += 1
        for agent in token.paths:
            positions[agent] = token.paths[agent].loc_at(t)
        trajectory.frames.append(tuple(positions[a] for a in trajectory.agents))
        for agent in sorted(token.paths):
            tid = token.agent_task.get(agent)
            if tid is None:
                continue
            task = tasks[tid]
            path = token.paths[agent]
            if task.state is TaskState.PENDING and t >= path.pickup_t:
                task.start_execution(agent, path.pickup_t)
                if config.algorithm == "tpts":
                    token.taskset.remove(tid)
            if task.state is TaskState.EXECUTING and t >= path.end_t:
                task.finish(path.end_t)
                finished += 1
                token.unassign_agent(agent)
        if t > cap:
            raise SimulationError(
                f"safety cap {cap} exceeded with {total - finished} unfinished tasks")


def _run_central(grid: GridMap, h: HeuristicTable, instance: MapdInstance,
                 stream: list[Task], tasks: dict[int, Task], config: SimConfig,
                 cap: int, trajectory: Trajectory, runtimes: list[float],
                 events: list | None) -> None:
    from mapd.tasks import TaskSet

    state = CentralState.create(grid, h, list(instance.agent_starts),
                                node_cap=config.node_cap, memoize=config.memoize)
    taskset = TaskSet()
    total = len(stream)
    finished = 0
    t = 0
    while finished < total:
        release_due(stream, t, taskset)
        tic = time.perf_counter()
        central_step(state, tasks, taskset, t, events)
        runtimes.append(time.perf_counter() - tic)
        t += 1
        trajectory.frames.append(
            tuple(state.agents[a].path.loc_at(t) for a in trajectory.agents))
        for agent in sorted(state.agents):
            st = state.agents[agent]
            if st.occupied and t >= st.path.end_t:
                tasks[st.task].finish(st.path.end_t)
                finished += 1
                st.task = None
        if t > cap:
            raise SimulationError(
                f"safety cap {cap} exceeded with {total - finished} unfinished tasks")


def audit_collisions(trajectory: Trajectory) -> list[str]:
    """Exhaustive check of both collision rules over every timestep and
    agent pair.  Returns human-readable violations; empty on a clean run."""
    agents = trajectory.agents
    violations = []
    for t, frame in enumerate(trajectory.frames):
        seen: dict[Cell, int] = {}
        for idx, cell in enumerate(frame):
            if cell in seen:
                violations.append(
                    f"vertex: agents {agents[seen[cell]]} and {agents[idx]} both at {cell} at t={t}")
            else:
                seen[cell] = idx
        if t + 1 < len(trajectory.frames):
            nxt = trajectory.frames[t + 1]
            for i in range(len(agents)):
                for j in range(i + 1, len(agents)):
                    if frame[i] == nxt[j] and frame[j] == nxt[i] and frame[i] != frame[j]:
                        violations.append(
                            f"edge: agents {agents[i]} and {agents[j]} swap "
                            f"{frame[i]}<->{frame[j]} at t={t}")
    return violations


def validate_motion(trajectory: Trajectory, grid: GridMap) -> list[str]:
    """Each agent stays put or moves to an adjacent passable cell."""
    problems = []
    for t in range(len(trajectory.frames) - 1):
        for idx, agent in enumerate(trajectory.agents):
            a = trajectory.frames[t][idx]
            b = trajectory.frames[t + 1][idx]
            if a != b and b not in grid.neighbors(a):
                problems.append(f"agent {agent} teleports {a} -> {b} at t={t}")
    return problems


def window_counts(metrics: Metrics, window: int | None = None) -> list[tuple[int, int, int]]:
    """Per-timestep counts of tasks released and finished inside the sliding
    window [t - window + 1, t], from 0 through the makespan."""
    if window is None:
        window = metrics.window
    horizon = metrics.makespan
    added = [0] * (horizon + 1)
    executed = [0] * (horizon + 1)
    for rec in metrics.tasks:
        if rec.release <= horizon:
            added[rec.release] += 1
        executed[rec.finish_time] += 1
    out = []
    added_run = 0
    executed_run = 0
    for t in range(horizon + 1):
        added_run += added[t]
        executed_run += executed[t]
        if t - window >= 0:
            added_run -= added[t - window]
            executed_run -= executed[t - window]
        out.append((t, added_run, executed_run))
    return out


TASKS_CSV_HEADER = "task,release,pickup_time,finish_time,service_time"
SUMMARY_CSV_HEADER = "algorithm,agents,frequency,seed,makespan,avg_service_time,avg_runtime_ms"
WINDOW_CSV_HEADER = "t,added,executed"


def tasks_csv(metrics: Metrics) -> str:
    lines = [TASKS_CSV_HEADER]
    for rec in sorted(metrics.tasks, key=lambda r: r.id):
        lines.append(f"{rec.id},{rec.release},{rec.pickup_time},{rec.finish_time},{rec.service_time}")
    return "\n".join(lines) + "\n"


def summary_row(algorithm: str, agents: int, frequency: str, seed: int,
                metrics: Metrics) -> str:
    return (f"{algorithm},{agents},{frequency},{seed},{metrics.makespan},"
            f"{metrics.avg_service_time:.2f},{metrics.avg_runtime_ms:.3f}")


def summary_csv(rows: list[str]) -> str:
    return "\n".join([SUMMARY_CSV_HEADER] + rows) + "\n"


def window_csv(metrics: Metrics, window: int | None = None) -> str:
    lines = [WINDOW_CSV_HEADER]
    for t, added, executed in window_counts(metrics, window):
        lines.append(f"{t},{added},{executed}")
    return "\n".join(lines) + "\n"
