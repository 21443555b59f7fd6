"""The shared token and the two decoupled solvers built on it.

The token holds one path per agent, the shared task set, and the agent/task
assignments.  Exactly one agent holds it at a time; a whole timestep's worth
of token turns runs sequentially, then all agents move one step.
"""

from __future__ import annotations

from mapd.grid import Cell, GridMap, HeuristicTable
from mapd.pathing import (
    Path,
    PlanningError,
    build_reservations,
    paths_conflict,
    plan_path1,
    plan_path2,
)
from mapd.tasks import Task, TaskSet, TaskState


class TokenSnapshot:
    """Deep enough copy of the token to restore it bit-identically: paths
    are immutable, so the dicts themselves are copied."""

    def __init__(self, token: "Token"):
        self.paths = dict(token.paths)
        self.taskset = token.taskset.copy()
        self.agent_task = dict(token.agent_task)
        self.task_agent = dict(token.task_agent)


class Token:
    def __init__(self, starts: dict[int, Cell], start_t: int = 0):
        self.paths: dict[int, Path] = {
            agent: Path(start_t, (cell,)) for agent, cell in starts.items()
        }
        self.n_agents = len(starts)
        self.taskset = TaskSet()
        self.agent_task: dict[int, int] = {}
        self.task_agent: dict[int, int] = {}

    def assign(self, agent: int, task_id: int) -> None:
        """Bind agent and task, releasing the agent's old task and the
        task's old agent (the steal case) in one step."""
        old_task = self.agent_task.get(agent)
        if old_task is not None:
            del self.task_agent[old_task]
        old_agent = self.task_agent.get(task_id)
        if old_agent is not None:
            del self.agent_task[old_agent]
        self.agent_task[agent] = task_id
        self.task_agent[task_id] = agent

    def unassign_task(self, task_id: int) -> int | None:
        agent = self.task_agent.pop(task_id, None)
        if agent is not None:
            del self.agent_task[agent]
        return agent

    def unassign_agent(self, agent: int) -> None:
        task_id = self.agent_task.pop(agent, None)
        if task_id is not None:
            del self.task_agent[task_id]

    def snapshot(self) -> TokenSnapshot:
        return TokenSnapshot(self)

    def restore(self, snap: TokenSnapshot) -> None:
        self.paths = dict(snap.paths)
        self.taskset.restore_from(snap.taskset)
        self.agent_task = dict(snap.agent_task)
        self.task_agent = dict(snap.task_agent)

    def equals(self, snap: TokenSnapshot) -> bool:
        return (
            self.paths == snap.paths
            and self.taskset == TaskSet(snap.taskset)
            and self.agent_task == snap.agent_task
            and self.task_agent == snap.task_agent
        )

    def audit(self) -> list[tuple]:
        """All pairwise path collisions, terminal rests included."""
        agents = sorted(self.paths)
        bad = []
        for i, a in enumerate(agents):
            for b in agents[i + 1:]:
                hit = paths_conflict(self.paths[a], self.paths[b])
                if hit is not None:
                    bad.append((a, b) + hit)
        return bad


def _log(log, t, agent, action, task=None, path_cost=None) -> None:
    if log is not None:
        log.append({"t": t, "agent": agent, "action": action,
                    "task": task, "path_cost": path_cost})


def request_order(token: Token, tasks: dict[int, Task], t: int,
                  free_request: bool = False) -> list[int]:
    """Agents requesting the token this timestep, in ascending agent id.

    An agent requests when it sits at the end of its token path (with
    ``free_request``, also while moving, as long as it is not executing a
    task) and there is something a token turn could do: an unassigned task
    in the set, or the agent is parked on a pending delivery location and
    must move out of the way.
    """
    unassigned = any(token.task_agent.get(tid) is None for tid in token.taskset)
    deliveries = {tasks[tid].delivery for tid in token.taskset}
    order = []
    for agent in sorted(token.paths):
        path = token.paths[agent]
        if t < path.end_t:
            if not free_request:
                continue
            tid = token.agent_task.get(agent)
            if tid is not None and tasks[tid].state is TaskState.EXECUTING:
                continue
        if unassigned or path.loc_at(t) in deliveries:
            order.append(agent)
    return order


def _candidate_tasks(token: Token, tasks: dict[int, Task], agent: int) -> list[int]:
    """Task ids whose pickup and delivery are not the end of any path other
    than the requester's own and the current assignee's."""
    ends: list[tuple[int, Cell]] = [(a, p.end_cell) for a, p in token.paths.items()]
    out = []
    for tid in token.taskset:
        task = tasks[tid]
        assignee = token.task_agent.get(tid)
        for other, end in ends:
            if other != agent and other != assignee and end in (task.pickup, task.delivery):
                break
        else:
            out.append(tid)
    return out


def _path2_candidates(grid: GridMap, tasks: dict[int, Task], token: Token,
                      agent: int) -> set[Cell]:
    deliveries = {tasks[tid].delivery for tid in token.taskset}
    other_ends = {p.end_cell for a, p in token.paths.items() if a != agent}
    return set(grid.endpoints) - deliveries - other_ends


def _resting_allowed(tasks: dict[int, Task], token: Token, agent: int,
                     loc: Cell, t: int) -> bool:
    """Resting in place is legal when no pending delivery sits here and no
    other committed path ever touches this cell from ``t`` on.  The second
    clause matters after a steal: the thief planned with the victim's path
    removed, so its path may cross the victim's current cell later."""
    if any(tasks[tid].delivery == loc for tid in token.taskset):
        return False
    return build_reservations(token.paths, exclude=agent).goal_safe(loc, t)


def tp_token_turn(grid: GridMap, h: HeuristicTable, tasks: dict[int, Task],
                  token: Token, positions: dict[int, Cell], agent: int, t: int,
                  log: list | None = None) -> None:
    """One token turn of the plain token-passing solver.

    Assign the nearest available task and plan through pickup to delivery;
    otherwise rest in place, unless resting would squat on a pending
    delivery, in which case move to a safe endpoint.
    """
    loc = positions[agent]
    mid_path = t < token.paths[agent].end_t
    cands = _candidate_tasks(token, tasks, agent)
    cands = [tid for tid in cands if token.task_agent.get(tid) is None]
    if cands:
        best = min(cands, key=lambda tid: (h.dist(loc, tasks[tid].pickup), tid))
        old = token.agent_task.get(agent)
        if old is not None:
            # re-request variant: switch only for a strictly closer pickup
            if h.dist(loc, tasks[best].pickup) >= h.dist(loc, tasks[old].pickup):
                return
        rt = build_reservations(token.paths, exclude=agent)
        task = tasks[best]
        path = plan_path1(grid, h, loc, t, task.pickup, task.delivery, rt)
        if path is None:
            if mid_path:
                return  # keep the current path; not at an endpoint
            raise PlanningError(
                f"t={t}: agent {agent} cannot plan to task {best}; instance is not well-formed"
            )
        if old is not None:
            token.unassign_agent(agent)
            token.taskset.add(old)
        token.assign(agent, best)
        token.taskset.remove(best)
        token.paths[agent] = path
        _log(log, t, agent, "assign", best, path.cost)
        return
    if mid_path:
        return
    if _resting_allowed(tasks, token, agent, loc, t):
        token.paths[agent] = Path(t, (loc,))
        _log(log, t, agent, "rest")
        return
    rt = build_reservations(token.paths, exclude=agent)
    path = plan_path2(grid, loc, t, _path2_candidates(grid, tasks, token, agent), rt)
    if path is None:
        raise PlanningError(
            f"t={t}: agent {agent} cannot move off delivery {loc}; instance is not well-formed"
        )
    token.paths[agent] = path
    _log(log, t, agent, "park", None, path.cost)


def tpts_get_task(grid: GridMap, h: HeuristicTable, tasks: dict[int, Task],
                  token: Token, positions: dict[int, Cell], agent: int, t: int,
                  log: list | None = None, depth: int = 0) -> bool:
    """One token turn of the task-swapping solver.

    Walks candidate tasks by increasing pickup distance.  Unassigned tasks
    are taken directly.  A task assigned to another agent may be stolen if
    this agent would reach the pickup strictly earlier; the token is
    snapshotted, the victim gets the token to find itself new work, and on
    any failure the snapshot is restored exactly.
    """
    cap = max(1, len(token.taskset)) * token.n_agents
    if depth > cap:
        raise PlanningError(f"t={t}: task-swap recursion exceeded {cap} steps")
    loc = positions[agent]
    order = sorted(
        _candidate_tasks(token, tasks, agent),
        key=lambda tid: (h.dist(loc, tasks[tid].pickup), tid),
    )
    for tid in order:
        task = tasks[tid]
        victim = token.task_agent.get(tid)
        if victim is None:
            rt = build_reservations(token.paths, exclude=agent)
            path = plan_path1(grid, h, loc, t, task.pickup, task.delivery, rt)
            if path is None:
                continue  # reachable only for turns taken away from an endpoint
            token.assign(agent, tid)
            token.paths[agent] = path
            _log(log, t, agent, "assign", tid, path.cost)
            return True
        if victim == agent:
            break  # keeping the current assignment beats any farther task
        snap = token.snapshot()
        victim_arrival = token.paths[victim].pickup_t
        token.assign(agent, tid)
        del token.paths[victim]
        rt = build_reservations(token.paths, exclude=agent)
        path = plan_path1(grid, h, loc, t, task.pickup, task.delivery, rt)
        if path is not None and victim_arrival is not None and path.pickup_t < victim_arrival:
            token.paths[agent] = path
            _log(log, t, agent, "steal", tid, path.cost)
            if tpts_get_task(grid, h, tasks, token, positions, victim, t, log, depth + 1):
                return True
        token.restore(snap)
        _log(log, t, agent, "restore", tid)
    # no task taken this turn
    current = token.paths.get(agent)
    if current is not None and t < current.end_t:
        return True  # re-request variant found nothing better; keep moving
    if loc not in grid.endpoints:
        rt = build_reservations(token.paths, exclude=agent)
        path = plan_path2(grid, loc, t, _path2_candidates(grid, tasks, token, agent), rt)
        if path is None:
            return False
        token.paths[agent] = path
        _log(log, t, agent, "park", None, path.cost)
        return True
    if _resting_allowed(tasks, token, agent, loc, t):
        token.paths[agent] = Path(t, (loc,))
        _log(log, t, agent, "rest")
        return True
    rt = build_reservations(token.paths, exclude=agent)
    path = plan_path2(grid, loc, t, _path2_candidates(grid, tasks, token, agent), rt)
    if path is None:
        if depth > 0:
            return False  # mid-steal victim boxed in; the caller rolls back
        raise PlanningError(
            f"t={t}: agent {agent} cannot move off {loc}; instance is not well-formed"
        )
    token.paths[agent] = path
    _log(log, t, agent, "park", None, path.cost)
    return True
