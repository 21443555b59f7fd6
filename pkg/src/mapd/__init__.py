"""Lifelong multi-agent pickup and delivery (MAPD) simulation library.

Agents on a 4-neighbor grid serve an online stream of pickup/delivery
tasks.  Three solvers are provided: token passing (TP), token passing
with task swaps (TPTS), and a centralized baseline (CENTRAL) built on
Hungarian assignment plus two-stage conflict-based search.
"""

from mapd.grid import (
    GridMap,
    HeuristicTable,
    MapdInstance,
    MapParseError,
    WellFormedness,
    check_well_formed,
    parse_map,
    precompute_heuristics,
    serialize_map,
)
from mapd.tasks import Task, TaskSet, TaskState, generate_stream, release_due
from mapd.pathing import (
    Path,
    PlanningError,
    ReservationTable,
    SearchConstraints,
    plan_path1,
    plan_path2,
)
from mapd.token import Token, TokenSnapshot, request_order, tp_token_turn, tpts_get_task
from mapd.assignment import hungarian, modified_costs
from mapd.cbs import CbsFailure, MapfQuery, cbs_solve, detect_first_conflict
from mapd.central import CentralState, central_step
from mapd.sim import (
    Metrics,
    SimConfig,
    SimulationError,
    Trajectory,
    audit_collisions,
    run,
    window_counts,
)

__all__ = [
    "GridMap",
    "HeuristicTable",
    "MapdInstance",
    "MapParseError",
    "WellFormedness",
    "check_well_formed",
    "parse_map",
    "precompute_heuristics",
    "serialize_map",
    "Task",
    "TaskSet",
    "TaskState",
    "generate_stream",
    "release_due",
    "Path",
    "PlanningError",
    "ReservationTable",
    "SearchConstraints",
    "plan_path1",
    "plan_path2",
    "Token",
    "TokenSnapshot",
    "request_order",
    "tp_token_turn",
    "tpts_get_task",
    "hungarian",
    "modified_costs",
    "CbsFailure",
    "MapfQuery",
    "cbs_solve",
    "detect_first_conflict",
    "CentralState",
    "central_step",
    "Metrics",
    "SimConfig",
    "SimulationError",
    "Trajectory",
    "audit_collisions",
    "run",
    "window_counts",
]
