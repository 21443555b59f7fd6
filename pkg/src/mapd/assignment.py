"""Minimum-cost agent/endpoint assignment and the pickup-vs-parking cost
construction used by the centralized solver."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class CostMatrix:
    """Rectangular nonnegative integer cost table, rows = agents,
    cols = endpoints.  Infinite costs must be filtered out by the caller."""

    costs: list[list[int]]
    agents: list[int]
    endpoints: list

    def __post_init__(self) -> None:
        n_rows = len(self.costs)
        if n_rows != len(self.agents):
            raise ValueError("row count must match agent count")
        if n_rows and len({len(row) for row in self.costs}) != 1:
            raise ValueError("ragged cost matrix")
        n_cols = len(self.costs[0]) if n_rows else len(self.endpoints)
        if n_cols != len(self.endpoints):
            raise ValueError("column count must match endpoint count")
        if n_rows > n_cols:
            raise ValueError("need at least as many endpoints as agents")
        for row in self.costs:
            for v in row:
                if v < 0:
                    raise ValueError("costs must be nonnegative")

    @property
    def n_cols(self) -> int:
        return len(self.costs[0]) if self.costs else len(self.endpoints)


def hungarian(matrix: CostMatrix) -> dict:
    """Perfect matching on rows minimizing total cost.

    Ties between equal-cost matchings are broken deterministically by an
    infinitesimal perturbation eps*(row*n_cols + col), realized exactly in
    integer arithmetic by scaling every cost by a constant larger than the
    largest possible perturbation sum.
    """
    if not matrix.costs:
        return {}
    n_rows = len(matrix.costs)
    n_cols = matrix.n_cols
    scale = n_rows * n_cols * n_cols + 1
    top = max(v for row in matrix.costs for v in row)
    if top * scale + n_rows * n_cols >= 2**62:
        raise OverflowError("cost matrix too large for exact 64-bit tie-breaking")
    arr = np.array(matrix.costs, dtype=np.int64) * scale
    arr += np.arange(n_rows * n_cols, dtype=np.int64).reshape(n_rows, n_cols)
    rows, cols = linear_sum_assignment(arr)
    return {matrix.agents[i]: matrix.endpoints[j] for i, j in zip(rows, cols)}


def assignment_cost(matrix: CostMatrix, assignment: dict) -> int:
    """Total base cost of an assignment produced from this matrix."""
    col_of = {e: j for j, e in enumerate(matrix.endpoints)}
    return sum(
        matrix.costs[i][col_of[assignment[agent]]]
        for i, agent in enumerate(matrix.agents)
    )


def modified_costs(free_agents: Sequence[int], endpoints: Sequence,
                   kinds: Sequence[str], base: list[list[int]]) -> CostMatrix:
    """Dominance-shaped costs: any pickup assignment is cheaper than any
    parking assignment for the same agent, and improving one assigned
    pickup distance outweighs improving every parking distance.

    With c = number of free agents and C = max base cost + 1:
    pickup  -> c * C * base,   parking -> c * C**2 + base.
    """
    for kind in kinds:
        if kind not in ("pickup", "parking"):
            raise ValueError(f"unknown endpoint kind {kind!r}")
    c = len(free_agents)
    big = max((v for row in base for v in row), default=0) + 1
    costs = []
    for row in base:
        out_row = []
        for v, kind in zip(row, kinds):
            if kind == "pickup":
                out_row.append(c * big * v)
            else:
                out_row.append(c * big * big + v)
        costs.append(out_row)
    return CostMatrix(costs=costs, agents=list(free_agents), endpoints=list(endpoints))
