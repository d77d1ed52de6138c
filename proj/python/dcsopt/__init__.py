"""Minimum-cost hierarchical control structure synthesis.

Thin wrapper over the C++ core: instances and solutions stay opaque handles,
solver results and evaluation reports come back as plain dicts.
"""

from __future__ import annotations

import json

from ._core import (
    ProblemInstance,
    Solution,
    emit_dot,
    load_instance,
    serialize_instance,
    solution_from_json,
)
from . import _core

__all__ = [
    "ProblemInstance",
    "Solution",
    "emit_dot",
    "evaluate",
    "load_instance",
    "optimize",
    "serialize_instance",
    "solution_from_json",
    "solve_exact",
]


def evaluate(instance, solution):
    """Constraint report for a solution: cost, cycle time, failure probability
    and the list of violations."""
    return json.loads(_core.evaluate_json(instance, solution))


def optimize(instance, **params):
    """Ant-colony search. Keyword arguments mirror the CLI solver knobs
    (ants, iterations, alpha, beta, rho, q, seed, tau0, max_nodes,
    local_search)."""
    return json.loads(_core.optimize_json(instance, **params))


def solve_exact(instance, max_total_nodes=0, time_budget=60.0):
    """Exhaustive enumeration up to a node cap; proves optimality or
    infeasibility within the cap."""
    return json.loads(
        _core.solve_exact_json(instance, max_total_nodes=max_total_nodes, time_budget=time_budget)
    )
