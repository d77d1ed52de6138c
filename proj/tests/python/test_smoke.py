"""End-to-end smoke tests for the Python bindings."""

import json
from pathlib import Path

import pytest

import dcsopt

INSTANCE_PATH = Path(__file__).resolve().parents[2] / "instances" / "table1.json"


@pytest.fixture(scope="module")
def instance():
    return dcsopt.load_instance(INSTANCE_PATH.read_text())


def test_instance_properties(instance):
    assert instance.levels == 3
    assert instance.loop_count == 30
    assert instance.device_count == 2
    assert instance.t_max == pytest.approx(1.0)
    roundtrip = dcsopt.load_instance(dcsopt.serialize_instance(instance))
    assert roundtrip.loop_count == 30


def test_exact_solver_returns_known_optimum(instance):
    result = dcsopt.solve_exact(instance, max_total_nodes=9)
    assert result["status"] == "Optimal"
    assert result["feasible"] is True
    assert result["cost"] == pytest.approx(2400.0)
    assert result["failure_prob"] == pytest.approx(0.0442, abs=5e-4)
    assert result["solution"]["nodes"]


def test_colony_finds_a_feasible_structure(instance):
    result = dcsopt.optimize(instance, iterations=60, seed=3)
    assert result["feasible"] is True
    assert result["cost"] == pytest.approx(2400.0)
    assert len(result["history"]) == 60
    assert result["evaluations"] > 0


def test_solution_roundtrip_and_evaluation(instance):
    result = dcsopt.solve_exact(instance, max_total_nodes=9)
    solution = dcsopt.solution_from_json(json.dumps(result["solution"]), instance)
    assert solution.node_count == 7

    report = dcsopt.evaluate(instance, solution)
    assert report["feasible"] is True
    assert report["cost"] == pytest.approx(2400.0)
    assert report["violations"] == []

    again = dcsopt.solution_from_json(solution.to_json(), instance)
    assert again.node_count == solution.node_count


def test_dot_rendering(instance):
    result = dcsopt.solve_exact(instance, max_total_nodes=9)
    solution = dcsopt.solution_from_json(json.dumps(result["solution"]), instance)
    dot = dcsopt.emit_dot(instance, solution)
    assert dot.startswith("digraph")
    assert "u1" in dot and "u2" in dot


def test_invalid_instance_raises():
    with pytest.raises(ValueError):
        dcsopt.load_instance("not json at all")
