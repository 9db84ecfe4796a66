from __future__ import annotations

import pytest

from fiberplan.milp import (
    MilpProblem,
    MilpSolution,
    Sense,
    SolveStatus,
    VarKind,
    VariableRegistry,
    add_row,
    add_variable,
    negate_objective,
    set_objective,
)
from fiberplan.solve import (
    MAX_REFERENCE_COLUMNS,
    SolverFailure,
    SolverParams,
    available_backends,
    get_backend,
    solve,
)

BACKENDS = ["reference", "highs"]


def knapsack() -> MilpProblem:
    """max 5x + 4y + 3z s.t. 2x + 3y + z <= 5; optimum 9 at x=y=1, z=0."""
    p = MilpProblem(name="knapsack")
    reg = VariableRegistry()
    cols = [add_variable(p, reg, n, VarKind.BINARY, 0, 1) for n in "xyz"]
    add_row(p, {cols[0]: 2, cols[1]: 3, cols[2]: 1}, "<=", 5)
    set_objective(p, {cols[0]: 5, cols[1]: 4, cols[2]: 3}, Sense.MAX)
    return p


def integer_rounding_trap() -> MilpProblem:
    """min x + y s.t. 2x + 2y >= 3, integers; LP optimum 1.5, MIP optimum 2."""
    p = MilpProblem()
    reg = VariableRegistry()
    x = add_variable(p, reg, "x", VarKind.INTEGER, 0, 10)
    y = add_variable(p, reg, "y", VarKind.INTEGER, 0, 10)
    add_row(p, {x: 2, y: 2}, ">=", 3)
    set_objective(p, {x: 1, y: 1}, Sense.MIN)
    return p


def infeasible_problem() -> MilpProblem:
    p = MilpProblem()
    reg = VariableRegistry()
    x = add_variable(p, reg, "x", VarKind.BINARY, 0, 1)
    add_row(p, {x: 1}, ">=", 2)
    set_objective(p, {x: 1}, Sense.MIN)
    return p


class TestBackendsAgree:
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_knapsack_optimum(self, backend):
        sol = solve(knapsack(), backend=backend)
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(9.0)
        assert sol.values == [1.0, 1.0, 0.0]
        assert sol.gap == 0.0

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_integer_rounding_gap(self, backend):
        sol = solve(integer_rounding_trap(), backend=backend)
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(2.0)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_negated_problem_has_same_argmin(self, backend):
        sol = solve(negate_objective(knapsack()), backend=backend)
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == pytest.approx(-9.0)
        assert sol.values == [1.0, 1.0, 0.0]

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_infeasible_is_a_status_not_an_exception(self, backend):
        sol = solve(infeasible_problem(), backend=backend)
        assert sol.status is SolveStatus.INFEASIBLE
        assert sol.values is None

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_unbounded(self, backend):
        p = MilpProblem()
        reg = VariableRegistry()
        x = add_variable(p, reg, "x", VarKind.CONTINUOUS, 0, float("inf"))
        set_objective(p, {x: -1}, Sense.MIN)
        sol = solve(p, backend=backend)
        assert sol.status is SolveStatus.UNBOUNDED

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_empty_problem(self, backend):
        sol = solve(MilpProblem(), backend=backend)
        assert sol.status is SolveStatus.OPTIMAL
        assert sol.objective_value == 0.0


class TestReferenceGuards:
    def test_column_guard(self):
        p = MilpProblem()
        reg = VariableRegistry()
        for i in range(MAX_REFERENCE_COLUMNS + 1):
            add_variable(p, reg, f"x{i}", VarKind.BINARY, 0, 1)
        set_objective(p, {0: 1}, Sense.MIN)
        with pytest.raises(SolverFailure, match="limited to"):
            solve(p, backend="reference")

    def test_zero_time_limit_times_out(self):
        sol = get_backend("reference").solve(knapsack(),
                                             SolverParams(time_limit=0.0))
        assert sol.status in (SolveStatus.TIMEOUT, SolveStatus.FEASIBLE_GAP)
        assert sol.objective_value is None or sol.values is not None

    def test_node_limit_stops_search_with_incumbent(self):
        # The greedy dive already yields an incumbent, so a tiny node
        # budget still returns a feasible point with a positive gap.
        sol = get_backend("reference").solve(
            knapsack(), SolverParams(node_limit=1))
        assert sol.status is SolveStatus.FEASIBLE_GAP
        assert sol.values is not None
        assert sol.gap > 0.0

    def test_deterministic_across_runs(self):
        a = solve(knapsack(), backend="reference")
        b = solve(knapsack(), backend="reference")
        assert a.values == b.values
        assert a.node_count == b.node_count


class TestSolveWrapper:
    def test_unknown_backend(self):
        with pytest.raises(SolverFailure, match="unknown backend"):
            solve(knapsack(), backend="cplex")

    def test_available_backends(self):
        assert available_backends() == ["highs", "reference"]

    def test_lying_backend_is_caught(self):
        class Liar:
            name = "liar"

            def solve(self, problem, params):
                return MilpSolution(status=SolveStatus.OPTIMAL,
                                    values=[1.0, 1.0, 1.0],
                                    objective_value=12.0, gap=0.0)

        with pytest.raises(SolverFailure, match="unverifiable"):
            solve(knapsack(), backend=Liar())

    def test_honest_custom_backend_passes_verification(self):
        class Fixed:
            name = "fixed"

            def solve(self, problem, params):
                return MilpSolution(status=SolveStatus.OPTIMAL,
                                    values=[1.0, 1.0, 0.0],
                                    objective_value=9.0, gap=0.0)

        sol = solve(knapsack(), backend=Fixed())
        assert sol.objective_value == 9.0
