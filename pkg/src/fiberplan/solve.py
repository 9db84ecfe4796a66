"""Solver backends for the planning programs.

Two interchangeable backends implement the same contract (take a
:class:`~fiberplan.milp.MilpProblem` plus :class:`SolverParams`, return
a :class:`~fiberplan.milp.MilpSolution`):

* ``reference`` — a deterministic LP-relaxation branch-and-bound
  written here, using HiGHS (via :func:`scipy.optimize.linprog`) only
  for the node relaxations.  Best-bound node selection with a greedy
  initial dive, most-fractional branching, lowest column index as tie
  break.  Intended for small models and as an independent check; it
  refuses problems with more than :data:`MAX_REFERENCE_COLUMNS` columns.
* ``highs`` — the HiGHS branch-and-cut MIP solver via
  :func:`scipy.optimize.milp`, for production-size models.

:func:`solve` wraps a backend call and re-verifies any returned point
with the independent feasibility checker before handing it to callers.
A backend crash or an unverifiable point raises :class:`SolverFailure`;
this is deliberately distinct from a proven-infeasible model, which is
reported as a normal solution status.
"""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, linprog
from scipy.optimize import milp as _scipy_milp

from .milp import (
    MilpProblem,
    MilpSolution,
    Sense,
    SolveStatus,
    VarKind,
    check_solution,
    evaluate_objective,
)

logger = logging.getLogger(__name__)

MAX_REFERENCE_COLUMNS = 2000
_INT_TOL = 1e-6


class SolverFailure(Exception):
    """A backend crashed or produced an unverifiable result.

    Distinct from an infeasible model: infeasibility is a valid answer,
    a failure is not an answer at all.
    """


@dataclass(frozen=True)
class SolverParams:
    """Knobs shared by all backends.

    Attributes:
        time_limit: Wall-clock budget in seconds, or None for unlimited.
        rel_gap: Relative optimality gap at which search may stop.
        seed: Random seed; both bundled backends are deterministic and
            ignore it, but it is part of the contract so that stochastic
            backends can be plugged in.
        threads: Worker thread budget for backends that support it.
        node_limit: Maximum branch-and-bound nodes, or None.
    """

    time_limit: float | None = None
    rel_gap: float = 0.0
    seed: int = 0
    threads: int = 1
    node_limit: int | None = None


def _split_rows(problem: MilpProblem):
    """Split rows into (A_ub, b_ub, A_eq, b_eq) sparse matrices."""
    n = problem.num_vars
    ub_data: list[tuple[int, dict[int, float], float]] = []
    eq_data: list[tuple[int, dict[int, float], float]] = []
    for row in problem.rows:
        if row.relation == "<=":
            ub_data.append((len(ub_data), row.coeffs, row.rhs))
        elif row.relation == ">=":
            ub_data.append(
                (len(ub_data), {j: -c for j, c in row.coeffs.items()}, -row.rhs)
            )
        else:
            eq_data.append((len(eq_data), row.coeffs, row.rhs))

    def to_csr(data, n_rows):
        if not data:
            return None, None
        rows_idx, cols_idx, vals, rhs = [], [], [], []
        for i, coeffs, b in data:
            rhs.append(b)
            for j, c in coeffs.items():
                rows_idx.append(i)
                cols_idx.append(j)
                vals.append(c)
        mat = sparse.csr_matrix(
            (vals, (rows_idx, cols_idx)), shape=(n_rows, n)
        )
        return mat, np.array(rhs, dtype=float)

    a_ub, b_ub = to_csr(ub_data, len(ub_data))
    a_eq, b_eq = to_csr(eq_data, len(eq_data))
    return a_ub, b_ub, a_eq, b_eq


def _min_objective(problem: MilpProblem) -> np.ndarray:
    """Dense objective vector in minimization orientation."""
    c = np.zeros(problem.num_vars)
    for j, coef in problem.objective.items():
        c[j] = coef
    if problem.sense is Sense.MAX:
        c = -c
    return c


def _rounded_values(problem: MilpProblem, x: np.ndarray) -> list[float]:
    """Snap near-integral integer columns to exact integers."""
    out = []
    for j, v in enumerate(x):
        if problem.kinds[j] is not VarKind.CONTINUOUS and \
                abs(v - round(v)) <= 1e-5:
            out.append(float(round(v)))
        else:
            out.append(float(v))
    return out


class HighsBackend:
    """HiGHS branch-and-cut via scipy.optimize.milp."""

    name = "highs"

    def solve(self, problem: MilpProblem, params: SolverParams) -> MilpSolution:
        t0 = time.monotonic()
        n = problem.num_vars
        if n == 0:
            return MilpSolution(status=SolveStatus.OPTIMAL, values=[],
                                objective_value=0.0, gap=0.0)
        c = _min_objective(problem)
        integrality = np.array(
            [0 if k is VarKind.CONTINUOUS else 1 for k in problem.kinds]
        )
        bounds = Bounds(np.array(problem.lower), np.array(problem.upper))
        constraints = []
        lo, hi, coo_r, coo_c, coo_v = [], [], [], [], []
        for i, row in enumerate(problem.rows):
            if row.relation == "<=":
                lo.append(-np.inf)
                hi.append(row.rhs)
            elif row.relation == ">=":
                lo.append(row.rhs)
                hi.append(np.inf)
            else:
                lo.append(row.rhs)
                hi.append(row.rhs)
            for j, coef in row.coeffs.items():
                coo_r.append(i)
                coo_c.append(j)
                coo_v.append(coef)
        if problem.rows:
            mat = sparse.csr_matrix(
                (coo_v, (coo_r, coo_c)), shape=(len(problem.rows), n)
            )
            constraints = [LinearConstraint(mat, np.array(lo), np.array(hi))]
        options: dict = {"disp": False}
        if params.time_limit is not None:
            options["time_limit"] = params.time_limit
        if params.rel_gap:
            options["mip_rel_gap"] = params.rel_gap
        if params.node_limit is not None:
            options["node_limit"] = params.node_limit
        try:
            res = _scipy_milp(c=c, constraints=constraints, bounds=bounds,
                              integrality=integrality, options=options)
        except Exception as exc:  # pragma: no cover - defensive
            raise SolverFailure(f"highs backend crashed: {exc}") from exc
        wall = time.monotonic() - t0
        values = None
        objective = None
        gap = None
        if res.x is not None:
            values = _rounded_values(problem, np.asarray(res.x))
            objective = evaluate_objective(problem, values)
            gap = getattr(res, "mip_gap", None)
        if res.status == 0:
            status = SolveStatus.OPTIMAL
            gap = 0.0 if gap is None else gap
        elif res.status == 2:
            status = SolveStatus.INFEASIBLE
        elif res.status == 3:
            status = SolveStatus.UNBOUNDED
        elif res.status == 1:
            status = (SolveStatus.FEASIBLE_GAP if values is not None
                      else SolveStatus.TIMEOUT)
        else:
            raise SolverFailure(
                f"highs backend gave up: {res.message} (status {res.status})"
            )
        node_count = int(getattr(res, "mip_node_count", 0) or 0)
        return MilpSolution(status=status, values=values,
                            objective_value=objective, gap=gap,
                            node_count=node_count, wall_time=wall,
                            message=str(res.message))


class ReferenceBackend:
    """Deterministic textbook branch and bound on the LP relaxation.

    Kept intentionally simple so its behaviour is auditable: best-bound
    node selection (with an initial greedy dive to obtain an incumbent),
    branching on the most fractional integer column, lowest index as
    tie break.  No cuts, no heuristics beyond the dive, no presolve.
    """

    name = "reference"

    def solve(self, problem: MilpProblem, params: SolverParams) -> MilpSolution:
        t0 = time.monotonic()
        n = problem.num_vars
        if n > MAX_REFERENCE_COLUMNS:
            raise SolverFailure(
                f"reference backend is limited to {MAX_REFERENCE_COLUMNS} "
                f"columns, got {n}; use the 'highs' backend for this model"
            )
        if n == 0:
            return MilpSolution(status=SolveStatus.OPTIMAL, values=[],
                                objective_value=0.0, gap=0.0)
        c = _min_objective(problem)
        a_ub, b_ub, a_eq, b_eq = _split_rows(problem)
        int_cols = np.array(
            [j for j, k in enumerate(problem.kinds)
             if k is not VarKind.CONTINUOUS],
            dtype=int,
        )
        base_lb = np.array(problem.lower, dtype=float)
        base_ub = np.array(problem.upper, dtype=float)

        def lp(lb: np.ndarray, ub: np.ndarray):
            res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                          bounds=np.column_stack([lb, ub]), method="highs")
            return res

        def out_of_time() -> bool:
            return (params.time_limit is not None
                    and time.monotonic() - t0 >= params.time_limit)

        def most_fractional(x: np.ndarray) -> int | None:
            best_j, best_score = None, _INT_TOL
            for j in int_cols:
                frac = x[j] - math.floor(x[j])
                score = min(frac, 1.0 - frac)
                if score > best_score:
                    best_j, best_score = int(j), score
            return best_j

        incumbent: np.ndarray | None = None
        incumbent_obj = math.inf
        node_count = 0
        counter = 0
        heap: list[tuple[float, int, np.ndarray, np.ndarray]] = []

        root = lp(base_lb, base_ub)
        if root.status == 2:
            return MilpSolution(status=SolveStatus.INFEASIBLE,
                                wall_time=time.monotonic() - t0,
                                message="root relaxation infeasible")
        if root.status == 3:
            return MilpSolution(status=SolveStatus.UNBOUNDED,
                                wall_time=time.monotonic() - t0,
                                message="root relaxation unbounded")
        if root.status != 0:
            raise SolverFailure(f"root relaxation failed: {root.message}")

        def consider(x: np.ndarray) -> None:
            nonlocal incumbent, incumbent_obj
            obj = float(c @ x)
            if obj < incumbent_obj - 1e-9:
                incumbent = x.copy()
                incumbent_obj = obj

        def prune_threshold() -> float:
            if incumbent is None:
                return math.inf
            return incumbent_obj - max(1e-9,
                                       params.rel_gap * abs(incumbent_obj))

        # Greedy dive for an initial incumbent: repeatedly fix the most
        # fractional column to its nearest integer side.
        lb, ub = base_lb.copy(), base_ub.copy()
        res = root
        while res.status == 0 and not out_of_time():
            node_count += 1
            j = most_fractional(res.x)
            if j is None:
                consider(res.x)
                break
            v = res.x[j]
            if v - math.floor(v) <= 0.5:
                ub = ub.copy()
                ub[j] = math.floor(v)
            else:
                lb = lb.copy()
                lb[j] = math.ceil(v)
            res = lp(lb, ub)

        heapq.heappush(heap, (float(root.fun), counter, base_lb, base_ub))
        best_bound = float(root.fun)
        timed_out = False
        while heap:
            if out_of_time():
                timed_out = True
                break
            if params.node_limit is not None and node_count >= params.node_limit:
                timed_out = True
                break
            bound, _, lb, ub = heapq.heappop(heap)
            best_bound = bound
            if bound >= prune_threshold():
                # Best-bound order: every remaining node is at least as
                # bad, the incumbent is optimal within the gap.
                heap.clear()
                best_bound = min(bound, incumbent_obj)
                break
            res = lp(lb, ub)
            node_count += 1
            if res.status == 2:
                continue
            if res.status != 0:
                raise SolverFailure(f"node relaxation failed: {res.message}")
            if res.fun >= prune_threshold():
                continue
            j = most_fractional(res.x)
            if j is None:
                consider(res.x)
                continue
            v = res.x[j]
            down_ub = ub.copy()
            down_ub[j] = math.floor(v)
            counter += 1
            heapq.heappush(heap, (float(res.fun), counter, lb, down_ub))
            up_lb = lb.copy()
            up_lb[j] = math.ceil(v)
            counter += 1
            heapq.heappush(heap, (float(res.fun), counter, up_lb, ub))

        wall = time.monotonic() - t0
        if incumbent is None:
            if timed_out:
                return MilpSolution(status=SolveStatus.TIMEOUT,
                                    node_count=node_count, wall_time=wall,
                                    message="no incumbent within limits")
            return MilpSolution(status=SolveStatus.INFEASIBLE,
                                node_count=node_count, wall_time=wall,
                                message="search exhausted without incumbent")
        values = _rounded_values(problem, incumbent)
        objective = evaluate_objective(problem, values)
        denom = max(1.0, abs(incumbent_obj))
        gap = max(0.0, (incumbent_obj - min(best_bound, incumbent_obj)) / denom)
        if timed_out:
            return MilpSolution(status=SolveStatus.FEASIBLE_GAP, values=values,
                                objective_value=objective, gap=gap,
                                node_count=node_count, wall_time=wall,
                                message="stopped on limit with incumbent")
        return MilpSolution(status=SolveStatus.OPTIMAL, values=values,
                            objective_value=objective, gap=0.0,
                            node_count=node_count, wall_time=wall)


_BACKENDS = {
    "reference": ReferenceBackend,
    "highs": HighsBackend,
}


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_backend(name: str):
    try:
        return _BACKENDS[name]()
    except KeyError:
        raise SolverFailure(
            f"unknown backend {name!r}; available: {available_backends()}"
        ) from None


def solve(
    problem: MilpProblem,
    params: SolverParams | None = None,
    backend: str = "reference",
) -> MilpSolution:
    """Solve a program and independently re-verify the result.

    Any point a backend claims feasible is re-checked with
    :func:`fiberplan.milp.check_solution`; a point that does not verify
    raises :class:`SolverFailure` rather than being passed along.
    """
    params = params or SolverParams()
    be = get_backend(backend) if isinstance(backend, str) else backend
    sol = be.solve(problem, params)
    if sol.values is not None:
        violations = check_solution(problem, sol.values)
        if violations:
            raise SolverFailure(
                f"backend {be.name!r} returned an unverifiable point: "
                + "; ".join(violations[:5])
            )
    logger.info("%s: %s obj=%s nodes=%d %.2fs", problem.name, sol.status.value,
                sol.objective_value, sol.node_count, sol.wall_time)
    return sol


__all__ = [
    "MAX_REFERENCE_COLUMNS",
    "HighsBackend",
    "ReferenceBackend",
    "SolverFailure",
    "SolverParams",
    "available_backends",
    "get_backend",
    "solve",
]
