"""Mixed-integer linear program container and utilities.

A :class:`MilpProblem` is an explicit, solver-independent statement of

    optimize   c' x
    subject to A x (<=|=|>=) b,  lb <= x <= ub,
               x_j integral for integer/binary columns

kept in sparse row form.  A :class:`VariableRegistry` maps human-readable
variable names to column indices so that builders, decoders, and the LP
writer agree on what each column means.

The module also provides an independent feasibility checker
(:func:`check_solution`) used to re-verify every solution a backend
returns, and a CPLEX-LP-format writer for inspection with external
tools.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import IO, Iterable

DEFAULT_TOL = 1e-6


class VarKind(enum.Enum):
    BINARY = "binary"
    INTEGER = "integer"
    CONTINUOUS = "continuous"


class Sense(enum.Enum):
    MIN = "min"
    MAX = "max"


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    FEASIBLE_GAP = "feasible_gap"
    TIMEOUT = "timeout"
    ERROR = "error"


@dataclass
class Row:
    """One linear constraint: sum(coeffs[j] * x[j]) <relation> rhs."""

    coeffs: dict[int, float]
    relation: str  # "<=", "=", ">="
    rhs: float


@dataclass
class MilpProblem:
    """A mixed-integer linear program in sparse row form."""

    sense: Sense = Sense.MIN
    kinds: list[VarKind] = field(default_factory=list)
    lower: list[float] = field(default_factory=list)
    upper: list[float] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    rows: list[Row] = field(default_factory=list)
    name: str = "problem"

    @property
    def num_vars(self) -> int:
        return len(self.kinds)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def count_kind(self, kind: VarKind) -> int:
        return sum(1 for k in self.kinds if k is kind)


@dataclass
class MilpSolution:
    """A solution point returned by a backend, plus solve metadata."""

    status: SolveStatus
    values: list[float] | None = None
    objective_value: float | None = None
    gap: float | None = None
    node_count: int = 0
    wall_time: float = 0.0
    message: str = ""


class VariableRegistry:
    """Bidirectional mapping between variable names and column indices."""

    def __init__(self) -> None:
        self._by_name: dict[str, int] = {}
        self._by_col: list[str] = []

    def __len__(self) -> int:
        return len(self._by_col)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def col(self, name: str) -> int:
        return self._by_name[name]

    def name(self, col: int) -> str:
        return self._by_col[col]

    def names(self) -> list[str]:
        return list(self._by_col)

    def value(self, name: str, values: list[float]) -> float:
        return values[self._by_name[name]]


def add_variable(
    problem: MilpProblem,
    registry: VariableRegistry,
    name: str,
    kind: VarKind,
    lower: float,
    upper: float,
) -> int:
    """Register a new column; returns its index.

    Raises ValueError on duplicate names or inconsistent bounds.
    """
    if name in registry:
        raise ValueError(f"duplicate variable name {name!r}")
    if lower > upper:
        raise ValueError(f"variable {name!r}: lower {lower} > upper {upper}")
    if kind is VarKind.BINARY and (lower < 0 or upper > 1):
        raise ValueError(f"binary variable {name!r} with bounds [{lower}, {upper}]")
    col = problem.num_vars
    problem.kinds.append(kind)
    problem.lower.append(lower)
    problem.upper.append(upper)
    registry._by_name[name] = col
    registry._by_col.append(name)
    return col


def add_row(
    problem: MilpProblem,
    coeffs: dict[int, float],
    relation: str,
    rhs: float,
) -> int:
    """Append a constraint row; returns its index."""
    if relation not in ("<=", "=", ">="):
        raise ValueError(f"unknown relation {relation!r}")
    for j in coeffs:
        if not 0 <= j < problem.num_vars:
            raise ValueError(f"row references unknown column {j}")
    problem.rows.append(Row(coeffs=dict(coeffs), relation=relation, rhs=rhs))
    return problem.num_rows - 1


def set_objective(problem: MilpProblem, coeffs: dict[int, float],
                  sense: Sense = Sense.MIN) -> None:
    for j in coeffs:
        if not 0 <= j < problem.num_vars:
            raise ValueError(f"objective references unknown column {j}")
    problem.objective = dict(coeffs)
    problem.sense = sense


def negate_objective(problem: MilpProblem) -> MilpProblem:
    """Return a copy with negated objective and flipped sense.

    The returned problem has the same feasible set and the same set of
    optimal points; applying the function twice round-trips.
    """
    return MilpProblem(
        sense=Sense.MAX if problem.sense is Sense.MIN else Sense.MIN,
        kinds=list(problem.kinds),
        lower=list(problem.lower),
        upper=list(problem.upper),
        objective={j: -c for j, c in problem.objective.items()},
        rows=[Row(dict(r.coeffs), r.relation, r.rhs) for r in problem.rows],
        name=problem.name,
    )


def evaluate_objective(problem: MilpProblem, values: list[float]) -> float:
    return sum(c * values[j] for j, c in problem.objective.items())


def check_solution(
    problem: MilpProblem,
    values: list[float],
    tol: float = DEFAULT_TOL,
) -> list[str]:
    """Independently verify a point against the problem.

    Checks variable bounds, integrality of integer/binary columns, and
    every constraint row, all within an absolute tolerance.  Returns a
    list of human-readable violation descriptions (empty when feasible).
    This function deliberately shares no code with any solver backend.
    """
    violations: list[str] = []
    if len(values) != problem.num_vars:
        return [f"value vector length {len(values)} != {problem.num_vars}"]
    for j, v in enumerate(values):
        if not math.isfinite(v):
            violations.append(f"col {j}: non-finite value {v}")
            continue
        if v < problem.lower[j] - tol or v > problem.upper[j] + tol:
            violations.append(
                f"col {j}: value {v} outside bounds "
                f"[{problem.lower[j]}, {problem.upper[j]}]"
            )
        if problem.kinds[j] is not VarKind.CONTINUOUS:
            if abs(v - round(v)) > tol:
                violations.append(f"col {j}: value {v} not integral")
    for i, row in enumerate(problem.rows):
        lhs = sum(c * values[j] for j, c in row.coeffs.items())
        if row.relation == "<=" and lhs > row.rhs + tol:
            violations.append(f"row {i}: {lhs} <= {row.rhs} violated")
        elif row.relation == ">=" and lhs < row.rhs - tol:
            violations.append(f"row {i}: {lhs} >= {row.rhs} violated")
        elif row.relation == "=" and abs(lhs - row.rhs) > tol:
            violations.append(f"row {i}: {lhs} = {row.rhs} violated")
    return violations


def is_feasible(problem: MilpProblem, values: list[float],
                tol: float = DEFAULT_TOL) -> bool:
    return not check_solution(problem, values, tol)


# ---------------------------------------------------------------------------
# LP format export

_LP_NAME_OK = re.compile(r"^[A-Za-z!\"#$%&(),;?@_'`{}|~][A-Za-z0-9!\"#$%&(),;?@_'`{}|~.]*$")


def _lp_name(raw: str) -> str:
    """Sanitize a variable name for the LP file format."""
    name = re.sub(r"[^A-Za-z0-9_.]", "_", raw)
    if not name or name[0].isdigit() or name[0] in "eE.":
        name = "x" + name
    return name


def _lp_terms(coeffs: Iterable[tuple[str, float]], fallback: str = "x0") -> str:
    parts: list[str] = []
    for name, c in coeffs:
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not parts and sign == "+":
            parts.append(f"{mag:.12g} {name}")
        else:
            parts.append(f"{sign} {mag:.12g} {name}")
    return " ".join(parts) if parts else f"0 {fallback}"


def write_lp(problem: MilpProblem, registry: VariableRegistry | None,
             stream: IO[str]) -> None:
    """Write the problem in CPLEX LP format.

    Variable names come from the registry when given (sanitized for the
    format), otherwise columns are named ``x0 .. xN``.  Output is fully
    deterministic.
    """
    if registry is not None and len(registry) == problem.num_vars:
        names = []
        seen: dict[str, int] = {}
        for raw in registry.names():
            n = _lp_name(raw)
            if n in seen:
                seen[n] += 1
                n = f"{n}__{seen[n]}"
            else:
                seen[n] = 0
            names.append(n)
    else:
        names = [f"x{j}" for j in range(problem.num_vars)]

    stream.write(f"\\ {problem.name}\n")
    stream.write("Maximize\n" if problem.sense is Sense.MAX else "Minimize\n")
    fallback = names[0] if names else "x0"
    obj = sorted(problem.objective.items())
    stream.write(" obj: " + _lp_terms(((names[j], c) for j, c in obj), fallback)
                 + "\n")
    stream.write("Subject To\n")
    for i, row in enumerate(problem.rows):
        terms = _lp_terms(((names[j], c) for j, c in sorted(row.coeffs.items())),
                          fallback)
        rel = {"<=": "<=", ">=": ">=", "=": "="}[row.relation]
        stream.write(f" c{i}: {terms} {rel} {row.rhs:.12g}\n")
    stream.write("Bounds\n")
    for j in range(problem.num_vars):
        lo, hi = problem.lower[j], problem.upper[j]
        if problem.kinds[j] is VarKind.BINARY and lo == 0 and hi == 1:
            continue
        lo_s = "-inf" if lo == -math.inf else f"{lo:.12g}"
        hi_s = "+inf" if hi == math.inf else f"{hi:.12g}"
        stream.write(f" {lo_s} <= {names[j]} <= {hi_s}\n")
    generals = [names[j] for j in range(problem.num_vars)
                if problem.kinds[j] is VarKind.INTEGER]
    if generals:
        stream.write("General\n")
        for n in generals:
            stream.write(f" {n}\n")
    binaries = [names[j] for j in range(problem.num_vars)
                if problem.kinds[j] is VarKind.BINARY]
    if binaries:
        stream.write("Binary\n")
        for n in binaries:
            stream.write(f" {n}\n")
    stream.write("End\n")


__all__ = [
    "DEFAULT_TOL",
    "MilpProblem",
    "MilpSolution",
    "Row",
    "Sense",
    "SolveStatus",
    "VarKind",
    "VariableRegistry",
    "add_row",
    "add_variable",
    "check_solution",
    "evaluate_objective",
    "is_feasible",
    "negate_objective",
    "set_objective",
    "write_lp",
]
