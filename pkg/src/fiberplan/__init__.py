"""Cost-optimal multi-core fiber network topology synthesis.

Pipeline: a scenario (type catalogue, device/cable slots, signals) is
expanded into its full design space, compiled into a mixed-integer
linear program, solved with a pluggable backend, and the solution is
decoded back into a network topology that is re-validated with
independent arithmetic.
"""

from .build import BuildArtifacts, BuildError, PowerLimit, build, compute_power_limit
from .decode import (
    DecodeError,
    OracleLimitError,
    OracleLimits,
    Topology,
    ValidationReport,
    audit,
    decode,
    exhaustive_oracle,
    power_trace,
    prune_idle_loops,
)
from .milp import (
    MilpProblem,
    MilpSolution,
    SolveStatus,
    VarKind,
    VariableRegistry,
    check_solution,
    negate_objective,
    write_lp,
)
from .scenario import (
    CableSlot,
    CableType,
    DeviceSlot,
    DeviceType,
    MaxTopology,
    Scenario,
    ScenarioError,
    ScenarioFormatError,
    ScenarioSemanticError,
    Signal,
    TypeTable,
    element_properties,
    expand_max_topology,
    load_scenario,
    validate_type_table,
)
from .solve import SolverFailure, SolverParams, available_backends, solve

__version__ = "0.1.0"

__all__ = [
    "BuildArtifacts",
    "BuildError",
    "CableSlot",
    "CableType",
    "DecodeError",
    "DeviceSlot",
    "DeviceType",
    "MaxTopology",
    "MilpProblem",
    "MilpSolution",
    "OracleLimitError",
    "OracleLimits",
    "PowerLimit",
    "Scenario",
    "ScenarioError",
    "ScenarioFormatError",
    "ScenarioSemanticError",
    "Signal",
    "SolveStatus",
    "SolverFailure",
    "SolverParams",
    "Topology",
    "TypeTable",
    "ValidationReport",
    "VarKind",
    "VariableRegistry",
    "audit",
    "available_backends",
    "build",
    "check_solution",
    "compute_power_limit",
    "decode",
    "element_properties",
    "exhaustive_oracle",
    "expand_max_topology",
    "load_scenario",
    "negate_objective",
    "power_trace",
    "prune_idle_loops",
    "solve",
    "validate_type_table",
    "write_lp",
]
