"""Command line interface.

Subcommands:

* ``optimize`` — load a scenario, compile, solve, decode, audit, and
  write a result file (plus optional LP / constraint-trace exports).
* ``validate`` — re-audit a previously written result file against its
  scenario.
* ``trace`` — print the step-by-step power trace of one signal from a
  result file.
* ``export-dot`` — render a result as a Graphviz graph.
* ``corpus`` — run the bundled validation scenarios and compare each
  against its stored expectations.

Exit codes: 0 success, 1 failed validation/expectation mismatch,
2 unreadable or invalid input, 3 proven infeasible, 4 solver failure,
5 timeout without a usable solution.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from importlib import resources

from .build import BuildArtifacts, BuildError, build
from .decode import (
    DecodeError,
    Topology,
    audit,
    decode,
    power_trace,
    prune_idle_loops,
)
from .milp import SolveStatus, VarKind, write_lp
from .scenario import (
    MaxTopology,
    Scenario,
    ScenarioError,
    expand_max_topology,
    load_scenario,
)
from .solve import SolverFailure, SolverParams, available_backends, solve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4
EXIT_TIMEOUT = 5

_PALETTE = ["lightblue", "lightyellow", "lightgreen", "lightpink",
            "lightsalmon", "lightcyan", "plum", "wheat"]


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


def _load(path: str) -> tuple[Scenario, MaxTopology]:
    try:
        scenario = load_scenario(path)
    except ScenarioError as exc:
        raise CliError(f"cannot load scenario {path}: {exc}", EXIT_INPUT)
    return scenario, expand_max_topology(scenario)


def _read_result(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read result {path}: {exc}", EXIT_INPUT)
    if not isinstance(doc, dict) or "topology" not in doc:
        raise CliError(f"result file {path} has no topology", EXIT_INPUT)
    return doc


def _problem_stats(artifacts: BuildArtifacts) -> dict:
    p = artifacts.problem
    return {
        "rows": p.num_rows,
        "binary": p.count_kind(VarKind.BINARY),
        "integer": p.count_kind(VarKind.INTEGER),
        "continuous": p.count_kind(VarKind.CONTINUOUS),
    }


def run_pipeline(
    mt: MaxTopology,
    backend: str,
    params: SolverParams,
) -> tuple[dict, Topology, BuildArtifacts]:
    """Compile, solve, decode, and audit one design space.

    Returns the result document, the decoded topology, and the build
    artifacts.  Raises CliError with the appropriate exit code on any
    non-success outcome.
    """
    try:
        artifacts = build(mt, strengthen=True)
    except BuildError as exc:
        raise CliError(f"cannot compile scenario: {exc}", EXIT_INPUT)
    t0 = time.monotonic()
    try:
        solution = solve(artifacts.problem, params, backend)
    except SolverFailure as exc:
        raise CliError(f"solver failure: {exc}", EXIT_SOLVER)
    wall = time.monotonic() - t0
    if solution.status is SolveStatus.INFEASIBLE:
        raise CliError("model proven infeasible: no valid topology exists",
                       EXIT_INFEASIBLE)
    if solution.status is SolveStatus.TIMEOUT:
        raise CliError("time limit reached without a usable solution",
                       EXIT_TIMEOUT)
    if solution.status is SolveStatus.UNBOUNDED:
        raise CliError("model unbounded; the scenario is ill-posed",
                       EXIT_INPUT)
    try:
        solution = prune_idle_loops(solution, artifacts)
        topology = decode(solution, artifacts)
    except DecodeError as exc:
        raise CliError(f"solution does not decode: {exc}", EXIT_SOLVER)
    report = audit(topology, mt)
    if not report.passed:
        lines = "; ".join(f"{r}[{e}]: {d}" for r, e, d in report.violations[:5])
        raise CliError(
            f"solved topology failed the independent audit: {lines}",
            EXIT_SOLVER,
        )
    traces = {}
    for sig in mt.signals:
        traces[sig.id] = [[loc, p] for loc, p in
                          power_trace(topology, mt, sig.id)]
    doc = {
        "scenario": mt.name,
        "status": solution.status.value,
        "backend": backend,
        "objective": solution.objective_value,
        "gap": solution.gap,
        "wall_time": wall,
        "node_count": solution.node_count,
        "problem": _problem_stats(artifacts),
        "topology": topology.to_dict(),
        "report": report.to_dict(),
        "power_traces": traces,
    }
    return doc, topology, artifacts


def _params_from_args(args) -> SolverParams:
    return SolverParams(time_limit=args.time_limit, rel_gap=args.gap,
                        seed=args.seed)


def cmd_optimize(args) -> int:
    _, mt = _load(args.scenario)
    doc, topology, artifacts = run_pipeline(mt, args.backend,
                                            _params_from_args(args))
    if args.lp_out:
        with open(args.lp_out, "w", encoding="utf-8") as fh:
            write_lp(artifacts.problem, artifacts.registry, fh)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            artifacts.write_trace(fh)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"{mt.name}: {doc['status']} objective={doc['objective']:g} "
          f"({doc['problem']['rows']} rows, {doc['wall_time']:.2f}s)")
    populated = [f"{d}:{t}" for d, t in topology.devices.items() if t]
    print("devices: " + (", ".join(populated) or "none"))
    for cid, use in topology.cables.items():
        if use.type:
            print(f"cable {cid}: {use.type} ab={use.use_ab} ba={use.use_ba}")
    for sid, path in topology.signal_paths.items():
        hops = " ".join(f"{c}/{d}" for c, d in path)
        print(f"signal {sid}: {hops}")
    return EXIT_OK


def cmd_validate(args) -> int:
    _, mt = _load(args.scenario)
    doc = _read_result(args.result)
    topology = Topology.from_dict(doc["topology"])
    report = audit(topology, mt)
    for rule, element, detail in report.violations:
        print(f"violation {rule} {element}: {detail}")
    print(f"{mt.name}: {'valid' if report.passed else 'INVALID'} "
          f"({len(report.violations)} violations)")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_trace(args) -> int:
    _, mt = _load(args.scenario)
    doc = _read_result(args.result)
    topology = Topology.from_dict(doc["topology"])
    sig_ids = [s.id for s in mt.signals]
    wanted = [args.signal] if args.signal else sig_ids
    for sid in wanted:
        if sid not in sig_ids:
            raise CliError(f"unknown signal {sid!r}", EXIT_INPUT)
        try:
            steps = power_trace(topology, mt, sid)
        except DecodeError as exc:
            raise CliError(f"cannot trace signal {sid}: {exc}", EXIT_INPUT)
        chain = "  ".join(f"{loc}={p:g}dBm" for loc, p in steps)
        print(f"{sid}: {chain}")
    return EXIT_OK


def export_dot(topology: Topology, mt: MaxTopology) -> str:
    """Deterministic Graphviz rendering of a solved topology."""
    dev_type_index = {t.name: i for i, t in
                      enumerate(mt.type_table.device_types)}
    signals_on: dict[str, list[str]] = {}
    for sid in sorted(topology.signal_paths):
        for cid, direction in topology.signal_paths[sid]:
            signals_on.setdefault(cid, []).append(f"{sid}:{direction}")
    lines = [f'graph "{mt.name}" {{', "  node [style=filled];"]
    for dev in mt.devices:
        tname = topology.devices.get(dev.id)
        if tname is None:
            lines.append(
                f'  "{dev.id}" [label="{dev.id}", shape=circle, '
                'fillcolor=white, style="dashed"];'
            )
        else:
            color = _PALETTE[dev_type_index[tname] % len(_PALETTE)]
            lines.append(
                f'  "{dev.id}" [label="{dev.id}\\n{tname}", shape=box, '
                f"fillcolor={color}];"
            )
    for cab in mt.cables:
        use = topology.cables.get(cab.id)
        if use is None or use.type is None:
            continue
        label = f"{cab.id}: {use.type} ({use.use_ab}/{use.use_ba})"
        carried = signals_on.get(cab.id)
        if carried:
            label += "\\n" + " ".join(carried)
        lines.append(
            f'  "{cab.endpoint_a}" -- "{cab.endpoint_b}" [label="{label}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export_dot(args) -> int:
    _, mt = _load(args.scenario)
    doc = _read_result(args.result)
    topology = Topology.from_dict(doc["topology"])
    text = export_dot(topology, mt)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bundled corpus


def corpus_path(name: str):
    return resources.files("fiberplan.corpus").joinpath(name)


def load_corpus_scenario(name: str) -> tuple[Scenario, MaxTopology]:
    ref = corpus_path(f"{name}.json")
    try:
        doc = json.loads(ref.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read corpus scenario {name}: {exc}", EXIT_INPUT)
    try:
        from .scenario import scenario_from_dict

        scenario = scenario_from_dict(doc, name=name)
    except ScenarioError as exc:
        raise CliError(f"corpus scenario {name} invalid: {exc}", EXIT_INPUT)
    return scenario, expand_max_topology(scenario)


def load_expectations() -> dict:
    ref = corpus_path("expectations.json")
    try:
        doc = json.loads(ref.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read corpus expectations: {exc}", EXIT_INPUT)
    if not isinstance(doc, dict):
        raise CliError("corpus expectations must be an object", EXIT_INPUT)
    return doc


def _check_expectations(name: str, doc: dict, topology: Topology,
                        expect: dict) -> list[str]:
    problems: list[str] = []
    if not isinstance(expect, dict):
        raise CliError(f"expectations for {name} must be an object", EXIT_INPUT)
    if "objective" in expect:
        want = expect["objective"]
        got = doc["objective"]
        if abs(got - want) > 1e-6:
            problems.append(f"objective {got} != expected {want}")
    if "device_type_counts" in expect:
        counts: dict[str, int] = {}
        for t in topology.devices.values():
            if t is not None:
                counts[t] = counts.get(t, 0) + 1
        if counts != {k: int(v) for k, v in expect["device_type_counts"].items()}:
            problems.append(
                f"device type counts {counts} != {expect['device_type_counts']}"
            )
    if "cable_type_counts" in expect:
        counts = {}
        for u in topology.cables.values():
            if u.type is not None:
                counts[u.type] = counts.get(u.type, 0) + 1
        if counts != {k: int(v) for k, v in expect["cable_type_counts"].items()}:
            problems.append(
                f"cable type counts {counts} != {expect['cable_type_counts']}"
            )
    if "cable_count" in expect:
        n = sum(1 for u in topology.cables.values() if u.type is not None)
        if n != int(expect["cable_count"]):
            problems.append(f"cable count {n} != {expect['cable_count']}")
    if "signals_routed" in expect:
        n = len(topology.signal_paths)
        if n != int(expect["signals_routed"]):
            problems.append(f"routed {n} signals != {expect['signals_routed']}")
    return problems


CORPUS_SCENARIOS = ["scenario1", "scenario2", "scenario3", "scenario4",
                    "scenario5"]
IFE_SCENARIO = "ife"


def cmd_corpus(args) -> int:
    expectations = load_expectations()
    names = list(CORPUS_SCENARIOS)
    if args.with_ife:
        names.append(IFE_SCENARIO)
    failed = False
    for name in names:
        _, mt = load_corpus_scenario(name)
        doc, topology, _ = run_pipeline(mt, args.backend,
                                        _params_from_args(args))
        problems = _check_expectations(name, doc, topology,
                                       expectations.get(name, {}))
        if problems:
            failed = True
            print(f"{name}: FAIL objective={doc['objective']:g} "
                  + "; ".join(problems))
        else:
            print(f"{name}: ok objective={doc['objective']:g} "
                  f"({doc['wall_time']:.1f}s)")
        if args.out:
            path = f"{args.out.rstrip('/')}/{name}.json"
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
    return EXIT_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------


def _add_solver_args(p: argparse.ArgumentParser, default_backend: str) -> None:
    p.add_argument("--backend", default=default_backend,
                   choices=available_backends(),
                   help="solver backend (default: %(default)s)")
    p.add_argument("--time-limit", type=float, default=None,
                   help="wall clock limit in seconds")
    p.add_argument("--gap", type=float, default=0.0,
                   help="relative optimality gap to stop at")
    p.add_argument("--seed", type=int, default=0, help="solver random seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fiberplan",
        description="Cost-optimal multi-core fiber network topology synthesis",
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="solve a scenario file")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--out", help="write the result document here")
    p.add_argument("--lp-out", help="export the compiled model in LP format")
    p.add_argument("--trace-out",
                   help="export the row trace (row_id, tag, element)")
    _add_solver_args(p, "highs")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("validate", help="re-audit a result file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--result", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("trace", help="print per-signal power traces")
    p.add_argument("--scenario", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--signal", help="trace only this signal")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("export-dot", help="render a result as Graphviz")
    p.add_argument("--scenario", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--out", help="output .dot file (default: stdout)")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("corpus", help="run the bundled validation scenarios")
    p.add_argument("--with-ife", action="store_true",
                   help="also run the cabin entertainment case study")
    p.add_argument("--out", help="directory for per-scenario result files")
    _add_solver_args(p, "highs")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
