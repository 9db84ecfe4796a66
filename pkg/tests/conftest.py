from __future__ import annotations

import re

import pytest

from fiberplan import SolverParams, audit, build, decode, solve
from fiberplan.cli import load_corpus_scenario

_CRITERION = re.compile(r"test_criterion_(\d+[a-z]?)")


def pytest_terminal_summary(terminalreporter):
    """One ``criterion N: PASS|FAIL`` line per acceptance criterion.

    Emitted from the terminal reporter because pytest's fd-level
    capture would swallow anything the tests print themselves.
    """
    verdicts: dict[str, str] = {}
    for outcome, word in (("failed", "FAIL"), ("error", "FAIL"),
                          ("passed", "PASS"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(outcome, []):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match and getattr(report, "when", "call") in ("call", "setup"):
                verdicts.setdefault(match.group(1), word)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(verdicts,
                        key=lambda s: (int(re.match(r"\d+", s).group()), s)):
        terminalreporter.write_line(f"criterion {label}: {verdicts[label]}")


class SolveCache:
    """Session-wide cache of corpus solves shared between test modules."""

    def __init__(self) -> None:
        self._scenarios: dict[str, tuple] = {}
        self._solves: dict[tuple[str, str], tuple] = {}

    def scenario(self, name: str):
        if name not in self._scenarios:
            self._scenarios[name] = load_corpus_scenario(name)
        return self._scenarios[name]

    def solved(self, name: str, backend: str = "highs",
               params: SolverParams | None = None):
        """Returns (artifacts, solution, topology, report) for a corpus entry."""
        key = (name, backend)
        if key not in self._solves:
            _, mt = self.scenario(name)
            artifacts = build(mt)
            solution = solve(artifacts.problem,
                             params or SolverParams(time_limit=300), backend)
            topology = decode(solution, artifacts)
            report = audit(topology, mt)
            self._solves[key] = (artifacts, solution, topology, report)
        return self._solves[key]


@pytest.fixture(scope="session")
def cache() -> SolveCache:
    return SolveCache()
