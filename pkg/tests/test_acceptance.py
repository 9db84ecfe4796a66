"""End-to-end acceptance gate.

Each test covers one numbered acceptance criterion; the session
summary prints exactly one ``criterion N: PASS|FAIL`` line per
criterion (see ``pytest_terminal_summary`` in conftest.py).
Sub-criteria that are demonstrably unattainable with the published
inputs (5b, 6b, 6c) are asserted as stated anyway and fail honestly.
"""

from __future__ import annotations

import copy
import json

import pytest

from fiberplan import cli
from fiberplan.build import build, sig_cable_power_var, sig_cable_var, sig_dev_var
from fiberplan.decode import (
    OracleLimits,
    audit,
    decode,
    exhaustive_oracle,
    power_trace,
    prune_idle_loops,
)
from fiberplan.milp import SolveStatus, VarKind
from fiberplan.scenario import expand_max_topology, scenario_from_dict
from fiberplan.solve import SolverParams, solve

from test_bigm import chain_mt, pin, solve_status, solved_values
from test_property import SEEDS, run_case


def path_devices(mt, sig_id, path):
    sig = next(s for s in mt.signals if s.id == sig_id)
    devices = [sig.source]
    for cab_id, direction in path:
        cab = mt.cable(cab_id)
        devices.append(cab.endpoint_b if direction == "AB" else cab.endpoint_a)
    return devices


def cables_on_paths(topology, sig_ids):
    return {cid for sid in sig_ids for cid, _ in topology.signal_paths[sid]}


def test_criterion_1_first_scenario_against_oracle(cache):
    _, mt = cache.scenario("scenario1")
    _, solution, topology, report = cache.solved("scenario1", "reference")
    assert solution.status is SolveStatus.OPTIMAL
    assert report.passed, report.violations
    # All three switches populated and opaque.
    assert topology.devices == {"0": "opaque", "1": "opaque", "2": "opaque"}
    # All three cables populated with the unidirectional two-core type.
    populated = {c: u.type for c, u in topology.cables.items() if u.type}
    assert len(populated) == 3
    assert set(populated.values()) == {"uni2"}
    # The return signal detours over switch 2.
    assert "2" in path_devices(mt, "B", topology.signal_paths["B"])
    # The objective is exactly the brute-force optimum.
    oracle = exhaustive_oracle(mt)
    assert oracle is not None
    assert solution.objective_value == oracle.objective_value
    assert solution.wall_time < 10.0


def test_criterion_2_link_budget_drives_the_design(cache):
    _, mt = cache.scenario("scenario2")
    artifacts, solution, topology, report = cache.solved("scenario2",
                                                         "reference")
    assert solution.status is SolveStatus.OPTIMAL
    assert report.passed, report.violations
    # No single-core cable appears on any signal path.
    for cid in cables_on_paths(topology, ("A", "B")):
        assert topology.cables[cid].type != "bidir1"
    # The recomputed receiver power of signal A sits in the narrow band
    # the launch window allows, inside the receiver window.
    rx = power_trace(topology, mt, "A")[-1][1]
    assert -9.5 - 1e-9 <= rx <= -4.5 + 1e-9
    assert -14.0 <= rx <= 0.5
    # Forcing the first hop onto the single-core type (and closing the
    # alternative route) makes the model infeasible...
    doc = json.loads(cli.corpus_path("scenario2.json").read_text())
    for cab in doc["cables"]:
        if cab["id"] == "c01":
            cab["fixed_type"] = "bidir1"
            cab["must_exist"] = True
        if cab["id"] == "c23":
            cab["allowed_types"] = []
    forced = expand_max_topology(scenario_from_dict(doc, name="forced"))
    forced_sol = solve(build(forced).problem, SolverParams(time_limit=60),
                       "reference")
    assert forced_sol.status is SolveStatus.INFEASIBLE
    # ... and the audit of the same downgrade pinpoints the arrival at
    # -17.5 dBm, below the -14 dBm receiver floor.
    broken = copy.deepcopy(topology)
    broken.cables[broken.signal_paths["A"][0][0]].type = "bidir1"
    broken.signal_tx["A"] = {}
    bad = audit(broken, mt)
    assert not bad.passed
    assert any(r == "link-budget" and "-17.5" in d
               for r, _, d in bad.violations)
    # The objective is exactly the brute-force optimum.
    oracle = exhaustive_oracle(mt, OracleLimits(max_devices=5))
    assert oracle is not None
    assert solution.objective_value == oracle.objective_value
    assert solution.wall_time < 60.0


def test_criterion_3_minimal_upgrade_for_new_demand(cache):
    _, s3_solution, s3, s3_report = cache.solved("scenario3", "highs")
    _, _, s2, _ = cache.solved("scenario2", "highs")
    assert s3_report.passed
    assert s3_solution.objective_value == pytest.approx(1260.0)
    # Exactly the two cables carrying the tripled demand (signals A, C,
    # D share them) are upgraded to the three-core type.
    upgraded = {c for c, u in s3.cables.items() if u.type == "bidir3"}
    assert len(upgraded) == 2
    assert upgraded == cables_on_paths(s3, ("A", "C", "D"))
    # The pre-existing signal is untouched: same path, same cable types.
    assert s3.signal_paths["B"] == s2.signal_paths["B"]
    for cid, _ in s3.signal_paths["B"]:
        assert s3.cables[cid].type == s2.cables[cid].type


def test_criterion_4_extra_demand_forces_regeneration(cache):
    _, s4_solution, s4, s4_report = cache.solved("scenario4", "highs")
    _, s2_solution, _, _ = cache.solved("scenario2", "highs")
    assert s4_report.passed
    # The optimum converts switch 3 to an opaque (regenerating) device.
    assert s4.devices["3"] == "opaque"
    assert s4_solution.objective_value == pytest.approx(1470.0)
    assert (s4_solution.objective_value - s2_solution.objective_value
            == pytest.approx(250.0))


def test_criterion_5a_free_cabling_is_cheaper(cache):
    _, s5_solution, s5, s5_report = cache.solved("scenario5", "highs")
    _, s3_solution, _, _ = cache.solved("scenario3", "highs")
    assert s5_report.passed
    assert s5_solution.objective_value == pytest.approx(980.0)
    assert s5_solution.objective_value <= s3_solution.objective_value


def test_criterion_5b_cable_count_matches_fixed_cabling(cache):
    # Stated requirement: the freely cabled optimum uses as many cables
    # as the fixed-cabling design.  The true optimum needs fewer, so
    # this assertion fails honestly; see the analysis notes.
    _, _, s5, _ = cache.solved("scenario5", "highs")
    _, _, s3, _ = cache.solved("scenario3", "highs")
    count5 = sum(1 for u in s5.cables.values() if u.type)
    count3 = sum(1 for u in s3.cables.values() if u.type)
    assert count5 == count3


@pytest.fixture(scope="module")
def ife_artifacts(cache):
    _, mt = cache.scenario("ife")
    return build(mt)


def test_criterion_6a_case_study_integer_count(ife_artifacts):
    integer = ife_artifacts.problem.count_kind(VarKind.INTEGER)
    assert 162 * 0.95 <= integer <= 162 * 1.05


def test_criterion_6b_case_study_remaining_size_bands(ife_artifacts):
    # Stated requirement: binary/continuous column and row counts within
    # 5% of the published figures.  Those figures are post-presolve
    # solver statistics and are not jointly attainable from the model
    # as published, so this fails honestly; see the analysis notes.
    p = ife_artifacts.problem
    assert 8454 * 0.95 <= p.count_kind(VarKind.BINARY) <= 8454 * 1.05
    assert 9260 * 0.95 <= p.count_kind(VarKind.CONTINUOUS) <= 9260 * 1.05
    assert 49316 * 0.95 <= p.num_rows <= 49316 * 1.05


def test_criterion_6c_case_study_solves_within_budget(cache):
    _, mt = cache.scenario("ife")
    artifacts = build(mt, strengthen=True)
    solution = solve(artifacts.problem,
                     SolverParams(time_limit=1500, rel_gap=0.01), "highs")
    assert solution.status in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE_GAP)
    assert solution.wall_time < 1800.0
    # The structural guarantees below are only promised once the solver
    # is within 1% of the optimum, so the gap is asserted first.
    gap = solution.gap
    assert gap is not None and gap <= 0.01 + 1e-9, (
        f"remaining optimality gap {gap:.4f} exceeds the required "
        "1% within the 30 minute budget")
    topology = decode(prune_idle_loops(solution, artifacts), artifacts)
    report = audit(topology, mt)
    assert report.passed, report.violations[:5]
    # All 48 streams are routed between their designated endpoints.
    assert len(topology.signal_paths) == 48
    for sig in mt.signals:
        devices = path_devices(mt, sig.id, topology.signal_paths[sig.id])
        assert devices[0] == sig.source and devices[-1] == sig.target
    # Exactly six switch slots become transparent switches, two stay
    # unassigned.
    chosen = [topology.devices[d] for d in "0 4 5 9 10 14 15 19".split()]
    assert chosen.count("switch_transparent") == 6
    assert chosen.count(None) == 2
    assert chosen.count("switch_opaque") == 0


def test_criterion_7_randomized_pipeline_vs_oracle():
    feasible = 0
    for seed in SEEDS:
        case = run_case(seed)
        if case.build_error:
            assert case.oracle is None
            continue
        if case.oracle is None:
            assert case.solution.status is SolveStatus.INFEASIBLE
            continue
        feasible += 1
        assert case.solution.status is SolveStatus.OPTIMAL
        assert case.solution.objective_value == case.oracle.objective_value
        assert audit(case.topology, case.mt).passed
    assert feasible >= 10  # the generator must exercise the solver


def test_criterion_8_bigm_case_tables():
    # Cable power: active core tracks launch plus gain, dormant core
    # is pinned to zero.
    art = build(chain_mt("trn", with_direct=True))
    pin(art, sig_cable_var("s", "c01", "AB"), 1.0)
    pin(art, sig_dev_var("s", "0", "transmit"), 0.0)
    val = solved_values(art)
    assert val(sig_cable_power_var("s", "c01", "AB")) == pytest.approx(-2.0)
    assert val(sig_cable_power_var("s", "c02", "AB")) == 0.0
    # Receive window: enforced for an opaque receiver, skipped for a
    # translucent relay.
    assert solve_status(build(chain_mt("opq", first_cable="lossy"))) \
        is SolveStatus.INFEASIBLE
    art = build(chain_mt("trn", target_type="wide", first_cable="lossy"))
    pin(art, sig_dev_var("s", "0", "transmit"), 0.0)
    val = solved_values(art)
    assert val(sig_dev_var("s", "1", "Rx")) == pytest.approx(-15.0)
    assert val(sig_dev_var("s", "1", "opaqueRx")) == 0
    # Available power: forwarded for translucent, regenerated for opaque.
    art = build(chain_mt("trn"))
    pin(art, sig_dev_var("s", "0", "transmit"), 0.0)
    val = solved_values(art)
    assert val(sig_dev_var("s", "1", "TxAvail")) == pytest.approx(-2.5)
    art = build(chain_mt("opq"))
    pin(art, sig_dev_var("s", "1", "transmit"), -3.0)
    val = solved_values(art)
    assert val(sig_dev_var("s", "1", "TxAvail")) == pytest.approx(-3.0)
    assert val(sig_dev_var("s", "1", "opaqueRx")) == 1
    # Transmit window: binding in both directions.
    art = build(chain_mt("opq"))
    pin(art, sig_dev_var("s", "0", "transmit"), 1.0)
    assert solve_status(art) is SolveStatus.INFEASIBLE
    art = build(chain_mt("opq"))
    pin(art, sig_dev_var("s", "0", "transmit"), -6.0)
    assert solve_status(art) is SolveStatus.INFEASIBLE
    # Launch gate: transmitting device launches its available power,
    # silent device launches the zero sentinel.
    art = build(chain_mt("opq"))
    pin(art, sig_dev_var("s", "0", "transmit"), -1.0)
    pin(art, sig_dev_var("s", "2", "transmit"), -4.0)
    val = solved_values(art)
    assert val(sig_dev_var("s", "0", "Tx")) == pytest.approx(-1.0)
    assert val(sig_dev_var("s", "2", "Tx")) == 0.0
