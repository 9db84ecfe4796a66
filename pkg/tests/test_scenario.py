from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fiberplan.scenario import (
    CableSlot,
    CableType,
    DeviceSlot,
    DeviceType,
    Scenario,
    ScenarioFormatError,
    ScenarioSemanticError,
    Signal,
    TypeTable,
    element_properties,
    expand_max_topology,
    load_scenario,
    scenario_from_dict,
    validate_type_table,
)

OPAQUE = DeviceType(name="opaque", ports=4, rx_min=-14.0, rx_max=0.5,
                    tx_min=-5.0, tx_max=0.0, cost=300.0)
TRANSL = DeviceType(name="translucent", ports=2, delta=-0.5, translucent=True,
                    cost=100.0)
BIDIR3 = CableType(name="bidir3", cores=3, delta=-2.0, cost=50.0)


def minimal_doc() -> dict:
    return {
        "device_types": [
            {"name": "opaque", "ports": 4, "rx_min": -14, "rx_max": 0.5,
             "tx_min": -5, "tx_max": 0, "cost": 300},
        ],
        "cable_types": [
            {"name": "bidir3", "cores": 3, "delta": -2, "cost": 50},
        ],
        "devices": [{"id": "0"}, {"id": "1"}],
        "cables": [{"id": "c", "a": "0", "b": "1"}],
        "signals": [{"id": "s", "source": "0", "target": "1"}],
        "options": {"auto_complete": False},
    }


class TestPropertyVectors:
    def test_opaque_device_vector(self):
        assert OPAQUE.properties() == (4.0, 0.0, -14.0, 0.5, -5.0, 0.0, 0.0,
                                       300.0)

    def test_translucent_device_vector(self):
        assert TRANSL.properties() == (2.0, -0.5, 0.0, 0.0, 0.0, 0.0, 1.0,
                                       100.0)

    def test_bidirectional_cable_vector(self):
        assert BIDIR3.properties() == (3.0, -2.0, 50.0, 0.0, 1.0, 1.0)

    def test_unidirectional_cable_vector(self):
        uni = CableType(name="u", cores=2, delta=-2.0, cost=30.0,
                        unidirectional=True)
        assert uni.properties() == (2.0, -2.0, 30.0, 1.0, 1.0, 1.0)

    def test_one_hot_selection_picks_the_type(self):
        props = element_properties((OPAQUE, TRANSL), [0.0, 1.0])
        assert props == TRANSL.properties()

    def test_zero_selection_gives_zero_vector(self):
        props = element_properties((OPAQUE, TRANSL), [0.0, 0.0])
        assert props == (0.0,) * 8

    def test_selection_length_mismatch(self):
        with pytest.raises(ValueError):
            element_properties((OPAQUE,), [1.0, 0.0])

    @given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=2),
           st.floats(-3, 3, allow_nan=False))
    def test_linearity_in_the_selection(self, sel, scale):
        base = element_properties((OPAQUE, TRANSL), sel)
        scaled = element_properties((OPAQUE, TRANSL),
                                    [scale * w for w in sel])
        for b, s in zip(base, scaled):
            assert s == pytest.approx(scale * b, abs=1e-9)


class TestTypeTableValidation:
    @pytest.mark.parametrize("uni,ab,ba,valid", [
        (False, True, True, True),
        (True, True, True, True),
        (True, True, False, True),
        (True, False, True, True),
        (False, False, False, False),
        (True, False, False, False),
        (False, True, False, False),
        (False, False, True, False),
    ])
    def test_direction_combinations(self, uni, ab, ba, valid):
        table = TypeTable(
            device_types=(OPAQUE,),
            cable_types=(CableType(name="c", cores=1, unidirectional=uni,
                                   allow_ab=ab, allow_ba=ba),),
        )
        violations = validate_type_table(table)
        if valid:
            assert violations == []
        else:
            assert any(rule == "direction" for rule, _, _ in violations)

    def test_opaque_with_gain_rejected(self):
        bad = DeviceType(name="d", ports=2, delta=-1.0)
        violations = validate_type_table(TypeTable((bad,), (BIDIR3,)))
        assert [v[0] for v in violations] == ["opaque-delta"]

    def test_translucent_with_power_bounds_rejected(self):
        bad = DeviceType(name="d", ports=2, translucent=True, tx_max=1.0)
        violations = validate_type_table(TypeTable((bad,), (BIDIR3,)))
        assert [v[0] for v in violations] == ["translucent-power"]

    def test_inverted_windows_rejected(self):
        bad = DeviceType(name="d", ports=2, rx_min=1.0, rx_max=0.0,
                         tx_min=2.0, tx_max=1.0)
        rules = {v[0] for v in validate_type_table(TypeTable((bad,), ()))}
        assert rules == {"rx-range", "tx-range"}

    def test_clean_catalogue_passes(self):
        assert validate_type_table(TypeTable((OPAQUE, TRANSL), (BIDIR3,))) == []


class TestLoading:
    def test_roundtrip_minimal(self):
        s = scenario_from_dict(minimal_doc())
        assert len(s.devices) == 2
        assert s.cables[0].endpoint_a == "0"
        assert s.signals[0].target == "1"
        assert not s.auto_complete

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioFormatError):
            load_scenario(str(tmp_path / "nope.json"))

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ScenarioFormatError):
            load_scenario(str(p))

    def test_load_valid_file(self, tmp_path):
        p = tmp_path / "ok.json"
        p.write_text(json.dumps(minimal_doc()))
        s = load_scenario(str(p))
        assert s.name == "ok"

    def test_self_loop_cable_rejected(self):
        doc = minimal_doc()
        doc["cables"][0]["b"] = "0"
        with pytest.raises(ScenarioSemanticError):
            scenario_from_dict(doc)

    def test_self_loop_signal_rejected(self):
        doc = minimal_doc()
        doc["signals"][0]["target"] = "0"
        with pytest.raises(ScenarioSemanticError):
            scenario_from_dict(doc)

    def test_unknown_type_reference_rejected(self):
        doc = minimal_doc()
        doc["devices"][0]["allowed_types"] = ["mystery"]
        with pytest.raises(ScenarioSemanticError):
            scenario_from_dict(doc)

    def test_unknown_endpoint_rejected(self):
        doc = minimal_doc()
        doc["signals"][0]["source"] = "99"
        with pytest.raises(ScenarioSemanticError):
            scenario_from_dict(doc)

    def test_fixed_type_requires_must_exist(self):
        doc = minimal_doc()
        doc["devices"][0]["fixed_type"] = "opaque"
        with pytest.raises(ScenarioSemanticError):
            scenario_from_dict(doc)

    def test_invalid_type_table_rejected_at_load(self):
        doc = minimal_doc()
        doc["cable_types"][0]["unidirectional"] = False
        doc["cable_types"][0]["allow_ab"] = False
        with pytest.raises(ScenarioSemanticError):
            scenario_from_dict(doc)

    def test_duplicate_ids_rejected(self):
        doc = minimal_doc()
        doc["devices"].append({"id": "0"})
        with pytest.raises(ScenarioSemanticError):
            scenario_from_dict(doc)


class TestExpansion:
    def _scenario(self, n_devices: int, cables=(), auto=True) -> Scenario:
        return Scenario(
            type_table=TypeTable((OPAQUE,), (BIDIR3,)),
            devices=tuple(DeviceSlot(id=str(i)) for i in range(n_devices)),
            cables=tuple(cables),
            signals=(),
            auto_complete=auto,
        )

    def test_five_devices_give_ten_candidate_pairs(self):
        mt = expand_max_topology(self._scenario(5))
        assert len(mt.cables) == 10
        pairs = {frozenset((c.endpoint_a, c.endpoint_b)) for c in mt.cables}
        assert len(pairs) == 10

    def test_declared_slots_are_kept_and_not_duplicated(self):
        declared = CableSlot(id="mine", endpoint_a="0", endpoint_b="1")
        mt = expand_max_topology(self._scenario(3, cables=[declared]))
        assert mt.cables[0].id == "mine"
        assert len(mt.cables) == 3

    def test_generated_slot_orientation_and_defaults(self):
        mt = expand_max_topology(self._scenario(2))
        slot = mt.cables[0]
        assert (slot.endpoint_a, slot.endpoint_b) == ("0", "1")
        assert slot.allowed_types is None
        assert not slot.must_exist

    def test_idempotent(self):
        mt = expand_max_topology(self._scenario(4))
        again = expand_max_topology(Scenario(
            type_table=mt.type_table, devices=mt.devices, cables=mt.cables,
            signals=mt.signals, auto_complete=True))
        assert [c.id for c in again.cables] == [c.id for c in mt.cables]

    def test_no_auto_complete_is_a_no_op(self):
        mt = expand_max_topology(self._scenario(4, auto=False))
        assert mt.cables == ()

    def test_signal_endpoints_preserved(self):
        s = Scenario(
            type_table=TypeTable((OPAQUE,), (BIDIR3,)),
            devices=(DeviceSlot(id="a"), DeviceSlot(id="b")),
            cables=(),
            signals=(Signal(id="x", source="a", target="b"),),
            auto_complete=True,
        )
        mt = expand_max_topology(s)
        assert mt.signals == s.signals
        assert len(mt.cables) == 1
