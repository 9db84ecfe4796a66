"""Scenario model for fiber network planning.

A scenario describes the design space of a network installation: the
catalogue of device and cable types, the device slots that may (or must)
be populated, the cable slots that may connect them, and the signals
that have to be routed between devices.  The planner then picks one type
per populated slot and one route per signal so that total cost is
minimal.

Device and cable types are characterised by small property vectors; a
concrete element's properties are obtained as the product of the type
property table with the element's one-hot type-selection vector (see
:func:`element_properties`).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace

logger = logging.getLogger(__name__)

# Property vector layout for device types.
DEV_PORTS = 0
DEV_DELTA = 1
DEV_RX_MIN = 2
DEV_RX_MAX = 3
DEV_TX_MIN = 4
DEV_TX_MAX = 5
DEV_TRANS = 6
DEV_COST = 7
N_DEVICE_PROPS = 8

# Property vector layout for cable types.
CAB_CORES = 0
CAB_DELTA = 1
CAB_COST = 2
CAB_UNI = 3
CAB_ALLOW_AB = 4
CAB_ALLOW_BA = 5
N_CABLE_PROPS = 6


class ScenarioError(Exception):
    """Base class for scenario loading problems."""


class ScenarioFormatError(ScenarioError):
    """The scenario file is not syntactically valid."""


class ScenarioSemanticError(ScenarioError):
    """The scenario file parses but violates a model invariant."""


@dataclass(frozen=True)
class DeviceType:
    """A purchasable switch/endpoint device model.

    Attributes:
        name: Unique type name within the scenario.
        ports: Number of cable attachment points.
        delta: Gain (negative: attenuation) applied by a translucent
            device when forwarding, in dB.
        rx_min: Minimum admissible receive power at an opaque receiver, dBm.
        rx_max: Maximum admissible receive power at an opaque receiver, dBm.
        tx_min: Minimum transmit power of an opaque transmitter, dBm.
        tx_max: Maximum transmit power of an opaque transmitter, dBm.
        translucent: True if the device forwards optically without
            terminating the signal; False for opaque (store-and-forward)
            devices that re-emit at their own transmit power.
        cost: Acquisition cost.
    """

    name: str
    ports: int
    delta: float = 0.0
    rx_min: float = 0.0
    rx_max: float = 0.0
    tx_min: float = 0.0
    tx_max: float = 0.0
    translucent: bool = False
    cost: float = 0.0

    def properties(self) -> tuple[float, ...]:
        """Property vector in canonical order."""
        return (
            float(self.ports),
            self.delta,
            self.rx_min,
            self.rx_max,
            self.tx_min,
            self.tx_max,
            1.0 if self.translucent else 0.0,
            self.cost,
        )


@dataclass(frozen=True)
class CableType:
    """A purchasable cable model.

    Attributes:
        name: Unique type name within the scenario.
        cores: Number of fiber cores; each core carries one signal in
            one direction.
        delta: Gain (negative: attenuation) per traversal, in dB.
        cost: Acquisition cost.
        unidirectional: True if all cores must carry signals in one and
            the same direction; False if the two directions may be mixed
            freely.
        allow_ab: Signals may travel from endpoint A towards endpoint B.
        allow_ba: Signals may travel from endpoint B towards endpoint A.
    """

    name: str
    cores: int
    delta: float = 0.0
    cost: float = 0.0
    unidirectional: bool = False
    allow_ab: bool = True
    allow_ba: bool = True

    def properties(self) -> tuple[float, ...]:
        """Property vector in canonical order."""
        return (
            float(self.cores),
            self.delta,
            self.cost,
            1.0 if self.unidirectional else 0.0,
            1.0 if self.allow_ab else 0.0,
            1.0 if self.allow_ba else 0.0,
        )


@dataclass(frozen=True)
class TypeTable:
    """The catalogue of device and cable types available in a scenario."""

    device_types: tuple[DeviceType, ...]
    cable_types: tuple[CableType, ...]

    def device_type(self, name: str) -> DeviceType:
        for t in self.device_types:
            if t.name == name:
                return t
        raise KeyError(name)

    def cable_type(self, name: str) -> CableType:
        for t in self.cable_types:
            if t.name == name:
                return t
        raise KeyError(name)

    @property
    def max_cores(self) -> int:
        return max((t.cores for t in self.cable_types), default=0)


@dataclass(frozen=True)
class DeviceSlot:
    """A possible device location.

    Attributes:
        id: Unique slot identifier.
        allowed_types: Names of device types this slot may be populated
            with; None means every type in the catalogue.
        fixed_type: Name of the type this slot is pre-populated with, or
            None if the planner may choose (or leave the slot empty).
        must_exist: If True the slot must be populated in any solution.
    """

    id: str
    allowed_types: tuple[str, ...] | None = None
    fixed_type: str | None = None
    must_exist: bool = False


@dataclass(frozen=True)
class CableSlot:
    """A possible cable between two device slots.

    Endpoint A/B orientation is fixed by the slot; directional cable
    properties are expressed relative to it.
    """

    id: str
    endpoint_a: str
    endpoint_b: str
    allowed_types: tuple[str, ...] | None = None
    fixed_type: str | None = None
    must_exist: bool = False

    def __post_init__(self) -> None:
        if self.endpoint_a == self.endpoint_b:
            raise ScenarioSemanticError(
                f"cable slot {self.id!r} connects {self.endpoint_a!r} to itself"
            )

    def other_end(self, device_id: str) -> str:
        return self.endpoint_b if device_id == self.endpoint_a else self.endpoint_a


@dataclass(frozen=True)
class Signal:
    """A unidirectional communication demand from one device to another."""

    id: str
    source: str
    target: str

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ScenarioSemanticError(
                f"signal {self.id!r} has identical source and target {self.source!r}"
            )


@dataclass(frozen=True)
class Scenario:
    """A complete planning problem as loaded from a scenario file."""

    type_table: TypeTable
    devices: tuple[DeviceSlot, ...]
    cables: tuple[CableSlot, ...]
    signals: tuple[Signal, ...]
    auto_complete: bool = False
    objective: str = "cost"
    name: str = "scenario"

    def device(self, device_id: str) -> DeviceSlot:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(device_id)


@dataclass(frozen=True)
class MaxTopology:
    """The fully expanded design space handed to the constraint builder.

    Identical to a scenario except that the cable slot list is complete:
    when auto-completion is requested, a candidate slot exists for every
    unordered device pair.
    """

    type_table: TypeTable
    devices: tuple[DeviceSlot, ...]
    cables: tuple[CableSlot, ...]
    signals: tuple[Signal, ...]
    objective: str = "cost"
    name: str = "scenario"

    def device(self, device_id: str) -> DeviceSlot:
        for d in self.devices:
            if d.id == device_id:
                return d
        raise KeyError(device_id)

    def cable(self, cable_id: str) -> CableSlot:
        for c in self.cables:
            if c.id == cable_id:
                return c
        raise KeyError(cable_id)

    def incident_cables(self, device_id: str) -> list[CableSlot]:
        return [c for c in self.cables if device_id in (c.endpoint_a, c.endpoint_b)]


# ---------------------------------------------------------------------------
# validation


def validate_type_table(table: TypeTable) -> list[tuple[str, str, str]]:
    """Check a type catalogue against the structural type invariants.

    Returns a list of ``(rule, type_name, detail)`` violation tuples;
    an empty list means the catalogue is well formed.

    The rules are:

    * opaque devices must not apply a forwarding gain (``delta == 0``);
    * translucent devices must have all four transmit/receive power
      bounds at zero (they never terminate or originate signals);
    * ``rx_min <= rx_max`` and ``tx_min <= tx_max``;
    * cable direction flags must come from the admissible combinations
      of (unidirectional, allow_ab, allow_ba): a cable must allow at
      least one direction, and a bidirectional cable that allows only
      one direction is ill-formed (it should be declared unidirectional).
    """
    violations: list[tuple[str, str, str]] = []
    for t in table.device_types:
        if not t.translucent and t.delta != 0.0:
            violations.append(
                ("opaque-delta", t.name, f"opaque device has delta {t.delta}")
            )
        if t.translucent:
            bounds = (t.rx_min, t.rx_max, t.tx_min, t.tx_max)
            if any(b != 0.0 for b in bounds):
                violations.append(
                    ("translucent-power", t.name,
                     f"translucent device has nonzero power bounds {bounds}")
                )
        if t.rx_min > t.rx_max:
            violations.append(
                ("rx-range", t.name, f"rx_min {t.rx_min} > rx_max {t.rx_max}")
            )
        if t.tx_min > t.tx_max:
            violations.append(
                ("tx-range", t.name, f"tx_min {t.tx_min} > tx_max {t.tx_max}")
            )
        if t.ports < 0:
            violations.append(("ports", t.name, f"negative port count {t.ports}"))
    for t in table.cable_types:
        combo = (t.unidirectional, t.allow_ab, t.allow_ba)
        if not t.allow_ab and not t.allow_ba:
            violations.append(
                ("direction", t.name, f"no direction allowed {combo}")
            )
        elif not t.unidirectional and t.allow_ab != t.allow_ba:
            violations.append(
                ("direction", t.name,
                 f"bidirectional cable restricted to one direction {combo}")
            )
        if t.cores < 1:
            violations.append(("cores", t.name, f"core count {t.cores} < 1"))
    return violations


def _validate_scenario(s: Scenario) -> None:
    """Raise ScenarioSemanticError on any structural inconsistency."""
    tv = validate_type_table(s.type_table)
    if tv:
        details = "; ".join(f"{r}[{n}]: {d}" for r, n, d in tv)
        raise ScenarioSemanticError(f"invalid type table: {details}")

    dev_names = {t.name for t in s.type_table.device_types}
    cab_names = {t.name for t in s.type_table.cable_types}
    if len(dev_names) != len(s.type_table.device_types):
        raise ScenarioSemanticError("duplicate device type names")
    if len(cab_names) != len(s.type_table.cable_types):
        raise ScenarioSemanticError("duplicate cable type names")

    dev_ids = [d.id for d in s.devices]
    if len(set(dev_ids)) != len(dev_ids):
        raise ScenarioSemanticError("duplicate device slot ids")
    cab_ids = [c.id for c in s.cables]
    if len(set(cab_ids)) != len(cab_ids):
        raise ScenarioSemanticError("duplicate cable slot ids")
    sig_ids = [x.id for x in s.signals]
    if len(set(sig_ids)) != len(sig_ids):
        raise ScenarioSemanticError("duplicate signal ids")

    def check_slot_types(slot_id: str, allowed, fixed, names, kind: str) -> None:
        if allowed is not None:
            for n in allowed:
                if n not in names:
                    raise ScenarioSemanticError(
                        f"{kind} slot {slot_id!r} allows unknown type {n!r}"
                    )
        if fixed is not None:
            if fixed not in names:
                raise ScenarioSemanticError(
                    f"{kind} slot {slot_id!r} fixed to unknown type {fixed!r}"
                )
            if allowed is not None and fixed not in allowed:
                raise ScenarioSemanticError(
                    f"{kind} slot {slot_id!r} fixed to disallowed type {fixed!r}"
                )

    for d in s.devices:
        check_slot_types(d.id, d.allowed_types, d.fixed_type, dev_names, "device")
        if d.fixed_type is not None and not d.must_exist:
            raise ScenarioSemanticError(
                f"device slot {d.id!r} has a fixed type but must_exist is false"
            )
    known = set(dev_ids)
    for c in s.cables:
        check_slot_types(c.id, c.allowed_types, c.fixed_type, cab_names, "cable")
        for end in (c.endpoint_a, c.endpoint_b):
            if end not in known:
                raise ScenarioSemanticError(
                    f"cable slot {c.id!r} references unknown device {end!r}"
                )
    for sig in s.signals:
        for end in (sig.source, sig.target):
            if end not in known:
                raise ScenarioSemanticError(
                    f"signal {sig.id!r} references unknown device {end!r}"
                )
    if s.objective != "cost":
        raise ScenarioSemanticError(f"unknown objective {s.objective!r}")


# ---------------------------------------------------------------------------
# loading


def _require(mapping: dict, key: str, ctx: str):
    if key not in mapping:
        raise ScenarioFormatError(f"{ctx}: missing required key {key!r}")
    return mapping[key]


def _parse_device_type(raw: dict) -> DeviceType:
    try:
        return DeviceType(
            name=str(_require(raw, "name", "device type")),
            ports=int(_require(raw, "ports", "device type")),
            delta=float(raw.get("delta", 0.0)),
            rx_min=float(raw.get("rx_min", 0.0)),
            rx_max=float(raw.get("rx_max", 0.0)),
            tx_min=float(raw.get("tx_min", 0.0)),
            tx_max=float(raw.get("tx_max", 0.0)),
            translucent=bool(raw.get("translucent", False)),
            cost=float(raw.get("cost", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"bad device type entry {raw!r}: {exc}") from exc


def _parse_cable_type(raw: dict) -> CableType:
    try:
        return CableType(
            name=str(_require(raw, "name", "cable type")),
            cores=int(_require(raw, "cores", "cable type")),
            delta=float(raw.get("delta", 0.0)),
            cost=float(raw.get("cost", 0.0)),
            unidirectional=bool(raw.get("unidirectional", False)),
            allow_ab=bool(raw.get("allow_ab", True)),
            allow_ba=bool(raw.get("allow_ba", True)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"bad cable type entry {raw!r}: {exc}") from exc


def _parse_types_field(raw) -> tuple[str, ...] | None:
    if raw is None:
        return None
    if not isinstance(raw, list):
        raise ScenarioFormatError(f"allowed_types must be a list, got {raw!r}")
    return tuple(str(x) for x in raw)


def scenario_from_dict(doc: dict, name: str = "scenario") -> Scenario:
    """Build a validated Scenario from a parsed scenario document."""
    if not isinstance(doc, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    table = TypeTable(
        device_types=tuple(
            _parse_device_type(t) for t in _require(doc, "device_types", "scenario")
        ),
        cable_types=tuple(
            _parse_cable_type(t) for t in _require(doc, "cable_types", "scenario")
        ),
    )
    devices = []
    for raw in _require(doc, "devices", "scenario"):
        if not isinstance(raw, dict):
            raise ScenarioFormatError(f"bad device slot entry {raw!r}")
        devices.append(
            DeviceSlot(
                id=str(_require(raw, "id", "device slot")),
                allowed_types=_parse_types_field(raw.get("allowed_types")),
                fixed_type=(None if raw.get("fixed_type") is None
                            else str(raw["fixed_type"])),
                must_exist=bool(raw.get("must_exist", False)),
            )
        )
    cables = []
    for raw in doc.get("cables", []):
        if not isinstance(raw, dict):
            raise ScenarioFormatError(f"bad cable slot entry {raw!r}")
        cables.append(
            CableSlot(
                id=str(_require(raw, "id", "cable slot")),
                endpoint_a=str(_require(raw, "a", "cable slot")),
                endpoint_b=str(_require(raw, "b", "cable slot")),
                allowed_types=_parse_types_field(raw.get("allowed_types")),
                fixed_type=(None if raw.get("fixed_type") is None
                            else str(raw["fixed_type"])),
                must_exist=bool(raw.get("must_exist", False)),
            )
        )
    signals = []
    for raw in doc.get("signals", []):
        if not isinstance(raw, dict):
            raise ScenarioFormatError(f"bad signal entry {raw!r}")
        signals.append(
            Signal(
                id=str(_require(raw, "id", "signal")),
                source=str(_require(raw, "source", "signal")),
                target=str(_require(raw, "target", "signal")),
            )
        )
    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ScenarioFormatError("options must be an object")
    s = Scenario(
        type_table=table,
        devices=tuple(devices),
        cables=tuple(cables),
        signals=tuple(signals),
        auto_complete=bool(options.get("auto_complete", False)),
        objective=str(options.get("objective", "cost")),
        name=str(doc.get("name", name)),
    )
    _validate_scenario(s)
    return s


def load_scenario(path: str) -> Scenario:
    """Load and validate a scenario from a JSON file.

    Raises:
        ScenarioFormatError: on unreadable or syntactically invalid input.
        ScenarioSemanticError: on model-level inconsistencies (unknown
            type references, self-loop cables, invalid type table, ...).
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"invalid JSON in {path}: {exc}") from exc
    import os

    return scenario_from_dict(doc, name=os.path.splitext(os.path.basename(path))[0])


# ---------------------------------------------------------------------------
# expansion


def _auto_slot_id(a: str, b: str) -> str:
    return f"auto_{a}_{b}"


def expand_max_topology(s: Scenario) -> MaxTopology:
    """Expand a scenario into the full design space.

    If the scenario requests auto-completion, a candidate cable slot is
    generated for every unordered device pair that no declared slot
    already connects.  Generated slots allow every cable type, are
    optional, and use the lower device (in declaration order) as
    endpoint A.  The expansion is idempotent: re-expanding an already
    complete scenario adds nothing.
    """
    cables = list(s.cables)
    if s.auto_complete:
        covered = {frozenset((c.endpoint_a, c.endpoint_b)) for c in cables}
        ids = [d.id for d in s.devices]
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                pair = frozenset((a, b))
                if pair in covered:
                    continue
                cables.append(CableSlot(id=_auto_slot_id(a, b), endpoint_a=a,
                                        endpoint_b=b))
    logger.debug("expanded %s: %d devices, %d cable slots, %d signals",
                 s.name, len(s.devices), len(cables), len(s.signals))
    return MaxTopology(
        type_table=s.type_table,
        devices=s.devices,
        cables=tuple(cables),
        signals=s.signals,
        objective=s.objective,
        name=s.name,
    )


# ---------------------------------------------------------------------------
# element properties


def element_properties(types: tuple, selection: list[float]) -> tuple[float, ...]:
    """Properties of an element as property-table x selection-vector.

    Args:
        types: The device or cable type tuple the selection indexes into.
        selection: One weight per type; for a concrete element this is
            the one-hot type choice (all zero for an unpopulated slot).

    Returns:
        The property vector of the element; all-zero when the slot is
        unpopulated.
    """
    if len(types) != len(selection):
        raise ValueError(
            f"selection length {len(selection)} != type count {len(types)}"
        )
    if not types:
        return ()
    n = len(types[0].properties())
    out = [0.0] * n
    for t, w in zip(types, selection):
        if w == 0.0:
            continue
        for i, p in enumerate(t.properties()):
            out[i] += w * p
    return tuple(out)


__all__ = [
    "CableSlot",
    "CableType",
    "DeviceSlot",
    "DeviceType",
    "MaxTopology",
    "Scenario",
    "ScenarioError",
    "ScenarioFormatError",
    "ScenarioSemanticError",
    "Signal",
    "TypeTable",
    "element_properties",
    "expand_max_topology",
    "load_scenario",
    "scenario_from_dict",
    "validate_type_table",
]
