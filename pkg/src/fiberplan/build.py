"""Compilation of a planning design space into a mixed-integer program.

The builder turns a :class:`~fiberplan.scenario.MaxTopology` into a
:class:`~fiberplan.milp.MilpProblem` whose optimal points are exactly
the cost-minimal valid network topologies:

* one-hot type selection per device and cable slot,
* port budget per device,
* per-cable core capacity split over the two directions,
* flow-conservation routing of every signal over the candidate cables,
* optical link budget tracking with big-M indicator rows: signal power
  is attenuated by every cable and translucent device it traverses and
  must land inside the receiver window of every opaque device that
  terminates or regenerates it.

Every emitted row is recorded in a trace mapping row index to a
constraint-family tag and the element it constrains, so that a solved
model can be related back to the network it describes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import IO

from .milp import (
    MilpProblem,
    Sense,
    VarKind,
    VariableRegistry,
    add_row,
    add_variable,
    set_objective,
)
from .scenario import (
    CAB_ALLOW_AB,
    CAB_ALLOW_BA,
    CAB_CORES,
    CAB_COST,
    CAB_DELTA,
    CAB_UNI,
    DEV_COST,
    DEV_DELTA,
    DEV_PORTS,
    DEV_RX_MAX,
    DEV_RX_MIN,
    DEV_TRANS,
    DEV_TX_MAX,
    DEV_TX_MIN,
    CableSlot,
    DeviceSlot,
    MaxTopology,
    Signal,
)

logger = logging.getLogger(__name__)


class BuildError(Exception):
    """The design space cannot be compiled into a model."""


@dataclass(frozen=True)
class PowerLimit:
    """Big-M constant for the link-budget rows.

    The value bounds the absolute power (dBm) reachable anywhere in any
    valid topology: a worst-case transmit level plus the worst-case
    accumulated gain/attenuation over the longest possible simple path,
    plus the worst-case receiver window extent.

    Attributes:
        value: The big-M constant itself.
        tx_term: Largest absolute transmit-power bound over device types.
        rx_term: Largest absolute receive-power bound over device types.
        device_term: Largest absolute forwarding gain over device types.
        fiber_term: Largest absolute cable gain over cable types.
    """

    value: float
    tx_term: float
    rx_term: float
    device_term: float
    fiber_term: float


def attainable_power_interval(mt: MaxTopology) -> tuple[float, float]:
    """Closed interval containing every power value of a valid topology.

    Any tracked power is either the inert ``0`` of a dormant variable,
    a launch level inside some transmit window, a receive level inside
    some receiver window, the single-gain level of an idle forwarding
    device, or an intermediate chain level between a launch and the
    receive level it must reach.  With non-positive gains the chain
    levels lie between those two; positive gains can push an
    intermediate level past them by at most the accumulated positive
    gain of the longest simple path.
    """
    dts = mt.type_table.device_types
    cts = mt.type_table.cable_types
    n = len(mt.devices)
    pos = (max(0, n - 2) * max((max(0.0, t.delta) for t in dts), default=0.0)
           + max(0, n - 1) * max((max(0.0, t.delta) for t in cts), default=0.0))
    hi = max([0.0] + [t.tx_max for t in dts] + [t.rx_max for t in dts]
             + [t.delta for t in dts]) + pos
    lo = min([0.0] + [t.tx_min for t in dts] + [t.rx_min for t in dts]
             + [t.delta for t in dts]) - pos
    return lo, hi


def compute_power_limit(mt: MaxTopology) -> PowerLimit:
    """Smallest safe big-M for the link-budget rows of this design space.

    A simple path visits at most ``|D|`` devices, hence at most
    ``|D| - 2`` forwarding devices and ``|D| - 1`` cables, each
    contributing at most its worst absolute gain.
    """
    dts = mt.type_table.device_types
    cts = mt.type_table.cable_types
    tx_term = max((max(abs(t.tx_min), abs(t.tx_max)) for t in dts), default=0.0)
    rx_term = max((max(abs(t.rx_min), abs(t.rx_max)) for t in dts), default=0.0)
    device_term = max((abs(t.delta) for t in dts), default=0.0)
    fiber_term = max((abs(t.delta) for t in cts), default=0.0)
    n = len(mt.devices)
    value = (tx_term + max(0, n - 2) * device_term
             + max(0, n - 1) * fiber_term + rx_term)
    return PowerLimit(value=value, tx_term=tx_term, rx_term=rx_term,
                      device_term=device_term, fiber_term=fiber_term)


# Variable naming scheme shared with the decoder.


def dev_type_var(dev_id: str, type_name: str) -> str:
    return f"D{dev_id}.type.{type_name}"


def cab_type_var(cab_id: str, type_name: str) -> str:
    return f"F{cab_id}.type.{type_name}"


def cab_use_var(cab_id: str, direction: str) -> str:
    return f"F{cab_id}.use{direction}"


def cab_allow_var(cab_id: str, direction: str) -> str:
    return f"F{cab_id}.allow{direction}"


def sig_cable_var(sig_id: str, cab_id: str, direction: str) -> str:
    return f"S{sig_id}.F{cab_id}.{direction}"


def sig_cable_power_var(sig_id: str, cab_id: str, direction: str) -> str:
    return f"S{sig_id}.F{cab_id}.power{direction}"


def sig_dev_var(sig_id: str, dev_id: str, quantity: str) -> str:
    return f"S{sig_id}.D{dev_id}.{quantity}"


@dataclass
class BuildArtifacts:
    """Everything produced by a model build."""

    problem: MilpProblem
    registry: VariableRegistry
    trace: list[tuple[int, str, str]] = field(default_factory=list)
    power_limit: PowerLimit | None = None
    max_topology: MaxTopology | None = None

    def write_trace(self, stream: IO[str]) -> None:
        """Write the row trace as tab-separated ``row_id tag element_id``."""
        for row_id, tag, element in self.trace:
            stream.write(f"{row_id}\t{tag}\t{element}\n")


class ModelBuilder:
    """Stateful builder that assembles the program element by element."""

    def __init__(self, mt: MaxTopology, strengthen: bool = False) -> None:
        self.mt = mt
        self.strengthen = strengthen
        self.power_limit = compute_power_limit(mt)
        problem = MilpProblem(name=mt.name)
        registry = VariableRegistry()
        self.art = BuildArtifacts(problem=problem, registry=registry,
                                  power_limit=self.power_limit,
                                  max_topology=mt)
        # Devices named as a signal source or target must be opaque: a
        # translucent device can neither originate nor terminate a
        # signal, so those slots have their translucent types masked out
        # up front.
        self.endpoint_devices = {s.source for s in mt.signals} | {
            s.target for s in mt.signals
        }
        self.dev_type_cols: dict[str, dict[str, int]] = {}
        self.cab_type_cols: dict[str, dict[str, int]] = {}

    # -- low-level helpers --------------------------------------------------

    def _var(self, name: str, kind: VarKind, lo: float, hi: float) -> int:
        return add_variable(self.art.problem, self.art.registry, name, kind,
                            lo, hi)

    def _row(self, coeffs: dict[int, float], rel: str, rhs: float,
             tag: str, element: str) -> int:
        row_id = add_row(self.art.problem, coeffs, rel, rhs)
        self.art.trace.append((row_id, tag, element))
        return row_id

    def _col(self, name: str) -> int:
        return self.art.registry.col(name)

    def _dev_prop_expr(self, dev_id: str, prop: int) -> dict[int, float]:
        cols = self.dev_type_cols[dev_id]
        out: dict[int, float] = {}
        for t in self.mt.type_table.device_types:
            coef = t.properties()[prop]
            if coef != 0.0:
                out[cols[t.name]] = coef
        return out

    def _cab_prop_expr(self, cab_id: str, prop: int) -> dict[int, float]:
        cols = self.cab_type_cols[cab_id]
        out: dict[int, float] = {}
        for t in self.mt.type_table.cable_types:
            coef = t.properties()[prop]
            if coef != 0.0:
                out[cols[t.name]] = coef
        return out

    @staticmethod
    def _merge(*exprs: dict[int, float]) -> dict[int, float]:
        out: dict[int, float] = {}
        for expr in exprs:
            for j, c in expr.items():
                out[j] = out.get(j, 0.0) + c
        return {j: c for j, c in out.items() if c != 0.0}

    @staticmethod
    def _scale(expr: dict[int, float], factor: float) -> dict[int, float]:
        return {j: factor * c for j, c in expr.items()}

    # -- type selection -----------------------------------------------------

    def _effective_device_types(self, slot: DeviceSlot) -> set[str]:
        names = {t.name for t in self.mt.type_table.device_types}
        allowed = set(slot.allowed_types) if slot.allowed_types is not None else names
        if slot.fixed_type is not None:
            allowed &= {slot.fixed_type}
        if slot.id in self.endpoint_devices:
            opaque = {t.name for t in self.mt.type_table.device_types
                      if not t.translucent}
            if slot.fixed_type is not None and slot.fixed_type not in opaque:
                raise BuildError(
                    f"device {slot.id!r} terminates a signal but is fixed to "
                    f"translucent type {slot.fixed_type!r}"
                )
            allowed &= opaque
        if slot.must_exist and not allowed:
            raise BuildError(
                f"device {slot.id!r} must exist but no admissible type remains"
            )
        return allowed

    def encode_type_assignment(self, slot: DeviceSlot | CableSlot) -> None:
        """One-hot type selection for a device or cable slot.

        Registers one binary per catalogue type.  Emits the selection
        row (``= 1`` for mandatory slots, ``<= 1`` otherwise), a pin row
        for a fixed type, and a zero row for every type the slot does
        not admit.
        """
        is_device = isinstance(slot, DeviceSlot)
        if is_device:
            types = self.mt.type_table.device_types
            cols = {
                t.name: self._var(dev_type_var(slot.id, t.name), VarKind.BINARY,
                                  0.0, 1.0)
                for t in types
            }
            self.dev_type_cols[slot.id] = cols
            allowed = self._effective_device_types(slot)
            element = f"D{slot.id}"
        else:
            types = self.mt.type_table.cable_types
            cols = {
                t.name: self._var(cab_type_var(slot.id, t.name), VarKind.BINARY,
                                  0.0, 1.0)
                for t in types
            }
            self.cab_type_cols[slot.id] = cols
            allowed = (set(slot.allowed_types) if slot.allowed_types is not None
                       else {t.name for t in types})
            if slot.fixed_type is not None:
                allowed &= {slot.fixed_type}
            if slot.must_exist and not allowed:
                raise BuildError(
                    f"cable {slot.id!r} must exist but no admissible type remains"
                )
            element = f"F{slot.id}"
        self._row({c: 1.0 for c in cols.values()},
                  "=" if slot.must_exist else "<=", 1.0, "type-choice", element)
        for t in types:
            if t.name not in allowed:
                self._row({cols[t.name]: 1.0}, "=", 0.0, "type-mask",
                          f"{element}.{t.name}")
        if slot.fixed_type is not None:
            self._row({cols[slot.fixed_type]: 1.0}, "=", 1.0, "type-fixed",
                      f"{element}.{slot.fixed_type}")

    # -- structural constraints --------------------------------------------

    def encode_port_limits(self, device: DeviceSlot) -> None:
        """Incident populated cables may not exceed the device's ports."""
        coeffs = self._scale(self._dev_prop_expr(device.id, DEV_PORTS), -1.0)
        for cab in self.mt.incident_cables(device.id):
            coeffs = self._merge(
                coeffs, {c: 1.0 for c in self.cab_type_cols[cab.id].values()}
            )
        self._row(coeffs, "<=", 0.0, "port-limit", f"D{device.id}")

    def encode_direction_and_cores(self, cable: CableSlot) -> None:
        """Core capacity and directional admissibility of one cable slot.

        Registers the integer per-direction core-usage counters and the
        binary direction-enable flags, then ties them to the selected
        type: total usage is capped by the core count, each direction
        may only be enabled if the type admits it, and a unidirectional
        type enables exactly one of the two directions while a
        bidirectional one enables both.
        """
        max_cores = self.mt.type_table.max_cores
        use_ab = self._var(cab_use_var(cable.id, "AB"), VarKind.INTEGER,
                           0.0, float(max_cores))
        use_ba = self._var(cab_use_var(cable.id, "BA"), VarKind.INTEGER,
                           0.0, float(max_cores))
        allow_ab = self._var(cab_allow_var(cable.id, "AB"), VarKind.BINARY,
                             0.0, 1.0)
        allow_ba = self._var(cab_allow_var(cable.id, "BA"), VarKind.BINARY,
                             0.0, 1.0)
        element = f"F{cable.id}"
        cores_expr = self._cab_prop_expr(cable.id, CAB_CORES)
        self._row(self._merge({use_ab: 1.0, use_ba: 1.0},
                              self._scale(cores_expr, -1.0)),
                  "<=", 0.0, "core-capacity", element)
        self._row(self._merge({allow_ab: 1.0},
                              self._scale(self._cab_prop_expr(cable.id,
                                                              CAB_ALLOW_AB),
                                          -1.0)),
                  "<=", 0.0, "direction-allow-ab", element)
        self._row(self._merge({allow_ba: 1.0},
                              self._scale(self._cab_prop_expr(cable.id,
                                                              CAB_ALLOW_BA),
                                          -1.0)),
                  "<=", 0.0, "direction-allow-ba", element)
        # Populated bidirectional: both directions enabled.  Populated
        # unidirectional: exactly one.  Unpopulated: none.
        sel = {c: 1.0 for c in self.cab_type_cols[cable.id].values()}
        uni_expr = self._cab_prop_expr(cable.id, CAB_UNI)
        self._row(self._merge({allow_ab: 1.0, allow_ba: 1.0},
                              self._scale(sel, -2.0), uni_expr),
                  "=", 0.0, "direction-parity", element)
        self._row({use_ab: 1.0, allow_ab: -float(max_cores)}, "<=", 0.0,
                  "use-allow-ab", element)
        self._row({use_ba: 1.0, allow_ba: -float(max_cores)}, "<=", 0.0,
                  "use-allow-ba", element)

    # -- routing ------------------------------------------------------------

    def encode_routing(self, signal: Signal) -> None:
        """Flow conservation for one signal over the candidate cables.

        Registers the per-cable direction indicators and the per-device
        transmit/receive indicators.  The source always transmits and
        never receives, the target the converse (realized as fixed
        variable bounds); every other device forwards: it transmits iff
        it receives.  Degree rows equate each device's indicators with
        the number of adjacent cable cores the signal occupies.
        """
        sid = signal.id
        for cab in self.mt.cables:
            self._var(sig_cable_var(sid, cab.id, "AB"), VarKind.BINARY, 0.0, 1.0)
            self._var(sig_cable_var(sid, cab.id, "BA"), VarKind.BINARY, 0.0, 1.0)
        for dev in self.mt.devices:
            if dev.id == signal.source:
                tx_lo = tx_hi = 1.0
                rx_lo = rx_hi = 0.0
            elif dev.id == signal.target:
                tx_lo = tx_hi = 0.0
                rx_lo = rx_hi = 1.0
            else:
                tx_lo = rx_lo = 0.0
                tx_hi = rx_hi = 1.0
            does_tx = self._var(sig_dev_var(sid, dev.id, "doesTx"),
                                VarKind.BINARY, tx_lo, tx_hi)
            does_rx = self._var(sig_dev_var(sid, dev.id, "doesRx"),
                                VarKind.BINARY, rx_lo, rx_hi)
            if dev.id not in (signal.source, signal.target):
                self._row({does_tx: 1.0, does_rx: -1.0}, "=", 0.0,
                          "route-transit", f"S{sid}.D{dev.id}")
        for dev in self.mt.devices:
            element = f"S{sid}.D{dev.id}"
            out_coeffs = {self._col(sig_dev_var(sid, dev.id, "doesTx")): 1.0}
            in_coeffs = {self._col(sig_dev_var(sid, dev.id, "doesRx")): 1.0}
            for cab in self.mt.incident_cables(dev.id):
                leaving = "AB" if cab.endpoint_a == dev.id else "BA"
                arriving = "BA" if cab.endpoint_a == dev.id else "AB"
                out_coeffs[self._col(sig_cable_var(sid, cab.id, leaving))] = -1.0
                in_coeffs[self._col(sig_cable_var(sid, cab.id, arriving))] = -1.0
            self._row(out_coeffs, "=", 0.0, "route-tx-degree", element)
            self._row(in_coeffs, "=", 0.0, "route-rx-degree", element)

    def encode_core_demand(self, cable: CableSlot) -> None:
        """Each direction's core usage equals the signals routed over it."""
        for direction, tag in (("AB", "core-demand-ab"), ("BA", "core-demand-ba")):
            coeffs = {self._col(cab_use_var(cable.id, direction)): 1.0}
            for sig in self.mt.signals:
                coeffs[self._col(sig_cable_var(sig.id, cable.id, direction))] = -1.0
            self._row(coeffs, "=", 0.0, tag, f"F{cable.id}")

    # -- link budget --------------------------------------------------------

    def register_power_variables(self, signal: Signal) -> None:
        """Register the power bookkeeping columns for one signal.

        Device and cable link-budget rows reference each other's
        columns, so all of them exist before either encoder runs.
        """
        p = self.power_limit.value
        lo, hi = -p, p
        if self.strengthen:
            a_lo, a_hi = attainable_power_interval(self.mt)
            lo, hi = max(lo, a_lo), min(hi, a_hi)
        sid = signal.id
        for dev in self.mt.devices:
            for q in ("Rx", "transmit", "TxAvail", "Tx"):
                self._var(sig_dev_var(sid, dev.id, q), VarKind.CONTINUOUS,
                          lo, hi)
            self._var(sig_dev_var(sid, dev.id, "opaqueRx"), VarKind.BINARY,
                      0.0, 1.0)
        for cab in self.mt.cables:
            for direction in ("AB", "BA"):
                self._var(sig_cable_power_var(sid, cab.id, direction),
                          VarKind.CONTINUOUS, lo, hi)

    def encode_cable_attenuation(self, signal: Signal, cable: CableSlot) -> None:
        """Power carried by one cable for one signal.

        When the signal occupies a core in a given direction, the power
        at the far end equals the near-end device's launch power plus
        the cable gain; otherwise the power bookkeeping variable is
        pinned to zero.  Both implications are big-M encoded with the
        design-space power limit as M.
        """
        p = self.power_limit.value
        sid = signal.id
        delta = self._cab_prop_expr(cable.id, CAB_DELTA)
        for direction, tx_dev in (("AB", cable.endpoint_a),
                                  ("BA", cable.endpoint_b)):
            power = self._col(sig_cable_power_var(sid, cable.id, direction))
            used = self._col(sig_cable_var(sid, cable.id, direction))
            tx = self._col(sig_dev_var(sid, tx_dev, "Tx"))
            element = f"S{sid}.F{cable.id}"
            lo = direction.lower()
            self._row(self._merge({power: 1.0, tx: -1.0},
                                  self._scale(delta, -1.0), {used: p}),
                      "<=", p, f"cable-power-track-ub-{lo}", element)
            self._row(self._merge({power: -1.0, tx: 1.0}, delta, {used: p}),
                      "<=", p, f"cable-power-track-lb-{lo}", element)
            self._row({power: 1.0, used: -p}, "<=", 0.0,
                      f"cable-power-off-ub-{lo}", element)
            self._row({power: -1.0, used: -p}, "<=", 0.0,
                      f"cable-power-off-lb-{lo}", element)

    def encode_device_attenuation(self, signal: Signal, device: DeviceSlot) -> None:
        """Receive window and launch power of one device for one signal.

        ``Rx`` collects the incoming cable powers.  ``opaqueRx`` is the
        conjunction "receives and is not translucent": only then is the
        receiver window enforced.  ``TxAvail`` is the power the device
        could pass on: the attenuated input for a translucent device,
        the freely chosen regenerated level ``transmit`` otherwise.
        ``Tx`` equals ``TxAvail`` when the device actually transmits and
        zero otherwise.
        """
        p = self.power_limit.value
        sid = signal.id
        element = f"S{sid}.D{device.id}"
        rx = self._col(sig_dev_var(sid, device.id, "Rx"))
        transmit = self._col(sig_dev_var(sid, device.id, "transmit"))
        tx_avail = self._col(sig_dev_var(sid, device.id, "TxAvail"))
        tx = self._col(sig_dev_var(sid, device.id, "Tx"))
        opaque_rx = self._col(sig_dev_var(sid, device.id, "opaqueRx"))
        does_rx = self._col(sig_dev_var(sid, device.id, "doesRx"))
        does_tx = self._col(sig_dev_var(sid, device.id, "doesTx"))
        trans = self._dev_prop_expr(device.id, DEV_TRANS)

        rx_sum = {rx: 1.0}
        for cab in self.mt.incident_cables(device.id):
            arriving = "BA" if cab.endpoint_a == device.id else "AB"
            rx_sum[self._col(sig_cable_power_var(sid, cab.id, arriving))] = -1.0
        self._row(rx_sum, "=", 0.0, "rx-sum", element)

        # opaqueRx <-> doesRx AND NOT translucent.
        self._row({opaque_rx: 1.0, does_rx: -1.0}, "<=", 0.0,
                  "opaque-rx-ub-rx", element)
        self._row(self._merge({opaque_rx: 1.0}, trans), "<=", 1.0,
                  "opaque-rx-ub-trans", element)
        self._row(self._merge({opaque_rx: 1.0, does_rx: -1.0}, trans),
                  ">=", 0.0, "opaque-rx-lb", element)

        rx_max = self._dev_prop_expr(device.id, DEV_RX_MAX)
        rx_min = self._dev_prop_expr(device.id, DEV_RX_MIN)
        self._row(self._merge({rx: 1.0}, self._scale(rx_max, -1.0),
                              {opaque_rx: p}),
                  "<=", p, "rx-window-max", element)
        self._row(self._merge({rx: -1.0}, rx_min, {opaque_rx: p}),
                  "<=", p, "rx-window-min", element)

        delta = self._dev_prop_expr(device.id, DEV_DELTA)
        self._row(self._merge({tx_avail: 1.0, rx: -1.0},
                              self._scale(delta, -1.0), self._scale(trans, p)),
                  "<=", p, "txavail-forward-ub", element)
        self._row(self._merge({tx_avail: -1.0, rx: 1.0}, delta,
                              self._scale(trans, p)),
                  "<=", p, "txavail-forward-lb", element)
        self._row(self._merge({tx_avail: 1.0, transmit: -1.0},
                              self._scale(trans, -p)),
                  "<=", 0.0, "txavail-fresh-ub", element)
        self._row(self._merge({tx_avail: -1.0, transmit: 1.0},
                              self._scale(trans, -p)),
                  "<=", 0.0, "txavail-fresh-lb", element)

        tx_max = self._dev_prop_expr(device.id, DEV_TX_MAX)
        tx_min = self._dev_prop_expr(device.id, DEV_TX_MIN)
        self._row(self._merge({transmit: 1.0}, self._scale(tx_max, -1.0)),
                  "<=", 0.0, "transmit-max", element)
        self._row(self._merge({transmit: -1.0}, tx_min),
                  "<=", 0.0, "transmit-min", element)

        self._row({tx: 1.0, tx_avail: -1.0, does_tx: p}, "<=", p,
                  "tx-on-ub", element)
        self._row({tx: -1.0, tx_avail: 1.0, does_tx: p}, "<=", p,
                  "tx-on-lb", element)
        self._row({tx: 1.0, does_tx: -p}, "<=", 0.0, "tx-off-ub", element)
        self._row({tx: -1.0, does_tx: -p}, "<=", 0.0, "tx-off-lb", element)

    # -- LP strengthening ---------------------------------------------------

    def encode_strengthening(self) -> None:
        """Valid inequalities that tighten the LP relaxation.

        Every row emitted here is either implied at integer points or
        removes only idle or interchangeable integer points, so neither
        the optimal objective value nor the set of decodable optimal
        topologies changes.  The rows exist purely to give the LP
        relaxation of large design spaces a stronger bound:

        * ``cut-hop-allow-*`` — a signal hop needs its cable direction
          enabled (implied through the aggregated core counters);
        * ``cut-single-direction`` — one signal never occupies both
          directions of one cable (a simple path cannot; removes only
          undecodable ping-pong loops);
        * ``cut-forward-populated`` / ``cut-receive-populated`` — a
          device that forwards a signal is populated (implied through
          the port rows);
        * ``cut-endpoint-cable`` — every signal endpoint has at least
          one populated incident cable slot;
        * ``cut-parallel-order`` — interchangeable parallel cable slots
          are populated in declaration order (symmetry breaking).
        """
        for sig in self.mt.signals:
            for cab in self.mt.cables:
                element = f"S{sig.id}.F{cab.id}"
                ab = self._col(sig_cable_var(sig.id, cab.id, "AB"))
                ba = self._col(sig_cable_var(sig.id, cab.id, "BA"))
                self._row({ab: 1.0,
                           self._col(cab_allow_var(cab.id, "AB")): -1.0},
                          "<=", 0.0, "cut-hop-allow-ab", element)
                self._row({ba: 1.0,
                           self._col(cab_allow_var(cab.id, "BA")): -1.0},
                          "<=", 0.0, "cut-hop-allow-ba", element)
                self._row({ab: 1.0, ba: 1.0}, "<=", 1.0,
                          "cut-single-direction", element)
            for dev in self.mt.devices:
                element = f"S{sig.id}.D{dev.id}"
                sel = {c: -1.0 for c in self.dev_type_cols[dev.id].values()}
                self._row(self._merge(
                    {self._col(sig_dev_var(sig.id, dev.id, "doesTx")): 1.0},
                    sel), "<=", 0.0, "cut-forward-populated", element)
                self._row(self._merge(
                    {self._col(sig_dev_var(sig.id, dev.id, "doesRx")): 1.0},
                    sel), "<=", 0.0, "cut-receive-populated", element)
        for dev_id in sorted(self.endpoint_devices):
            coeffs: dict[int, float] = {}
            for cab in self.mt.incident_cables(dev_id):
                for c in self.cab_type_cols[cab.id].values():
                    coeffs[c] = 1.0
            if coeffs:
                self._row(coeffs, ">=", 1.0, "cut-endpoint-cable",
                          f"D{dev_id}")
        groups: dict[tuple, list[str]] = {}
        for cab in self.mt.cables:
            key = (cab.endpoint_a, cab.endpoint_b,
                   (tuple(sorted(cab.allowed_types))
                    if cab.allowed_types is not None else None),
                   cab.fixed_type, cab.must_exist)
            groups.setdefault(key, []).append(cab.id)
        for ids in groups.values():
            for first, second in zip(ids, ids[1:]):
                coeffs = {c: 1.0 for c in self.cab_type_cols[second].values()}
                for c in self.cab_type_cols[first].values():
                    coeffs[c] = coeffs.get(c, 0.0) - 1.0
                self._row(coeffs, "<=", 0.0, "cut-parallel-order",
                          f"F{first}.F{second}")

    # -- objective ----------------------------------------------------------

    def encode_objective(self) -> None:
        coeffs: dict[int, float] = {}
        for dev in self.mt.devices:
            for j, c in self._dev_prop_expr(dev.id, DEV_COST).items():
                coeffs[j] = coeffs.get(j, 0.0) + c
        for cab in self.mt.cables:
            for j, c in self._cab_prop_expr(cab.id, CAB_COST).items():
                coeffs[j] = coeffs.get(j, 0.0) + c
        set_objective(self.art.problem, coeffs, Sense.MIN)

    # -- top level ----------------------------------------------------------

    def build(self) -> BuildArtifacts:
        for dev in self.mt.devices:
            self.encode_type_assignment(dev)
        for cab in self.mt.cables:
            self.encode_type_assignment(cab)
        for dev in self.mt.devices:
            self.encode_port_limits(dev)
        for cab in self.mt.cables:
            self.encode_direction_and_cores(cab)
        for sig in self.mt.signals:
            self.encode_routing(sig)
        for cab in self.mt.cables:
            self.encode_core_demand(cab)
        for sig in self.mt.signals:
            self.register_power_variables(sig)
        for sig in self.mt.signals:
            for dev in self.mt.devices:
                self.encode_device_attenuation(sig, dev)
            for cab in self.mt.cables:
                self.encode_cable_attenuation(sig, cab)
        if self.strengthen:
            self.encode_strengthening()
        self.encode_objective()
        p = self.art.problem
        logger.info(
            "built %s: %d rows, %d binary / %d integer / %d continuous columns",
            self.mt.name, p.num_rows, p.count_kind(VarKind.BINARY),
            p.count_kind(VarKind.INTEGER), p.count_kind(VarKind.CONTINUOUS),
        )
        return self.art


def build(mt: MaxTopology, strengthen: bool = False) -> BuildArtifacts:
    """Compile a design space into a mixed-integer program.

    Returns the problem, the variable registry, the per-row trace, and
    the power limit used as big-M constant.  With ``strengthen`` the
    model additionally carries redundant valid inequalities and
    tightened power-variable bounds that leave the optimal value and
    the decodable optima unchanged but give large models a much
    stronger LP relaxation (see :meth:`ModelBuilder.encode_strengthening`
    and :func:`attainable_power_interval`).
    """
    return ModelBuilder(mt, strengthen=strengthen).build()


__all__ = [
    "BuildArtifacts",
    "BuildError",
    "ModelBuilder",
    "PowerLimit",
    "attainable_power_interval",
    "build",
    "cab_allow_var",
    "cab_type_var",
    "cab_use_var",
    "compute_power_limit",
    "dev_type_var",
    "sig_cable_power_var",
    "sig_cable_var",
    "sig_dev_var",
]
