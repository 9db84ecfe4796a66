"""Solution decoding, independent topology validation, and oracles.

This module closes the loop around the MILP pipeline:

* :func:`decode` turns a solved variable vector back into a
  :class:`Topology` (chosen types, per-cable core usage, one routed
  path per signal, and the decoded launch powers);
* :func:`audit` re-validates a topology against the design space with
  independent arithmetic that shares nothing with the constraint
  builder;
* :func:`power_trace` re-simulates the optical power of one signal
  step by step along its path;
* :func:`exhaustive_oracle` finds the true optimum of small design
  spaces by brute-force enumeration, for cross-checking the MILP
  pipeline;
* :func:`random_micro_scenario` generates small random scenarios for
  property testing against the oracle.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .build import (
    BuildArtifacts,
    cab_type_var,
    cab_use_var,
    dev_type_var,
    sig_cable_power_var,
    sig_cable_var,
    sig_dev_var,
)
from .milp import MilpSolution, check_solution
from .scenario import (
    CableSlot,
    CableType,
    DeviceSlot,
    DeviceType,
    MaxTopology,
    Scenario,
    Signal,
    TypeTable,
)

_TOL = 1e-6
_EXACT = 1e-9


class DecodeError(Exception):
    """The variable vector does not describe a consistent topology."""


class OracleLimitError(Exception):
    """The design space is too large for exhaustive enumeration."""


@dataclass
class CableUse:
    """Chosen type and per-direction core usage of one cable slot."""

    type: str | None
    use_ab: int = 0
    use_ba: int = 0


@dataclass
class Topology:
    """A concrete network design.

    Attributes:
        devices: Chosen device type per slot id (None: unpopulated).
        cables: Chosen cable type and core usage per slot id.
        signal_paths: Per signal id, the ordered cable hops as
            ``(cable_id, "AB" | "BA")`` tuples from source to target.
        signal_tx: Per signal id, the chosen launch power (dBm) of each
            opaque transmitter along the path, keyed by device id.
        objective_value: Total cost of the design.
    """

    devices: dict[str, str | None] = field(default_factory=dict)
    cables: dict[str, CableUse] = field(default_factory=dict)
    signal_paths: dict[str, list[tuple[str, str]]] = field(default_factory=dict)
    signal_tx: dict[str, dict[str, float]] = field(default_factory=dict)
    objective_value: float | None = None

    def to_dict(self) -> dict:
        return {
            "devices": dict(self.devices),
            "cables": {
                cid: {"type": u.type, "use_ab": u.use_ab, "use_ba": u.use_ba}
                for cid, u in self.cables.items()
            },
            "signal_paths": {
                sid: [[cid, d] for cid, d in path]
                for sid, path in self.signal_paths.items()
            },
            "signal_tx": {sid: dict(tx) for sid, tx in self.signal_tx.items()},
            "objective_value": self.objective_value,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Topology":
        return cls(
            devices=dict(doc.get("devices", {})),
            cables={
                cid: CableUse(type=u.get("type"), use_ab=int(u.get("use_ab", 0)),
                              use_ba=int(u.get("use_ba", 0)))
                for cid, u in doc.get("cables", {}).items()
            },
            signal_paths={
                sid: [(str(cid), str(d)) for cid, d in path]
                for sid, path in doc.get("signal_paths", {}).items()
            },
            signal_tx={
                sid: {d: float(v) for d, v in tx.items()}
                for sid, tx in doc.get("signal_tx", {}).items()
            },
            objective_value=doc.get("objective_value"),
        )


@dataclass
class ValidationReport:
    """Outcome of an independent topology audit."""

    passed: bool
    violations: list[tuple[str, str, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "violations": [list(v) for v in self.violations],
        }


# ---------------------------------------------------------------------------
# decoding


def _as_binary(value: float, name: str) -> int:
    if abs(value - round(value)) > _TOL:
        raise DecodeError(f"variable {name} = {value} is not integral")
    v = int(round(value))
    if v not in (0, 1):
        raise DecodeError(f"variable {name} = {value} is not binary")
    return v


def decode(solution: MilpSolution, artifacts: BuildArtifacts) -> Topology:
    """Reconstruct the topology a solved variable vector describes.

    Errors out (rather than guessing) whenever the vector is not a
    consistent design: non-integral indicators, several types selected
    for one slot, or routing indicators that do not form one simple
    source-to-target path per signal.
    """
    if solution.values is None:
        raise DecodeError(f"solution has no values (status {solution.status})")
    mt = artifacts.max_topology
    reg = artifacts.registry
    values = solution.values

    def val(name: str) -> float:
        return values[reg.col(name)]

    topo = Topology(objective_value=solution.objective_value)
    for dev in mt.devices:
        chosen = [t.name for t in mt.type_table.device_types
                  if _as_binary(val(dev_type_var(dev.id, t.name)),
                                dev_type_var(dev.id, t.name))]
        if len(chosen) > 1:
            raise DecodeError(f"device {dev.id} has several types {chosen}")
        topo.devices[dev.id] = chosen[0] if chosen else None
    for cab in mt.cables:
        chosen = [t.name for t in mt.type_table.cable_types
                  if _as_binary(val(cab_type_var(cab.id, t.name)),
                                cab_type_var(cab.id, t.name))]
        if len(chosen) > 1:
            raise DecodeError(f"cable {cab.id} has several types {chosen}")
        ab = val(cab_use_var(cab.id, "AB"))
        ba = val(cab_use_var(cab.id, "BA"))
        if abs(ab - round(ab)) > _TOL or abs(ba - round(ba)) > _TOL:
            raise DecodeError(f"cable {cab.id} has non-integral core usage")
        topo.cables[cab.id] = CableUse(type=chosen[0] if chosen else None,
                                       use_ab=int(round(ab)),
                                       use_ba=int(round(ba)))

    for sig in mt.signals:
        # Active hops, grouped by the device the signal leaves from.
        leaving: dict[str, list[tuple[str, str, str]]] = {}
        active = 0
        for cab in mt.cables:
            for direction, frm, to in (("AB", cab.endpoint_a, cab.endpoint_b),
                                       ("BA", cab.endpoint_b, cab.endpoint_a)):
                name = sig_cable_var(sig.id, cab.id, direction)
                if _as_binary(val(name), name):
                    leaving.setdefault(frm, []).append((cab.id, direction, to))
                    active += 1
        path: list[tuple[str, str]] = []
        current = sig.source
        visited = {current}
        while current != sig.target:
            hops = leaving.get(current, [])
            if len(hops) != 1:
                raise DecodeError(
                    f"signal {sig.id}: {len(hops)} active hops leave device "
                    f"{current}, expected exactly 1"
                )
            cab_id, direction, nxt = hops[0]
            if nxt in visited:
                raise DecodeError(
                    f"signal {sig.id}: path revisits device {nxt}"
                )
            path.append((cab_id, direction))
            visited.add(nxt)
            current = nxt
        if len(path) != active:
            raise DecodeError(
                f"signal {sig.id}: {active - len(path)} active hops are "
                "disconnected from the source-target path"
            )
        topo.signal_paths[sig.id] = path

        launches: dict[str, float] = {}
        for dev_id in [sig.source] + [_hop_target(mt, h) for h in path]:
            tname = topo.devices[dev_id]
            if tname is None:
                continue
            if mt.type_table.device_type(tname).translucent:
                continue
            name = sig_dev_var(sig.id, dev_id, "doesTx")
            if _as_binary(val(name), name):
                launches[dev_id] = val(sig_dev_var(sig.id, dev_id, "Tx"))
        topo.signal_tx[sig.id] = launches
    return topo


def _hop_target(mt: MaxTopology, hop: tuple[str, str]) -> str:
    cab = mt.cable(hop[0])
    return cab.endpoint_b if hop[1] == "AB" else cab.endpoint_a


def prune_idle_loops(solution: MilpSolution,
                     artifacts: BuildArtifacts) -> MilpSolution:
    """Remove cost-neutral idle routing loops from an integer solution.

    The degree rows cap every device at one incoming and one outgoing
    active hop per signal, so any integer-feasible routing is one
    simple source-to-target path plus, possibly, vertex-disjoint idle
    cycles.  The cycles occupy cores and bookkeeping but carry no cost
    (the objective only prices type selections), and branch-and-cut
    incumbents routinely contain them; the strict :func:`decode`
    rejects such vectors.

    This returns an equally good solution without the cycles: per
    signal, every active hop off the walked path is cleared together
    with its power bookkeeping, the per-cable core counters are
    recomputed, and the rewritten point is re-verified against the
    model before it is returned.  A solution without idle loops is
    returned unchanged.
    """
    if solution.values is None:
        raise DecodeError(f"solution has no values (status {solution.status})")
    mt = artifacts.max_topology
    reg = artifacts.registry
    table = mt.type_table
    values = list(solution.values)

    def col(name: str) -> int:
        return reg.col(name)

    def active(name: str) -> bool:
        return _as_binary(values[col(name)], name) == 1

    chosen_dev: dict[str, DeviceType | None] = {}
    for dev in mt.devices:
        chosen = [t for t in table.device_types
                  if active(dev_type_var(dev.id, t.name))]
        chosen_dev[dev.id] = chosen[0] if len(chosen) == 1 else None

    changed = False
    for sig in mt.signals:
        leaving: dict[str, list[tuple[str, str, str]]] = {}
        hops: list[tuple[str, str]] = []
        for cab in mt.cables:
            for direction, frm, to in (("AB", cab.endpoint_a, cab.endpoint_b),
                                       ("BA", cab.endpoint_b, cab.endpoint_a)):
                if active(sig_cable_var(sig.id, cab.id, direction)):
                    leaving.setdefault(frm, []).append((cab.id, direction, to))
                    hops.append((cab.id, direction))
        kept: set[tuple[str, str]] = set()
        on_path = {sig.source}
        current = sig.source
        while current != sig.target:
            here = leaving.get(current, [])
            if len(here) != 1:
                raise DecodeError(
                    f"signal {sig.id}: {len(here)} active hops leave device "
                    f"{current}, expected exactly 1"
                )
            cab_id, direction, nxt = here[0]
            if nxt in on_path:
                raise DecodeError(
                    f"signal {sig.id}: path revisits device {nxt}")
            kept.add((cab_id, direction))
            on_path.add(nxt)
            current = nxt
        for cab_id, direction in hops:
            if (cab_id, direction) in kept:
                continue
            changed = True
            values[col(sig_cable_var(sig.id, cab_id, direction))] = 0.0
            values[col(sig_cable_power_var(sig.id, cab_id, direction))] = 0.0
        for dev in mt.devices:
            if dev.id in on_path:
                continue
            if not (active(sig_dev_var(sig.id, dev.id, "doesTx"))
                    or active(sig_dev_var(sig.id, dev.id, "doesRx"))):
                continue
            changed = True
            for q in ("doesTx", "doesRx", "opaqueRx", "Rx", "Tx"):
                values[col(sig_dev_var(sig.id, dev.id, q))] = 0.0
            # An idle translucent device must still report its pass-
            # through level for a silent input; everything else mirrors
            # its freely chosen regeneration level.
            dtype = chosen_dev[dev.id]
            if dtype is not None and dtype.translucent:
                avail = dtype.delta
            else:
                avail = values[col(sig_dev_var(sig.id, dev.id, "transmit"))]
            values[col(sig_dev_var(sig.id, dev.id, "TxAvail"))] = avail

    if not changed:
        return solution
    for cab in mt.cables:
        for direction in ("AB", "BA"):
            total = sum(
                1 for sig in mt.signals
                if active(sig_cable_var(sig.id, cab.id, direction)))
            values[col(cab_use_var(cab.id, direction))] = float(total)
    violations = check_solution(artifacts.problem, values)
    if violations:
        raise DecodeError(
            f"idle-loop pruning produced an infeasible point: {violations[0]}")
    return MilpSolution(
        status=solution.status,
        values=values,
        objective_value=solution.objective_value,
        gap=solution.gap,
        node_count=solution.node_count,
        wall_time=solution.wall_time,
        message=solution.message,
    )


# ---------------------------------------------------------------------------
# independent audit


def _walk_path(mt: MaxTopology, sig: Signal,
               path: list[tuple[str, str]]) -> list[str]:
    """Device sequence visited by a path, starting at the source.

    Raises DecodeError if the hops do not chain up.
    """
    devices = [sig.source]
    for cab_id, direction in path:
        cab = mt.cable(cab_id)
        frm, to = ((cab.endpoint_a, cab.endpoint_b) if direction == "AB"
                   else (cab.endpoint_b, cab.endpoint_a))
        if frm != devices[-1]:
            raise DecodeError(
                f"signal {sig.id}: hop {cab_id}/{direction} starts at {frm}, "
                f"path is at {devices[-1]}"
            )
        devices.append(to)
    return devices


def _chains(mt: MaxTopology, topo: Topology, sig: Signal):
    """Split a signal path into optical chains between opaque devices.

    Yields ``(tx_device, rx_device, delta)`` per chain, where delta is
    the summed gain of the cables and translucent devices in between.
    """
    path = topo.signal_paths[sig.id]
    devices = _walk_path(mt, sig, path)
    table = mt.type_table
    tx_dev = devices[0]
    if topo.devices.get(tx_dev) is None:
        raise DecodeError(f"signal {sig.id}: source device {tx_dev} is "
                          "unpopulated")
    delta = 0.0
    for hop, dev_id in zip(path, devices[1:]):
        ctype = topo.cables[hop[0]].type
        if ctype is None:
            raise DecodeError(f"signal {sig.id}: hop over unpopulated cable "
                              f"{hop[0]}")
        delta += table.cable_type(ctype).delta
        dtype_name = topo.devices.get(dev_id)
        if dtype_name is None:
            raise DecodeError(f"signal {sig.id}: path visits unpopulated "
                              f"device {dev_id}")
        dtype = table.device_type(dtype_name)
        if dtype.translucent:
            delta += dtype.delta
        else:
            yield tx_dev, dev_id, delta
            tx_dev = dev_id
            delta = 0.0
    if devices[-1] != sig.target:
        raise DecodeError(f"signal {sig.id}: path ends at {devices[-1]}, "
                          f"not the target {sig.target}")


def audit(topology: Topology, mt: MaxTopology) -> ValidationReport:
    """Re-validate a topology with arithmetic independent of the MILP.

    Checks, per rule id reported in the violations:

    * ``slot-missing`` / ``type-not-allowed`` — every mandatory slot is
      populated and every chosen type is admissible for its slot;
    * ``cable-endpoint`` — populated cables connect populated devices;
    * ``port-limit`` — populated incident cables per device;
    * ``path`` — each signal path is a simple chain from its source to
      its target over populated elements with opaque end devices;
    * ``direction`` — hop directions admissible for the cable type, and
      unidirectional cables used in one direction only;
    * ``core-capacity`` / ``core-usage`` — per-direction demand versus
      the recorded usage counters and the type's core count;
    * ``link-budget`` — recomputed receive power inside every opaque
      receiver's window, using the decoded launch powers when present
      and interval feasibility otherwise.
    """
    v: list[tuple[str, str, str]] = []
    table = mt.type_table
    dev_names = {t.name for t in table.device_types}
    cab_names = {t.name for t in table.cable_types}

    for dev in mt.devices:
        tname = topology.devices.get(dev.id)
        if tname is None:
            if dev.must_exist:
                v.append(("slot-missing", f"D{dev.id}",
                          "mandatory device slot unpopulated"))
            continue
        if tname not in dev_names:
            v.append(("type-not-allowed", f"D{dev.id}",
                      f"unknown device type {tname!r}"))
            continue
        if dev.allowed_types is not None and tname not in dev.allowed_types:
            v.append(("type-not-allowed", f"D{dev.id}",
                      f"type {tname!r} not in allowed set"))
        if dev.fixed_type is not None and tname != dev.fixed_type:
            v.append(("type-not-allowed", f"D{dev.id}",
                      f"type {tname!r} differs from fixed {dev.fixed_type!r}"))
    for cab in mt.cables:
        use = topology.cables.get(cab.id)
        tname = use.type if use else None
        if tname is None:
            if cab.must_exist:
                v.append(("slot-missing", f"F{cab.id}",
                          "mandatory cable slot unpopulated"))
            continue
        if tname not in cab_names:
            v.append(("type-not-allowed", f"F{cab.id}",
                      f"unknown cable type {tname!r}"))
            continue
        if cab.allowed_types is not None and tname not in cab.allowed_types:
            v.append(("type-not-allowed", f"F{cab.id}",
                      f"type {tname!r} not in allowed set"))
        if cab.fixed_type is not None and tname != cab.fixed_type:
            v.append(("type-not-allowed", f"F{cab.id}",
                      f"type {tname!r} differs from fixed {cab.fixed_type!r}"))
        for end in (cab.endpoint_a, cab.endpoint_b):
            if topology.devices.get(end) is None:
                v.append(("cable-endpoint", f"F{cab.id}",
                          f"endpoint device {end} unpopulated"))

    for dev in mt.devices:
        tname = topology.devices.get(dev.id)
        incident = [c for c in mt.incident_cables(dev.id)
                    if (topology.cables.get(c.id) and
                        topology.cables[c.id].type is not None)]
        ports = (table.device_type(tname).ports
                 if tname in dev_names else 0)
        if len(incident) > ports:
            v.append(("port-limit", f"D{dev.id}",
                      f"{len(incident)} cables on {ports} ports"))

    demand: dict[str, list[int]] = {c.id: [0, 0] for c in mt.cables}
    for sig in mt.signals:
        path = topology.signal_paths.get(sig.id)
        if path is None:
            v.append(("path", f"S{sig.id}", "signal has no path"))
            continue
        try:
            devices = _walk_path(mt, sig, path)
        except DecodeError as exc:
            v.append(("path", f"S{sig.id}", str(exc)))
            continue
        if devices[-1] != sig.target:
            v.append(("path", f"S{sig.id}",
                      f"path ends at {devices[-1]}, not {sig.target}"))
            continue
        if len(set(devices)) != len(devices):
            v.append(("path", f"S{sig.id}", "path is not simple"))
        for dev_id in devices:
            tname = topology.devices.get(dev_id)
            if tname is None:
                v.append(("path", f"S{sig.id}",
                          f"visits unpopulated device {dev_id}"))
        for end in (devices[0], devices[-1]):
            tname = topology.devices.get(end)
            if tname in dev_names and table.device_type(tname).translucent:
                v.append(("path", f"S{sig.id}",
                          f"end device {end} is translucent"))
        for cab_id, direction in path:
            use = topology.cables.get(cab_id)
            if use is None or use.type is None or use.type not in cab_names:
                v.append(("path", f"S{sig.id}",
                          f"hop over unpopulated cable {cab_id}"))
                continue
            ctype = table.cable_type(use.type)
            allowed = ctype.allow_ab if direction == "AB" else ctype.allow_ba
            if not allowed:
                v.append(("direction", f"F{cab_id}",
                          f"signal {sig.id} uses forbidden direction "
                          f"{direction}"))
            demand[cab_id][0 if direction == "AB" else 1] += 1

    for cab in mt.cables:
        use = topology.cables.get(cab.id)
        tname = use.type if use else None
        d_ab, d_ba = demand[cab.id]
        if tname is None or tname not in cab_names:
            if d_ab or d_ba:
                pass  # already reported as path violations
            continue
        ctype = table.cable_type(tname)
        if use.use_ab != d_ab or use.use_ba != d_ba:
            v.append(("core-usage", f"F{cab.id}",
                      f"recorded usage ({use.use_ab},{use.use_ba}) != routed "
                      f"demand ({d_ab},{d_ba})"))
        if d_ab + d_ba > ctype.cores:
            v.append(("core-capacity", f"F{cab.id}",
                      f"{d_ab + d_ba} signals on {ctype.cores} cores"))
        if ctype.unidirectional and d_ab > 0 and d_ba > 0:
            v.append(("direction", f"F{cab.id}",
                      "unidirectional cable used in both directions"))

    for sig in mt.signals:
        if sig.id not in topology.signal_paths:
            continue
        chosen = topology.signal_tx.get(sig.id, {})
        try:
            for tx_dev, rx_dev, delta in _chains(mt, topology, sig):
                tx_type = table.device_type(topology.devices[tx_dev])
                rx_type = table.device_type(topology.devices[rx_dev])
                if tx_dev in chosen:
                    launch = chosen[tx_dev]
                    if not (tx_type.tx_min - _EXACT <= launch
                            <= tx_type.tx_max + _EXACT):
                        v.append(("link-budget", f"S{sig.id}.D{tx_dev}",
                                  f"launch power {launch} outside "
                                  f"[{tx_type.tx_min}, {tx_type.tx_max}]"))
                    rx_power = launch + delta
                    if not (rx_type.rx_min - _EXACT <= rx_power
                            <= rx_type.rx_max + _EXACT):
                        v.append(("link-budget", f"S{sig.id}.D{rx_dev}",
                                  f"receive power {rx_power} outside "
                                  f"[{rx_type.rx_min}, {rx_type.rx_max}]"))
                else:
                    lo = max(tx_type.tx_min + delta, rx_type.rx_min)
                    hi = min(tx_type.tx_max + delta, rx_type.rx_max)
                    if lo > hi + _EXACT:
                        v.append(("link-budget", f"S{sig.id}.D{rx_dev}",
                                  f"no feasible launch power: best receive "
                                  f"power {tx_type.tx_max + delta} for window "
                                  f"[{rx_type.rx_min}, {rx_type.rx_max}]"))
        except DecodeError:
            pass  # structural breakage already reported above
    return ValidationReport(passed=not v, violations=v)


# ---------------------------------------------------------------------------
# power trace


def power_trace(
    topology: Topology,
    mt: MaxTopology,
    signal_id: str,
    launch_powers: dict[str, float] | None = None,
) -> list[tuple[str, float]]:
    """Re-simulate a signal's power along its decoded path.

    Returns ``(location, power_dbm)`` steps: the launch power at every
    opaque transmitter, the power after every cable, and the power after
    every translucent device.  Launch powers come from, in order of
    precedence: the ``launch_powers`` argument, the decoded powers in
    the topology, or the highest feasible level (the transmitter's
    maximum, lowered just enough to respect the receiver's window).

    Raises DecodeError when no admissible launch power exists.
    """
    sig = next(s for s in mt.signals if s.id == signal_id)
    table = mt.type_table
    chains = list(_chains(mt, topology, sig))
    chosen = dict(topology.signal_tx.get(signal_id, {}))
    if launch_powers:
        chosen.update(launch_powers)
    launch_at: dict[str, float] = {}
    for tx_dev, rx_dev, delta in chains:
        tx_type = table.device_type(topology.devices[tx_dev])
        rx_type = table.device_type(topology.devices[rx_dev])
        if tx_dev in chosen:
            launch = chosen[tx_dev]
        else:
            launch = min(tx_type.tx_max, rx_type.rx_max - delta)
        if launch < max(tx_type.tx_min, rx_type.rx_min - delta) - _EXACT:
            raise DecodeError(
                f"signal {signal_id}: no admissible launch power at {tx_dev} "
                f"(chain delta {delta})"
            )
        launch_at[tx_dev] = launch

    steps: list[tuple[str, float]] = []
    devices = _walk_path(mt, sig, topology.signal_paths[signal_id])
    power = launch_at[devices[0]]
    steps.append((f"D{devices[0]}", power))
    for hop, dev_id in zip(topology.signal_paths[signal_id], devices[1:]):
        ctype = table.cable_type(topology.cables[hop[0]].type)
        power += ctype.delta
        steps.append((f"F{hop[0]}", power))
        dtype = table.device_type(topology.devices[dev_id])
        if dtype.translucent:
            power += dtype.delta
            steps.append((f"D{dev_id}", power))
        elif dev_id != sig.target:
            power = launch_at[dev_id]
            steps.append((f"D{dev_id}", power))
    return steps


# ---------------------------------------------------------------------------
# exhaustive oracle


@dataclass(frozen=True)
class OracleLimits:
    """Size guard for the exhaustive oracle."""

    max_devices: int = 4
    max_cables: int = 5
    max_signals: int = 3
    max_types_per_class: int = 3


def exhaustive_oracle(
    mt: MaxTopology,
    limits: OracleLimits | None = None,
) -> Topology | None:
    """True optimum of a small design space by brute force.

    Enumerates every type assignment for every device and cable slot,
    keeps the structurally valid ones (ports, endpoints, mandatory
    slots), and checks routability of all signals by backtracking over
    simple paths with per-cable core/direction tracking and interval
    link-budget checks.  Returns the cheapest feasible topology (ties
    broken by enumeration order, which is deterministic), or None when
    no feasible topology exists.

    Shares no code with the constraint builder or any solver.

    Raises OracleLimitError when the design space exceeds ``limits``.
    """
    limits = limits or OracleLimits()
    if len(mt.devices) > limits.max_devices:
        raise OracleLimitError(
            f"{len(mt.devices)} device slots > {limits.max_devices}")
    if len(mt.cables) > limits.max_cables:
        raise OracleLimitError(
            f"{len(mt.cables)} cable slots > {limits.max_cables}")
    if len(mt.signals) > limits.max_signals:
        raise OracleLimitError(
            f"{len(mt.signals)} signals > {limits.max_signals}")
    table = mt.type_table
    if (len(table.device_types) > limits.max_types_per_class
            or len(table.cable_types) > limits.max_types_per_class):
        raise OracleLimitError("type catalogue exceeds oracle limits")

    endpoints = {s.source for s in mt.signals} | {s.target for s in mt.signals}

    def device_options(slot: DeviceSlot) -> list[DeviceType | None]:
        opts: list[DeviceType | None] = []
        if not slot.must_exist and slot.id not in endpoints:
            opts.append(None)
        for t in table.device_types:
            if slot.allowed_types is not None and t.name not in slot.allowed_types:
                continue
            if slot.fixed_type is not None and t.name != slot.fixed_type:
                continue
            if slot.id in endpoints and t.translucent:
                continue
            opts.append(t)
        return opts

    def cable_options(slot: CableSlot) -> list[CableType | None]:
        opts: list[CableType | None] = []
        if not slot.must_exist:
            opts.append(None)
        for t in table.cable_types:
            if slot.allowed_types is not None and t.name not in slot.allowed_types:
                continue
            if slot.fixed_type is not None and t.name != slot.fixed_type:
                continue
            opts.append(t)
        return opts

    dev_opts = [device_options(d) for d in mt.devices]
    cab_opts = [cable_options(c) for c in mt.cables]
    if any(not o for o in dev_opts) or any(not o for o in cab_opts):
        return None

    best_cost = float("inf")
    best: Topology | None = None

    for dev_choice in itertools.product(*dev_opts):
        dtypes = {d.id: t for d, t in zip(mt.devices, dev_choice)}
        dev_cost = sum(t.cost for t in dev_choice if t is not None)
        if dev_cost >= best_cost:
            continue
        result = _oracle_cables(mt, dtypes, dev_cost, cab_opts,
                                best_cost)
        if result is not None:
            cost, ctypes, paths, usage = result
            if cost < best_cost:
                best_cost = cost
                best = Topology(
                    devices={d: (t.name if t else None)
                             for d, t in dtypes.items()},
                    cables={c: CableUse(type=(t.name if t else None),
                                        use_ab=usage[c][0], use_ba=usage[c][1])
                            for c, t in ctypes.items()},
                    signal_paths=paths,
                    objective_value=cost,
                )
    if best is not None:
        best.signal_tx = {s.id: {} for s in mt.signals}
    return best


def _oracle_cables(mt, dtypes, dev_cost, cab_opts, best_cost):
    """Cheapest feasible cable assignment for fixed device types."""
    n = len(mt.cables)
    choice: list[CableType | None] = [None] * n
    best_local: list | None = None
    best_local_cost = best_cost

    def structurally_ok() -> bool:
        counts = {d.id: 0 for d in mt.devices}
        for slot, t in zip(mt.cables, choice):
            if t is None:
                continue
            for end in (slot.endpoint_a, slot.endpoint_b):
                if dtypes[end] is None:
                    return False
                counts[end] += 1
        for d in mt.devices:
            t = dtypes[d.id]
            if counts[d.id] > (t.ports if t else 0):
                return False
        return True

    def recurse(i: int, cost: float) -> None:
        nonlocal best_local, best_local_cost
        if cost >= best_local_cost:
            return
        if i == n:
            if not structurally_ok():
                return
            routed = _oracle_route(mt, dtypes,
                                   dict(zip((c.id for c in mt.cables), choice)))
            if routed is not None:
                paths, usage = routed
                best_local_cost = cost
                best_local = [cost,
                              dict(zip((c.id for c in mt.cables), choice)),
                              paths, usage]
            return
        for opt in cab_opts[i]:
            choice[i] = opt
            recurse(i + 1, cost + (opt.cost if opt else 0.0))
        choice[i] = None

    recurse(0, dev_cost)
    return None if best_local is None else tuple(best_local)


def _oracle_route(mt, dtypes, ctypes):
    """Route all signals over a fixed assignment, or None.

    Backtracks over simple paths per signal while tracking per-cable,
    per-direction core usage; unidirectional cables may only accumulate
    usage in one direction.  Each opaque-to-opaque chain must admit a
    launch power that lands in the receiver window.
    """
    usage = {c.id: [0, 0] for c in mt.cables}
    paths: dict[str, list[tuple[str, str]]] = {}
    incident = {d.id: mt.incident_cables(d.id) for d in mt.devices}

    def chain_feasible(sig, path) -> bool:
        tx_type = dtypes[sig.source]
        delta = 0.0
        current = sig.source
        for cab_id, direction in path:
            cab = mt.cable(cab_id)
            delta += ctypes[cab_id].delta
            current = cab.endpoint_b if direction == "AB" else cab.endpoint_a
            dtype = dtypes[current]
            if dtype.translucent:
                delta += dtype.delta
            else:
                lo = max(tx_type.tx_min + delta, dtype.rx_min)
                hi = min(tx_type.tx_max + delta, dtype.rx_max)
                if lo > hi + _EXACT:
                    return False
                tx_type = dtype
                delta = 0.0
        return True

    def route_signal(k: int) -> bool:
        if k == len(mt.signals):
            return True
        sig = mt.signals[k]
        path: list[tuple[str, str]] = []

        def dfs(current: str, visited: frozenset) -> bool:
            if current == sig.target:
                if chain_feasible(sig, path):
                    paths[sig.id] = list(path)
                    if route_signal(k + 1):
                        return True
                    del paths[sig.id]
                return False
            for cab in incident[current]:
                t = ctypes[cab.id]
                if t is None:
                    continue
                is_ab = cab.endpoint_a == current
                nxt = cab.endpoint_b if is_ab else cab.endpoint_a
                if nxt in visited or dtypes[nxt] is None:
                    continue
                allowed = t.allow_ab if is_ab else t.allow_ba
                if not allowed:
                    continue
                u = usage[cab.id]
                if u[0] + u[1] >= t.cores:
                    continue
                if t.unidirectional and u[1 if is_ab else 0] > 0:
                    continue
                slot = 0 if is_ab else 1
                u[slot] += 1
                path.append((cab.id, "AB" if is_ab else "BA"))
                if dfs(nxt, visited | {nxt}):
                    return True
                path.pop()
                u[slot] -= 1
            return False

        return dfs(sig.source, frozenset([sig.source]))

    if not route_signal(0):
        return None
    return paths, {c: (u[0], u[1]) for c, u in usage.items()}


# ---------------------------------------------------------------------------
# random micro scenarios


def random_micro_scenario(rng: random.Random) -> Scenario:
    """Small random scenario inside the default oracle limits.

    Costs are integers so that objective comparisons between the MILP
    pipeline and the oracle can be exact; gains and power windows come
    from realistic optical ranges.
    """
    device_types: list[DeviceType] = [
        DeviceType(
            name="opq0",
            ports=rng.randint(2, 4),
            rx_min=rng.choice([-14.0, -10.0]),
            rx_max=rng.choice([0.5, 0.0]),
            tx_min=rng.choice([-5.0, -3.0]),
            tx_max=0.0,
            cost=float(rng.randint(1, 100)),
        )
    ]
    for i in range(rng.randint(0, 2)):
        if rng.random() < 0.5:
            device_types.append(DeviceType(
                name=f"opq{i + 1}",
                ports=rng.randint(2, 4),
                rx_min=-14.0,
                rx_max=0.5,
                tx_min=-5.0,
                tx_max=0.0,
                cost=float(rng.randint(1, 100)),
            ))
        else:
            device_types.append(DeviceType(
                name=f"trn{i + 1}",
                ports=rng.randint(2, 4),
                delta=rng.choice([-2.0, -0.5, 0.0]),
                translucent=True,
                cost=float(rng.randint(1, 100)),
            ))
    cable_types: list[CableType] = []
    for i in range(rng.randint(1, 3)):
        uni = rng.random() < 0.3
        ab, ba = (True, True)
        if uni and rng.random() < 0.5:
            ab, ba = rng.choice([(True, False), (False, True)])
        cable_types.append(CableType(
            name=f"cab{i}",
            cores=rng.randint(1, 3),
            delta=rng.choice([-15.0, -2.0, -0.5, 0.0]),
            cost=float(rng.randint(1, 100)),
            unidirectional=uni,
            allow_ab=ab,
            allow_ba=ba,
        ))
    n_dev = rng.randint(2, 4)
    devices = []
    for i in range(n_dev):
        must = rng.random() < 0.3
        fixed = None
        if must and rng.random() < 0.3:
            fixed = rng.choice(device_types).name
        devices.append(DeviceSlot(id=str(i), fixed_type=fixed,
                                  must_exist=must or fixed is not None))
    pairs = list(itertools.combinations(range(n_dev), 2))
    cables = []
    for i in range(rng.randint(1, 5)):
        a, b = rng.choice(pairs)
        cables.append(CableSlot(
            id=f"c{i}", endpoint_a=str(a), endpoint_b=str(b),
            fixed_type=(rng.choice(cable_types).name
                        if rng.random() < 0.15 else None) or None,
            must_exist=rng.random() < 0.15,
        ))
    for i, c in enumerate(cables):
        if c.fixed_type is not None and not c.must_exist:
            cables[i] = CableSlot(id=c.id, endpoint_a=c.endpoint_a,
                                  endpoint_b=c.endpoint_b,
                                  fixed_type=c.fixed_type, must_exist=True)
    signals = []
    for i in range(rng.randint(1, 3)):
        a, b = rng.sample(range(n_dev), 2)
        signals.append(Signal(id=f"s{i}", source=str(a), target=str(b)))
    return Scenario(
        type_table=TypeTable(device_types=tuple(device_types),
                             cable_types=tuple(cable_types)),
        devices=tuple(devices),
        cables=tuple(cables),
        signals=tuple(signals),
        auto_complete=False,
        name="micro",
    )


__all__ = [
    "CableUse",
    "DecodeError",
    "OracleLimitError",
    "OracleLimits",
    "Topology",
    "ValidationReport",
    "audit",
    "decode",
    "exhaustive_oracle",
    "power_trace",
    "prune_idle_loops",
    "random_micro_scenario",
]
