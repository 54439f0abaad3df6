"""Static model of a radially operated distribution network.

The model covers the electrical layer (buses, lines, switchgear, production
units, batteries) and the ICT layer (controller, line sensors, intelligent
switch actuators on disconnectors). It is immutable after ``build_network``
and safe to share across simulation workers; all dynamic state (switch
positions, component health, SOC) lives in the simulation runtime.

Conventions:
  * component ids are strings, ordered lexicographically wherever a
    deterministic order is needed;
  * line impedances are stored in per-unit on the model's power base;
  * a line conducts iff it is not failed and every switch mounted on it
    is closed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .stochastic import ReliabilityParams, RepairPhases

FROM_END = "from"
TO_END = "to"

DISCONNECTOR = "disconnector"
BREAKER = "breaker"


class NetworkValidationError(ValueError):
    """Raised when a network spec violates a structural invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid network:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class LoadSpec:
    """Demand attached to a bus: peak power, profile shape and cost category."""

    peak_mw: float
    peak_mvar: float = 0.0
    profile: str = "flat"
    category: str = "general"


@dataclass(frozen=True)
class Bus:
    id: str
    load: Optional[LoadSpec] = None
    customers: int = 0
    transformer: Optional[ReliabilityParams] = None


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    r_pu: float
    x_pu: float
    capacity_mw: float
    reliability: ReliabilityParams = ReliabilityParams(0.0, 0.0)
    sensor_ref: Optional[str] = None


@dataclass(frozen=True)
class Switchgear:
    id: str
    kind: str  # DISCONNECTOR or BREAKER
    host_line: str
    position: str  # FROM_END or TO_END
    normal_closed: bool = True
    intelligent_switch_ref: Optional[str] = None


@dataclass(frozen=True)
class ProductionUnit:
    id: str
    bus: str
    min_mw: float = 0.0
    max_mw: float = 0.0
    profile: Optional[str] = None


@dataclass(frozen=True)
class Battery:
    id: str
    bus: str
    capacity_mwh: float
    inverter_mw: float
    soc_min: float = 0.0
    soc_max: float = 1.0


@dataclass(frozen=True)
class Sensor:
    id: str
    line_ref: str
    reliability: ReliabilityParams
    phases: RepairPhases


@dataclass(frozen=True)
class IntelligentSwitch:
    id: str
    disconnector_ref: str
    reliability: ReliabilityParams


@dataclass(frozen=True)
class Controller:
    id: str
    hardware: ReliabilityParams
    software: ReliabilityParams
    software_phases: RepairPhases


@dataclass(frozen=True)
class IctSystem:
    controller: Optional[Controller] = None
    sensors: tuple = ()
    intelligent_switches: tuple = ()

    @property
    def empty(self) -> bool:
        return self.controller is None and not self.sensors and not self.intelligent_switches


@dataclass(frozen=True)
class DistributionSystem:
    id: str
    root_bus: str
    feeder_capacity_mw: Optional[float] = None


@dataclass(frozen=True)
class Microgrid:
    id: str
    via_disconnector: str


@dataclass(frozen=True)
class NetworkSpec:
    """Raw, unvalidated network description straight from a network file."""

    power_system_id: str = "PS"
    base_mva: float = 10.0
    base_kv: float = 12.66
    buses: tuple = ()
    lines: tuple = ()
    switchgear: tuple = ()
    production: tuple = ()
    batteries: tuple = ()
    ict: IctSystem = field(default_factory=IctSystem)
    distribution_systems: tuple = ()
    microgrids: tuple = ()


@dataclass(frozen=True)
class Section:
    """Region around a line that the bounding disconnectors can cut out."""

    lines: frozenset
    buses: frozenset
    boundary_disconnectors: tuple


class NetworkModel:
    """Validated network with cached connectivity structures."""

    def __init__(self, spec: NetworkSpec):
        self.power_system_id = spec.power_system_id
        self.base_mva = spec.base_mva
        self.base_kv = spec.base_kv
        self.buses = {b.id: b for b in sorted(spec.buses, key=lambda b: b.id)}
        self.lines = {l.id: l for l in sorted(spec.lines, key=lambda l: l.id)}
        self.switchgear = {s.id: s for s in sorted(spec.switchgear, key=lambda s: s.id)}
        self.production = {p.id: p for p in sorted(spec.production, key=lambda p: p.id)}
        self.batteries = {b.id: b for b in sorted(spec.batteries, key=lambda b: b.id)}
        self.ict = spec.ict
        self.distribution_systems = tuple(sorted(spec.distribution_systems, key=lambda d: d.id))
        self.microgrids = tuple(sorted(spec.microgrids, key=lambda m: m.id))

        self.bus_ids = tuple(self.buses)
        self.line_ids = tuple(self.lines)
        self.bus_index = {b: i for i, b in enumerate(self.bus_ids)}
        self.line_index = {l: i for i, l in enumerate(self.line_ids)}

        # adjacency over all lines: bus id -> list of (line id, other bus id)
        self.adjacency = {b: [] for b in self.bus_ids}
        for line in self.lines.values():
            self.adjacency[line.from_bus].append((line.id, line.to_bus))
            self.adjacency[line.to_bus].append((line.id, line.from_bus))
        for lst in self.adjacency.values():
            lst.sort()

        self.line_switches = {l: [] for l in self.line_ids}
        for sw in self.switchgear.values():
            self.line_switches[sw.host_line].append(sw.id)
        for lst in self.line_switches.values():
            lst.sort()

        self.normally_open_lines = frozenset(
            l for l in self.line_ids
            if any(not self.switchgear[s].normal_closed for s in self.line_switches[l])
        )

        # Filled in by _build_trees / _build_sections.
        self.parent_line = {}      # bus id -> line id toward the feeder root
        self.parent_bus = {}       # bus id -> next bus toward the root
        self.children = {b: [] for b in self.bus_ids}
        self.system_of_bus = {}    # bus id -> distribution system id
        self.root_of_system = {d.id: d.root_bus for d in self.distribution_systems}
        self.breaker_of_system = {}
        self.tree_lines = frozenset()
        self._downstream = {}      # line id -> frozenset of bus ids
        self.sections = {}         # line id -> Section
        self.sensor_of_line = {}
        self.int_switch_of_disc = {}
        self.battery_of_bus = {}
        self.production_of_bus = {b: [] for b in self.bus_ids}
        self.feeder_capacity = {}

        self._build_trees()
        self._build_sections()
        self._bind_attachments()

    # -- construction ---------------------------------------------------

    def _tree_adjacency(self):
        """Adjacency restricted to normally closed lines."""
        adj = {b: [] for b in self.bus_ids}
        for line in self.lines.values():
            if line.id in self.normally_open_lines:
                continue
            adj[line.from_bus].append((line.id, line.to_bus))
            adj[line.to_bus].append((line.id, line.from_bus))
        for lst in adj.values():
            lst.sort()
        return adj

    def _build_trees(self):
        adj = self._tree_adjacency()
        for dsys in self.distribution_systems:
            root = dsys.root_bus
            self.system_of_bus[root] = dsys.id
            self.parent_line[root] = None
            self.parent_bus[root] = None
            seen = {root}
            queue = deque([root])
            tree_lines = set(self.tree_lines)
            while queue:
                bus = queue.popleft()
                for line_id, other in adj[bus]:
                    if other in seen:
                        continue
                    seen.add(other)
                    self.system_of_bus[other] = dsys.id
                    self.parent_line[other] = line_id
                    self.parent_bus[other] = bus
                    self.children[bus].append(other)
                    tree_lines.add(line_id)
                    queue.append(other)
            self.tree_lines = frozenset(tree_lines)

        for dsys in self.distribution_systems:
            for sw in self.switchgear.values():
                if sw.kind != BREAKER:
                    continue
                host = self.lines[sw.host_line]
                if dsys.root_bus in (host.from_bus, host.to_bus):
                    self.breaker_of_system[dsys.id] = sw.id

        for dsys in self.distribution_systems:
            if dsys.feeder_capacity_mw is not None:
                self.feeder_capacity[dsys.id] = dsys.feeder_capacity_mw
            else:
                incident = [self.lines[l].capacity_mw
                            for l, _ in self.adjacency[dsys.root_bus]]
                self.feeder_capacity[dsys.id] = sum(incident) if incident else 0.0

    def _build_sections(self):
        for line_id in self.line_ids:
            self.sections[line_id] = self._section_around(line_id)

    def _switch_at(self, line_id: str, end: str) -> Optional[str]:
        for sw_id in self.line_switches[line_id]:
            if self.switchgear[sw_id].position == end:
                return sw_id
        return None

    def _section_around(self, start_line: str) -> Section:
        """Walk outward from a line, stopping at any switchgear position."""
        lines = {start_line}
        buses = set()
        boundary = []
        queue = deque([("line", start_line)])
        seen_lines = {start_line}
        seen_buses = set()
        while queue:
            kind, ident = queue.popleft()
            if kind == "line":
                line = self.lines[ident]
                for end, bus in ((FROM_END, line.from_bus), (TO_END, line.to_bus)):
                    sw = self._switch_at(ident, end)
                    if sw is not None:
                        boundary.append(sw)
                    elif bus not in seen_buses:
                        seen_buses.add(bus)
                        buses.add(bus)
                        queue.append(("bus", bus))
            else:
                for line_id, _other in self.adjacency[ident]:
                    if line_id in seen_lines:
                        continue
                    line = self.lines[line_id]
                    end = FROM_END if line.from_bus == ident else TO_END
                    sw = self._switch_at(line_id, end)
                    if sw is not None:
                        boundary.append(sw)
                    else:
                        seen_lines.add(line_id)
                        lines.add(line_id)
                        queue.append(("line", line_id))
        discs = tuple(sorted(s for s in boundary
                             if self.switchgear[s].kind == DISCONNECTOR))
        return Section(frozenset(lines), frozenset(buses), discs)

    def _bind_attachments(self):
        for sensor in self.ict.sensors:
            self.sensor_of_line[sensor.line_ref] = sensor.id
        for isw in self.ict.intelligent_switches:
            self.int_switch_of_disc[isw.disconnector_ref] = isw.id
        for bat in self.batteries.values():
            self.battery_of_bus[bat.bus] = bat.id
        for unit in self.production.values():
            self.production_of_bus[unit.bus].append(unit.id)

    # -- queries ----------------------------------------------------------

    @property
    def load_points(self) -> tuple:
        """Buses with demand or customers, in canonical order."""
        return tuple(b.id for b in self.buses.values()
                     if b.load is not None or b.customers > 0)

    def downstream_buses(self, line_id: str) -> frozenset:
        """Buses fed through `line_id` when its feeder is energized from the root."""
        if line_id in self._downstream:
            return self._downstream[line_id]
        if line_id not in self.tree_lines:
            raise ValueError(f"line {line_id!r} is not part of a feeder tree")
        line = self.lines[line_id]
        # The downstream endpoint is the one whose parent line is this line.
        if self.parent_line.get(line.to_bus) == line_id:
            head = line.to_bus
        elif self.parent_line.get(line.from_bus) == line_id:
            head = line.from_bus
        else:  # pragma: no cover - tree construction guarantees one of the two
            raise ValueError(f"line {line_id!r} has no downstream endpoint")
        out = set()
        queue = deque([head])
        while queue:
            bus = queue.popleft()
            out.add(bus)
            queue.extend(self.children[bus])
        result = frozenset(out)
        self._downstream[line_id] = result
        return result

    def line_conducts(self, line_id: str, switch_closed, failed_lines) -> bool:
        if line_id in failed_lines:
            return False
        return all(switch_closed.get(s, self.switchgear[s].normal_closed)
                   for s in self.line_switches[line_id])

    def normal_switch_states(self) -> dict:
        return {s.id: s.normal_closed for s in self.switchgear.values()}


def connected_components(model: NetworkModel, switch_closed, failed_lines=frozenset()):
    """Partition buses into maximal sets joined by conducting lines.

    `switch_closed` maps switch id -> bool; missing entries default to the
    normal state. Components are returned as sorted tuples, ordered by their
    lowest bus id, so the output is deterministic.
    """
    failed = frozenset(failed_lines)
    ok_line = {l: model.line_conducts(l, switch_closed, failed) for l in model.line_ids}
    unseen = set(model.bus_ids)
    components = []
    for start in model.bus_ids:  # canonical order
        if start not in unseen:
            continue
        unseen.discard(start)
        comp = [start]
        queue = deque([start])
        while queue:
            bus = queue.popleft()
            for line_id, other in model.adjacency[bus]:
                if ok_line[line_id] and other in unseen:
                    unseen.discard(other)
                    comp.append(other)
                    queue.append(other)
        components.append(tuple(sorted(comp)))
    components.sort(key=lambda c: c[0])
    return components


def downstream_buses(model: NetworkModel, line_id: str) -> frozenset:
    return model.downstream_buses(line_id)


def build_network(spec: NetworkSpec) -> NetworkModel:
    """Validate a spec and return the immutable model.

    Raises NetworkValidationError carrying the full list of violations.
    """
    errors = list(_validate_spec(spec))
    if errors:
        raise NetworkValidationError(errors)
    model = NetworkModel(spec)
    errors.extend(_validate_topology(model, spec))
    if errors:
        raise NetworkValidationError(errors)
    return model


def _check_duplicates(items: Iterable[str], what: str):
    seen = set()
    for ident in items:
        if ident in seen:
            yield f"duplicate {what} id {ident!r}"
        seen.add(ident)


def _validate_spec(spec: NetworkSpec):
    bus_ids = [b.id for b in spec.buses]
    line_ids = [l.id for l in spec.lines]
    yield from _check_duplicates(bus_ids, "bus")
    yield from _check_duplicates(line_ids, "line")
    yield from _check_duplicates([s.id for s in spec.switchgear], "switchgear")
    yield from _check_duplicates([p.id for p in spec.production], "production unit")
    yield from _check_duplicates([b.id for b in spec.batteries], "battery")
    buses = set(bus_ids)
    lines = set(line_ids)
    switches = {s.id: s for s in spec.switchgear}

    for bus in spec.buses:
        if bus.customers < 0:
            yield f"bus {bus.id!r}: customer count must be >= 0"
        if bus.transformer is not None:
            yield from _check_reliability(bus.transformer, f"bus {bus.id!r} transformer")

    battery_buses = set()
    for bat in spec.batteries:
        if bat.bus not in buses:
            yield f"battery {bat.id!r} references unknown bus {bat.bus!r}"
        if bat.bus in battery_buses:
            yield f"bus {bat.bus!r} has more than one battery"
        battery_buses.add(bat.bus)
        if not (0.0 <= bat.soc_min <= bat.soc_max <= 1.0):
            yield f"battery {bat.id!r}: need 0 <= soc_min <= soc_max <= 1"
        if bat.inverter_mw <= 0:
            yield f"battery {bat.id!r}: inverter capacity must be > 0"
        if bat.capacity_mwh <= 0:
            yield f"battery {bat.id!r}: energy capacity must be > 0"

    for line in spec.lines:
        if line.from_bus not in buses or line.to_bus not in buses:
            yield f"line {line.id!r} references unknown bus"
        if line.from_bus == line.to_bus:
            yield f"line {line.id!r} connects a bus to itself"
        if line.capacity_mw <= 0:
            yield f"line {line.id!r}: capacity must be > 0"
        if line.r_pu < 0 or line.x_pu < 0:
            yield f"line {line.id!r}: impedance must be >= 0"
        yield from _check_reliability(line.reliability, f"line {line.id!r}")

    roots = {d.root_bus for d in spec.distribution_systems}
    for sw in spec.switchgear:
        if sw.kind not in (DISCONNECTOR, BREAKER):
            yield f"switchgear {sw.id!r}: unknown kind {sw.kind!r}"
        if sw.host_line not in lines:
            yield f"switchgear {sw.id!r} references unknown line {sw.host_line!r}"
        elif sw.kind == BREAKER:
            host = next(l for l in spec.lines if l.id == sw.host_line)
            if host.from_bus not in roots and host.to_bus not in roots:
                yield f"circuit breaker {sw.id!r} is not at a feeder root"
        if sw.position not in (FROM_END, TO_END):
            yield f"switchgear {sw.id!r}: position must be from/to"

    for unit in spec.production:
        if unit.bus not in buses:
            yield f"production unit {unit.id!r} references unknown bus {unit.bus!r}"
        if not (0.0 <= unit.min_mw <= unit.max_mw):
            yield f"production unit {unit.id!r}: need 0 <= min <= max output"

    for sensor in spec.ict.sensors:
        if sensor.line_ref not in lines:
            yield f"sensor {sensor.id!r} references unknown line {sensor.line_ref!r}"
        yield from _check_reliability(sensor.reliability, f"sensor {sensor.id!r}")
    for isw in spec.ict.intelligent_switches:
        disc = switches.get(isw.disconnector_ref)
        if disc is None:
            yield f"intelligent switch {isw.id!r} references unknown switchgear"
        elif disc.kind != DISCONNECTOR:
            yield f"intelligent switch {isw.id!r} must sit on a disconnector, not {disc.kind}"
        yield from _check_reliability(isw.reliability, f"intelligent switch {isw.id!r}")

    if not spec.distribution_systems:
        yield "no distribution system declared"
    for dsys in spec.distribution_systems:
        if dsys.root_bus not in buses:
            yield f"distribution system {dsys.id!r} has unknown root bus {dsys.root_bus!r}"
    for mg in spec.microgrids:
        sw = switches.get(mg.via_disconnector)
        if sw is None:
            yield f"microgrid {mg.id!r} references unknown disconnector"
        elif sw.kind != DISCONNECTOR or not sw.normal_closed:
            yield f"microgrid {mg.id!r} must join via a normally closed disconnector"


def _check_reliability(params: ReliabilityParams, what: str):
    if params.failure_rate < 0:
        yield f"{what}: failure rate must be >= 0"
    if params.failure_rate > 0 and params.repair_time_h <= 0:
        yield f"{what}: repair time must be > 0 when the failure rate is > 0"


def _validate_topology(model: NetworkModel, spec: NetworkSpec):
    # every bus must have been claimed by exactly one feeder tree
    orphans = [b for b in model.bus_ids if b not in model.system_of_bus]
    if orphans:
        yield ("buses not fed by any distribution system "
               f"(normally closed path to a root missing): {', '.join(orphans)}")

    # radiality: the normally closed lines reachable from the roots form a forest
    n_tree_edges = len(model.tree_lines)
    n_claimed = len(model.system_of_bus)
    n_roots = len(model.distribution_systems)
    closed_lines = [
        l for l in model.line_ids
        if l not in model.normally_open_lines
        and model.lines[l].from_bus in model.system_of_bus
    ]
    if len(closed_lines) != n_tree_edges or n_tree_edges != n_claimed - n_roots:
        yield ("normally closed lines contain a cycle or join two feeders: "
               "radial operation requires a tree per distribution system")

    for dsys in model.distribution_systems:
        if dsys.id not in model.breaker_of_system:
            yield f"distribution system {dsys.id!r} has no circuit breaker at its root"

    breakers = [s for s in model.switchgear.values() if s.kind == BREAKER]
    by_system = {}
    for sw in breakers:
        host = model.lines[sw.host_line]
        for dsys in model.distribution_systems:
            if dsys.root_bus in (host.from_bus, host.to_bus):
                by_system.setdefault(dsys.id, []).append(sw.id)
    for sys_id, found in by_system.items():
        if len(found) > 1:
            yield f"distribution system {sys_id!r} has more than one circuit breaker"

    for mg in model.microgrids:
        sw = model.switchgear.get(mg.via_disconnector)
        if sw is not None and sw.host_line not in model.tree_lines:
            yield f"microgrid {mg.id!r} joining line is not in the feeder tree"
