"""Sequential Monte Carlo simulation driver.

Each iteration advances the system over a fixed increment grid. Per
increment: loads and production come from the profiles, component failures
are drawn, faults are sectioned and isolated by the switchgear, the network
decomposes into sub-systems, each energized sub-system gets battery dispatch
+ load flow + cost-minimal shedding, and the history ledger accrues
interruptions, outage hours and energy not supplied.

Healthy increments change nothing, so the driver skips straight to the next
scheduled failure; the stochastic draw uses the geometric distribution of
the first Bernoulli success, which is distribution-identical to drawing
every increment. Sectioning and repair phases last whole increments
(floor(duration / dt)); sub-increment residue is dropped, so with an hourly
increment the seconds-to-minutes ICT recoveries are invisible, and outage
durations are exact when the configured times are increment multiples.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import shedding as shed
from .loadflow import LoadFlowProblem, NonRadialError, solve_fbs
from .network import BREAKER, NetworkModel, connected_components
from .stochastic import (
    FAILED, UNDER_REPAIR, WORKING,
    ComponentState, draw_battery_soc, draw_status, failure_probability,
    ict_repair_duration, plan_sectioning,
)

_EPS = 1e-9
_LATENT = math.inf

IDLE = "idle"
CHARGE = "charge"
DISCHARGE = "discharge"


@dataclass
class SimulationConfig:
    increment_h: float = 1.0
    horizon_h: float = 8760.0
    iterations: int = 1
    master_seed: int = 0
    automated_sectioning_h: float = 5.0 / 60.0
    manual_sectioning_h: float = 1.0
    worker_count: int = 1
    loadflow_tolerance: float = 1e-8
    loadflow_max_iter: int = 50

    def __post_init__(self):
        if self.increment_h <= 0 or self.horizon_h <= 0:
            raise ValueError("increment and horizon must be > 0")
        n = self.horizon_h / self.increment_h
        if abs(n - round(n)) > 1e-9:
            raise ValueError("increment must divide the horizon")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.worker_count < 1:
            raise ValueError("need at least one worker")

    @property
    def n_increments(self) -> int:
        return int(round(self.horizon_h / self.increment_h))


@dataclass(frozen=True)
class ScriptedFault:
    """Deterministic replacement for stochastic draws (verification mode)."""

    time_h: float
    component_id: str  # line id, bus id (transformer), or ICT component id


@dataclass
class HistoryLedger:
    """Per-load-point and per-system accumulators for one iteration."""

    load_points: tuple
    customers: dict
    categories: dict
    horizon_h: float
    increment_h: float
    interruptions: dict = field(default_factory=dict)
    outage_hours: dict = field(default_factory=dict)
    ens_mwh: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        for b in self.load_points:
            self.interruptions.setdefault(b, 0.0)
            self.outage_hours.setdefault(b, 0.0)
            self.ens_mwh.setdefault(b, 0.0)

    @property
    def total_ens_mwh(self) -> float:
        return sum(self.ens_mwh.values())

    @property
    def total_customers(self) -> int:
        return sum(self.customers.values())


class _LineFault:
    __slots__ = ("line_id", "phase", "remaining_h", "boundary")

    def __init__(self, line_id, sectioning_h, boundary):
        self.line_id = line_id
        self.phase = "sectioning"
        self.remaining_h = sectioning_h
        self.boundary = boundary


class SequentialSimulation:
    """Mutable runtime for one iteration; `run()` drives it to the horizon."""

    def __init__(self, model: NetworkModel, profiles, config: SimulationConfig,
                 rng, script: Optional[list] = None, cost_table=None):
        self.model = model
        self.profiles = profiles
        self.config = config
        self.rng = rng
        self.cost_table = dict(cost_table or {})
        self.dt = config.increment_h
        self.t_index = 0

        self.line_state = {l: ComponentState() for l in model.line_ids}
        self.transformer_state = {b.id: ComponentState() for b in model.buses.values()
                                  if b.transformer is not None and b.transformer.can_fail}
        self.ict_state = {}
        ict = model.ict
        if ict.controller is not None:
            self.ict_state[ict.controller.id + "/hw"] = ComponentState()
            self.ict_state[ict.controller.id + "/sw"] = ComponentState()
        for s in ict.sensors:
            self.ict_state[s.id] = ComponentState()
        for i in ict.intelligent_switches:
            self.ict_state[i.id] = ComponentState()

        self.switch_closed = model.normal_switch_states()
        self.faults = {}  # line id -> _LineFault
        self.soc = {b_id: draw_battery_soc(bat, rng)
                    for b_id, bat in sorted(model.batteries.items())}
        self.was_islanded = {b_id: False for b_id in model.batteries}
        self.was_out = {b: False for b in model.load_points}

        self.ledger = HistoryLedger(
            load_points=model.load_points,
            customers={b: model.buses[b].customers for b in model.load_points},
            categories={b: (model.buses[b].load.category if model.buses[b].load else "general")
                        for b in model.load_points},
            horizon_h=config.horizon_h,
            increment_h=config.increment_h,
        )

        self.scripted = script is not None
        self.schedule = {}  # component key -> increment index of next failure
        if self.scripted:
            for ev in script:
                idx = int(ev.time_h / self.dt + 1e-9)
                self.schedule.setdefault(idx, []).append(ev.component_id)
        else:
            for key in self._failable_components():
                self._schedule_next(key, 0)

    # -- failure scheduling ------------------------------------------------

    def _failable_components(self):
        keys = [("line", l) for l in self.model.line_ids
                if self.model.lines[l].reliability.can_fail]
        keys += [("transformer", b) for b in sorted(self.transformer_state)]
        ict = self.model.ict
        if ict.controller is not None:
            if ict.controller.hardware.can_fail:
                keys.append(("ict", ict.controller.id + "/hw"))
            if ict.controller.software.can_fail:
                keys.append(("ict", ict.controller.id + "/sw"))
        keys += [("ict", s.id) for s in ict.sensors if s.reliability.can_fail]
        keys += [("ict", i.id) for i in ict.intelligent_switches if i.reliability.can_fail]
        return sorted(keys, key=lambda k: (k[0], k[1]))

    def _failure_rate(self, key) -> float:
        kind, ident = key
        if kind == "line":
            return self.model.lines[ident].reliability.failure_rate
        if kind == "transformer":
            return self.model.buses[ident].transformer.failure_rate
        ctrl = self.model.ict.controller
        if ctrl is not None and ident == ctrl.id + "/hw":
            return ctrl.hardware.failure_rate
        if ctrl is not None and ident == ctrl.id + "/sw":
            return ctrl.software.failure_rate
        for s in self.model.ict.sensors:
            if s.id == ident:
                return s.reliability.failure_rate
        for i in self.model.ict.intelligent_switches:
            if i.id == ident:
                return i.reliability.failure_rate
        raise KeyError(ident)

    def _schedule_next(self, key, from_index):
        """First failure increment at or after `from_index` for a working component."""
        p = failure_probability(self._failure_rate(key), self.dt)
        if p <= 0.0:
            return
        k = int(self.rng.geometric(p))  # trials until first success, >= 1
        idx = from_index + k - 1
        if idx < self.config.n_increments:
            self.schedule.setdefault(idx, []).append(key)

    # -- driving -----------------------------------------------------------

    def run(self) -> HistoryLedger:
        n = self.config.n_increments
        while self.t_index < n:
            if not self._anything_active():
                pending = [i for i in self.schedule if i >= self.t_index]
                if not pending:
                    break
                self.t_index = min(pending)
            self.run_increment()
        return self.ledger

    def _anything_active(self) -> bool:
        if self.faults:
            return True
        if self.t_index in self.schedule:
            return True
        for state in self.transformer_state.values():
            if state.mode != WORKING:
                return True
        for state in self.ict_state.values():
            if state.mode == UNDER_REPAIR:
                return True
        return False

    def run_increment(self):
        """Execute one increment of the procedure and advance time."""
        t = self.t_index
        self._process_new_failures(t)
        self._apply_transitions()
        self._set_breakers()

        if self._electrical_fault_active():
            self._evaluate_and_accrue(t)
        else:
            for b in self.was_out:
                self.was_out[b] = False
            for b_id in self.was_islanded:
                self.was_islanded[b_id] = False

        self._count_down()
        self.t_index += 1

    # -- failures and switching ---------------------------------------------

    def _process_new_failures(self, t):
        entries = self.schedule.pop(t, [])
        if not entries:
            return
        if self.scripted:
            keyed = []
            for ident in entries:
                if ident in self.model.lines:
                    keyed.append(("line", ident))
                elif ident in self.transformer_state:
                    keyed.append(("transformer", ident))
                elif ident in self.ict_state:
                    keyed.append(("ict", ident))
                else:
                    self.ledger.warnings.append(
                        f"scripted fault on unknown component {ident!r}")
            entries = keyed
        for key in sorted(entries):
            self._fail_component(key, t)

    def _fail_component(self, key, t):
        kind, ident = key
        time_h = t * self.dt
        if kind == "line":
            if self.line_state[ident].mode != WORKING:
                return
            plan = plan_sectioning(self.model, ident, self._ict_working(),
                                   self.config.automated_sectioning_h,
                                   self.config.manual_sectioning_h)
            self._discover_latent(plan, time_h)
            self.line_state[ident] = ComponentState(FAILED, until_repair_h=plan.duration_h)
            self.faults[ident] = _LineFault(
                ident, plan.duration_h,
                self.model.sections[ident].boundary_disconnectors)
            self.ledger.events.append((time_h, ident, "line_fault"))
        elif kind == "transformer":
            if self.transformer_state[ident].mode != WORKING:
                return
            repair = self.model.buses[ident].transformer.repair_time_h
            self.transformer_state[ident] = ComponentState(UNDER_REPAIR,
                                                           remaining_repair_h=repair)
            self.ledger.events.append((time_h, ident, "transformer_fault"))
        else:
            self._fail_ict(ident, time_h)

    def _fail_ict(self, ident, time_h):
        if self.ict_state[ident].mode != WORKING:
            return
        ctrl = self.model.ict.controller
        if ctrl is not None and ident == ctrl.id + "/hw":
            self.ict_state[ident] = ComponentState(
                UNDER_REPAIR, remaining_repair_h=ctrl.hardware.repair_time_h)
            self.ledger.events.append((time_h, ident, "controller_hw_fault"))
        elif ctrl is not None and ident == ctrl.id + "/sw":
            duration, outcome = ict_repair_duration(ctrl.software_phases, self.rng)
            self.ict_state[ident] = ComponentState(UNDER_REPAIR, remaining_repair_h=duration)
            self.ledger.events.append((time_h, ident, f"controller_sw_fault:{outcome}"))
        else:
            # sensors and intelligent switches fail silently until called upon
            self.ict_state[ident] = ComponentState(FAILED, until_repair_h=_LATENT)
            self.ledger.events.append((time_h, ident, "latent_ict_fault"))

    def _ict_working(self) -> dict:
        status = {}
        ctrl = self.model.ict.controller
        if ctrl is not None:
            status[ctrl.id] = (self.ict_state[ctrl.id + "/hw"].working
                               and self.ict_state[ctrl.id + "/sw"].working)
        for s in self.model.ict.sensors:
            status[s.id] = self.ict_state[s.id].working
        for i in self.model.ict.intelligent_switches:
            status[i.id] = self.ict_state[i.id].working
        return status

    def _discover_latent(self, plan, time_h):
        """Latent ICT failures start their repair clock when first called upon."""
        sensors = {s.id: s for s in self.model.ict.sensors}
        switches = {i.id: i for i in self.model.ict.intelligent_switches}
        for sid in plan.consulted_sensors:
            if self.ict_state[sid].mode == FAILED:
                duration, outcome = ict_repair_duration(sensors[sid].phases, self.rng)
                self.ict_state[sid] = ComponentState(UNDER_REPAIR, remaining_repair_h=duration)
                self.ledger.events.append((time_h, sid, f"latent_discovered:{outcome}"))
        for iid in plan.consulted_switches:
            if self.ict_state[iid].mode == FAILED:
                repair = switches[iid].reliability.repair_time_h
                self.ict_state[iid] = ComponentState(UNDER_REPAIR, remaining_repair_h=repair)
                self.ledger.events.append((time_h, iid, "latent_discovered:manual"))

    def _apply_transitions(self):
        """Complete phases whose remaining time is below one increment.

        Returns switching actions as (switch id, closed) pairs.
        """
        actions = []
        time_h = self.t_index * self.dt
        for line_id in sorted(self.faults):
            fault = self.faults[line_id]
            if fault.remaining_h >= self.dt - _EPS:
                continue
            if fault.phase == "sectioning":
                for disc in fault.boundary:
                    if self.switch_closed[disc]:
                        self.switch_closed[disc] = False
                        actions.append((disc, False))
                repair = self.model.lines[line_id].reliability.repair_time_h
                self.line_state[line_id] = ComponentState(UNDER_REPAIR,
                                                          remaining_repair_h=repair)
                fault.phase = "repairing"
                fault.remaining_h = repair
                self.ledger.events.append((time_h, line_id, "isolated"))
                # the isolation may itself complete within this increment
                if fault.remaining_h < self.dt - _EPS:
                    self._restore_line(fault, actions, time_h)
            else:
                self._restore_line(fault, actions, time_h)

        for bus_id in sorted(self.transformer_state):
            state = self.transformer_state[bus_id]
            if state.mode == UNDER_REPAIR and state.remaining_repair_h < self.dt - _EPS:
                self.transformer_state[bus_id] = ComponentState(WORKING)
                self.ledger.events.append((time_h, bus_id, "transformer_repaired"))
                self._schedule_after_repair(("transformer", bus_id))

        for ident in sorted(self.ict_state):
            state = self.ict_state[ident]
            if state.mode == UNDER_REPAIR and state.remaining_repair_h < self.dt - _EPS:
                self.ict_state[ident] = ComponentState(WORKING)
                self.ledger.events.append((time_h, ident, "ict_repaired"))
                self._schedule_after_repair(("ict", ident))
        return actions

    def _restore_line(self, fault, actions, time_h):
        for disc in fault.boundary:
            normal = self.model.switchgear[disc].normal_closed
            if self.switch_closed[disc] != normal:
                self.switch_closed[disc] = normal
                actions.append((disc, normal))
        self.line_state[fault.line_id] = ComponentState(WORKING)
        del self.faults[fault.line_id]
        self.ledger.events.append((time_h, fault.line_id, "line_repaired"))
        self._schedule_after_repair(("line", fault.line_id))

    def _schedule_after_repair(self, key):
        if not self.scripted:
            self._schedule_next(key, self.t_index + 1)

    def _set_breakers(self):
        """A feeder breaker stays open while its root would feed a fault."""
        failed = {l for l, s in self.line_state.items() if s.mode != WORKING}
        for dsys in self.model.distribution_systems:
            breaker = self.model.breaker_of_system[dsys.id]
            self.switch_closed[breaker] = not self._root_sees_fault(
                dsys.root_bus, failed)

    def _root_sees_fault(self, root, failed) -> bool:
        if not failed:
            return False
        seen = {root}
        stack = [root]
        while stack:
            bus = stack.pop()
            for line_id, other in self.model.adjacency[bus]:
                conducts = all(
                    self.switch_closed[s] or self.model.switchgear[s].kind == BREAKER
                    for s in self.model.line_switches[line_id])
                if not conducts:
                    continue
                if line_id in failed:
                    return True
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        return False

    def _electrical_fault_active(self) -> bool:
        if self.faults:
            return True
        return any(s.mode != WORKING for s in self.transformer_state.values())

    def _count_down(self):
        for fault in self.faults.values():
            fault.remaining_h = max(fault.remaining_h - self.dt, 0.0)
        for line_id, fault in self.faults.items():
            state = self.line_state[line_id]
            if state.mode == FAILED:
                self.line_state[line_id] = ComponentState(
                    FAILED, until_repair_h=fault.remaining_h)
            elif state.mode == UNDER_REPAIR:
                self.line_state[line_id] = ComponentState(
                    UNDER_REPAIR, remaining_repair_h=fault.remaining_h)
        for bus_id, state in self.transformer_state.items():
            if state.mode != WORKING:
                params = self.model.buses[bus_id].transformer
                self.transformer_state[bus_id] = draw_status(state, params, self.dt, self.rng)
        for ident, state in self.ict_state.items():
            if state.mode == UNDER_REPAIR:
                left = state.remaining_repair_h - self.dt
                self.ict_state[ident] = (ComponentState(UNDER_REPAIR, remaining_repair_h=left)
                                         if left > _EPS else ComponentState(WORKING))

    # -- electrical evaluation ----------------------------------------------

    def _demand_now(self, t):
        demand, demand_q = {}, {}
        for b in self.model.load_points:
            load = self.model.buses[b].load
            if load is None:
                demand[b] = 0.0
                demand_q[b] = 0.0
                continue
            mult = self.profiles.load_multiplier(load.profile, t)
            demand[b] = load.peak_mw * mult
            demand_q[b] = load.peak_mvar * mult
        return demand, demand_q

    def _evaluate_and_accrue(self, t):
        model = self.model
        dt = self.dt
        demand, demand_q = self._demand_now(t)
        failed_lines = {l for l, s in self.line_state.items() if s.mode != WORKING}
        components = connected_components(model, self.switch_closed, failed_lines)

        served = {}
        islanded_now = dict.fromkeys(self.was_islanded, False)
        for comp in components:
            self._serve_component(comp, t, demand, demand_q, failed_lines,
                                  served, islanded_now)
        self.was_islanded = islanded_now

        time_h = t * dt
        for b in model.load_points:
            d = demand.get(b, 0.0)
            s = served.get(b, 0.0)
            unsupplied = served.get(b) is None
            if unsupplied:
                s = 0.0
            shortfall = max(d - s, 0.0)
            if shortfall > _EPS:
                self.ledger.ens_mwh[b] += shortfall * dt
            fully_out = unsupplied or (d > _EPS and s <= _EPS)
            if fully_out:
                self.ledger.outage_hours[b] += dt
                if not self.was_out[b]:
                    self.ledger.interruptions[b] += 1.0
                    self.ledger.events.append((time_h, b, "interrupted"))
            self.was_out[b] = fully_out

    def _serve_component(self, comp, t, demand, demand_q, failed_lines,
                         served, islanded_now):
        """Run dispatch + load flow + shedding for one sub-system.

        `served[bus]` is set to the supplied MW, or None when the bus has no
        energized path at all (disconnected or its transformer is down).
        """
        model = self.model
        comp_set = set(comp)

        tx_down = {b for b in comp if b in self.transformer_state
                   and not self.transformer_state[b].mode == WORKING}

        grid_bus = None
        grid_limit = 0.0
        for dsys in model.distribution_systems:
            if dsys.root_bus in comp_set and self.switch_closed[
                    model.breaker_of_system[dsys.id]]:
                grid_bus = dsys.root_bus
                grid_limit = model.feeder_capacity[dsys.id]
                break
        # a singleton root feeds nothing; islands must be driven by local sources
        generators = []
        if grid_bus is not None:
            generators.append((f"grid:{grid_bus}", grid_bus, 0.0, grid_limit, 0.0))

        production_cap = 0.0
        for b in comp:
            for unit_id in model.production_of_bus[b]:
                unit = model.production[unit_id]
                cap = unit.max_mw
                if unit.profile is not None:
                    prof = self.profiles.production_mw(unit.profile, t)
                    if prof is not None:
                        cap = min(cap, max(prof, 0.0))
                production_cap += cap
                generators.append((unit_id, b, min(unit.min_mw, cap), cap, 0.0))

        live_demand = {b: demand.get(b, 0.0) for b in comp if b not in tx_down}
        total_demand = sum(live_demand.values())

        batteries_here = [(b, model.battery_of_bus[b]) for b in comp
                          if b in model.battery_of_bus]
        grid_connected = grid_bus is not None
        for bus, bat_id in sorted(batteries_here):
            bat = model.batteries[bat_id]
            if not grid_connected:
                if not self.was_islanded[bat_id]:
                    # outage begins: market behavior collapses to a fresh SOC draw
                    self.soc[bat_id] = draw_battery_soc(bat, self.rng)
                islanded_now[bat_id] = True
            mode, bound = update_battery_demand(
                total_demand, production_cap, bat, self.soc[bat_id],
                self.dt, grid_connected)
            if mode == DISCHARGE and bound > _EPS:
                # faint merit-order cost: the battery backs up free production
                generators.append((bat_id, bus, 0.0, bound, 1e-7))
            elif mode == CHARGE and bound > _EPS:
                generators.append((bat_id, bus, -bound, 0.0, 1e-7))

        has_source = any(g[3] > _EPS or g[2] < -_EPS for g in generators)
        if not has_source:
            for b in comp:
                served[b] = None
            return
        if total_demand <= _EPS:
            for b in comp:
                served[b] = None if b in tx_down else demand.get(b, 0.0)
            return

        lines_here = [model.lines[l] for l in model.line_ids
                      if l not in failed_lines
                      and model.lines[l].from_bus in comp_set
                      and model.lines[l].to_bus in comp_set
                      and model.line_conducts(l, self.switch_closed, failed_lines)]

        # Grid-connected sub-system whose pure-grid dispatch stays within every
        # limit: zero shed is optimal, skip the optimization and the sweep.
        if (grid_bus is not None and total_demand <= grid_limit + _EPS
                and self._grid_flows_within_caps(grid_bus, comp_set, lines_here,
                                                 live_demand)):
            for b in comp:
                served[b] = None if b in tx_down else demand.get(b, 0.0)
            return

        cost_of = {b: self._shed_cost(b) for b in comp}
        problem = shed.build_shedding_problem(
            comp, live_demand, cost_of, generators,
            [(l.id, l.from_bus, l.to_bus, l.capacity_mw) for l in lines_here])
        result = shed.solve_shedding(problem)
        if result.status != shed.OPTIMAL:
            self.ledger.warnings.append(
                f"t={t * self.dt:g}h: shedding infeasible in sub-system {comp[0]}")
            for b in comp:
                served[b] = None
            return

        result = self._confirm_with_loadflow(comp, live_demand, demand_q, lines_here,
                                             generators, cost_of, grid_bus, result, t)

        for b in comp:
            if b in tx_down:
                served[b] = None
            else:
                served[b] = live_demand.get(b, 0.0) - result.shed_mw.get(b, 0.0)

        for bus, bat_id in batteries_here:
            dispatch = result.generation_mw.get(bat_id, 0.0)
            bat = model.batteries[bat_id]
            self.soc[bat_id] = min(max(
                self.soc[bat_id] - dispatch * self.dt / bat.capacity_mwh,
                bat.soc_min), bat.soc_max)

    def _grid_flows_within_caps(self, root, comp_set, lines_here, live_demand) -> bool:
        """Check the lossless radial flows of serving everything from the grid."""
        children = {b: [] for b in comp_set}
        seen = {root}
        order = [root]
        adj = {}
        for line in lines_here:
            adj.setdefault(line.from_bus, []).append((line.to_bus, line))
            adj.setdefault(line.to_bus, []).append((line.from_bus, line))
        cursor = 0
        feed_line = {}
        while cursor < len(order):
            bus = order[cursor]
            cursor += 1
            for other, line in adj.get(bus, ()):
                if other in seen:
                    continue
                seen.add(other)
                children[bus].append(other)
                feed_line[other] = line
                order.append(other)
        subtree = {b: live_demand.get(b, 0.0) for b in comp_set}
        for bus in reversed(order):
            for child in children[bus]:
                subtree[bus] += subtree[child]
        for bus in order[1:]:
            if subtree[bus] > feed_line[bus].capacity_mw + _EPS:
                return False
        return True

    def _shed_cost(self, bus_id) -> float:
        load = self.model.buses[bus_id].load
        if load is None:
            return 0.0
        return float(self.cost_table.get(load.category, 1.0))

    def _confirm_with_loadflow(self, comp, live_demand, demand_q, lines_here,
                               generators, cost_of, grid_bus, result, t):
        """Re-run the sweep with the shed applied; one repair pass on overload."""
        if len(comp) < 2 or not lines_here:
            return result
        slack = grid_bus
        if slack is None:
            # island slack: the bus carrying the largest source
            source_buses = sorted(
                {g[1] for g in generators if g[3] > _EPS},
                key=lambda b: (-max(g[3] for g in generators if g[1] == b), b))
            if not source_buses:
                return result
            slack = source_buses[0]

        solution = self._run_fbs(comp, live_demand, demand_q, lines_here,
                                 generators, result, slack)
        if solution is None:
            return result
        if not solution.converged:
            self.ledger.warnings.append(
                f"t={t * self.dt:g}h: load flow did not converge in sub-system {comp[0]}")
            return result

        served_total = sum(live_demand.get(b, 0.0) - result.shed_mw.get(b, 0.0)
                           for b in comp)
        gen_total = solution.slack_mw + sum(
            gen for gid, gen in result.generation_mw.items()
            if self._generator_bus(gid, generators) != slack)
        if abs(gen_total - solution.losses_mw - served_total) > 1e-4:
            self.ledger.warnings.append(
                f"t={t * self.dt:g}h: power balance residual "
                f"{gen_total - solution.losses_mw - served_total:.2e} MW "
                f"in sub-system {comp[0]}")

        worst = 0.0
        for line in lines_here:
            flow = abs(solution.line_flow_mw.get(line.id, 0.0))
            if flow > line.capacity_mw:
                worst = max(worst, flow / line.capacity_mw - 1.0)
        if worst <= 0.01:
            return result

        # one repair pass with a tightened capacity margin covering the overshoot
        margin = 1.0 / (1.0 + worst + 0.01)
        problem = shed.build_shedding_problem(
            comp, live_demand, cost_of, generators,
            [(l.id, l.from_bus, l.to_bus, l.capacity_mw * margin) for l in lines_here])
        retry = shed.solve_shedding(problem)
        if retry.status == shed.OPTIMAL:
            return retry
        return result

    @staticmethod
    def _generator_bus(gen_id, generators):
        for g in generators:
            if g[0] == gen_id:
                return g[1]
        return None

    def _run_fbs(self, comp, live_demand, demand_q, lines_here, generators,
                 result, slack):
        base = self.model.base_mva
        injections = {}
        for b in comp:
            d = live_demand.get(b, 0.0) - result.shed_mw.get(b, 0.0)
            q = demand_q.get(b, 0.0)
            full = live_demand.get(b, 0.0)
            if full > _EPS:
                q *= d / full  # shed at constant power factor
            else:
                q = 0.0
            injections[b] = complex(d, q)
        for gen_id, output in result.generation_mw.items():
            bus = self._generator_bus(gen_id, generators)
            if bus is not None and bus != slack:
                injections[bus] -= output  # unity power factor injection
        injections = {b: s / base for b, s in injections.items()}
        edges = [(l.id, l.from_bus, l.to_bus, complex(l.r_pu, l.x_pu))
                 for l in lines_here]
        try:
            problem = LoadFlowProblem.from_tree(slack, edges, injections, base)
        except NonRadialError as exc:
            self.ledger.warnings.append(f"load flow skipped: {exc}")
            return None
        return solve_fbs(problem, self.config.loadflow_tolerance,
                         self.config.loadflow_max_iter)

    def isolate_and_restore(self):
        """Advance isolation/restoration state; returns switching actions."""
        actions = self._apply_transitions()
        self._set_breakers()
        return actions


def update_battery_demand(subsystem_demand_mw, production_cap_mw, battery, soc,
                          dt_h, grid_connected):
    """Dispatch direction and MW bound for one battery this increment.

    Grid-connected batteries idle (their market behavior is captured by the
    per-outage uniform SOC draw). Islanded batteries discharge into a deficit
    or charge from a surplus, limited by the inverter and the energy headroom.
    """
    if grid_connected:
        return IDLE, 0.0
    deficit = subsystem_demand_mw - production_cap_mw
    if deficit > _EPS:
        bound = min(battery.inverter_mw,
                    max(soc - battery.soc_min, 0.0) * battery.capacity_mwh / dt_h)
        return DISCHARGE, max(bound, 0.0)
    surplus = -deficit
    bound = min(battery.inverter_mw,
                max(battery.soc_max - soc, 0.0) * battery.capacity_mwh / dt_h,
                surplus)
    return CHARGE, max(bound, 0.0)


def run_iteration(model, profiles, config, iteration_index, script=None,
                  cost_table=None) -> HistoryLedger:
    """One full pass from t=0 to the horizon, deterministically seeded."""
    rng = np.random.default_rng([config.master_seed, iteration_index])
    sim = SequentialSimulation(model, profiles, config, rng, script=script,
                               cost_table=cost_table)
    return sim.run()


_POOL_STATE = {}


def _pool_init(model, profiles, config, cost_table):
    _POOL_STATE["args"] = (model, profiles, config, cost_table)


def _pool_run(index):
    model, profiles, config, cost_table = _POOL_STATE["args"]
    return index, run_iteration(model, profiles, config, index, cost_table=cost_table)


def run_monte_carlo(model, profiles, config, cost_table=None):
    """All iterations; results are ordered by iteration index so any worker
    count produces identical output."""
    indices = list(range(config.iterations))
    if config.worker_count == 1 or config.iterations == 1:
        return [run_iteration(model, profiles, config, i, cost_table=cost_table)
                for i in indices]
    results = {}
    with ProcessPoolExecutor(
            max_workers=config.worker_count,
            initializer=_pool_init,
            initargs=(model, profiles, config, cost_table)) as pool:
        chunk = max(1, len(indices) // (config.worker_count * 8))
        for index, ledger in pool.map(_pool_run, indices, chunksize=chunk):
            results[index] = ledger
    return [results[i] for i in indices]
