"""Closed-form reliability of a passive radial network.

For each load point the failure rate sums the rates of every component whose
failure interrupts it; the annual outage time weighs each contribution by
the repair time when the point stays isolated for the whole repair, else by
the sectioning time. This is only valid without local sources or ICT (no
restoration paths, one fixed sectioning time), which is exactly the setting
used to validate the Monte Carlo engine's convergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .indices import caidi
from .network import NetworkModel, connected_components


class ActiveComponentsError(ValueError):
    """The analytical model cannot handle DG, batteries or ICT."""


@dataclass(frozen=True)
class AnalyticalReport:
    lambda_i: dict   # load point -> interruptions / year
    u_i: dict        # load point -> outage hours / year
    r_i: dict        # load point -> hours / interruption (None if never fails)
    saifi: float
    saidi: float
    caidi: Optional[float]
    ens_mwh: float


def analytical_indices(model: NetworkModel, mean_loads_mw,
                       sectioning_h: float = 1.0) -> AnalyticalReport:
    """Load-point and system indices of a passive network.

    `mean_loads_mw` maps load-point buses to their average demand for the
    ENS term; missing buses count zero.
    """
    if model.production or model.batteries or not model.ict.empty:
        raise ActiveComponentsError(
            "analytical evaluation needs a passive network "
            "(no production units, batteries or ICT)")

    load_points = model.load_points
    lam = {b: 0.0 for b in load_points}
    u = {b: 0.0 for b in load_points}

    for line in model.lines.values():
        rate = line.reliability.failure_rate
        if rate <= 0:
            continue
        repair = line.reliability.repair_time_h
        system = model.system_of_bus.get(line.from_bus)
        isolated = _isolated_for_repair(model, line.id)
        for b in load_points:
            if model.system_of_bus.get(b) != system:
                continue
            lam[b] += rate
            u[b] += rate * (sectioning_h + (repair if b in isolated else 0.0))

    for bus in model.buses.values():
        if bus.transformer is None or not bus.transformer.can_fail:
            continue
        if bus.id in lam:
            lam[bus.id] += bus.transformer.failure_rate
            u[bus.id] += bus.transformer.failure_rate * bus.transformer.repair_time_h

    customers = {b: model.buses[b].customers for b in load_points}
    total_customers = sum(customers.values())
    if total_customers <= 0:
        raise ValueError("analytical indices need a positive customer count")
    saifi = sum(lam[b] * customers[b] for b in load_points) / total_customers
    saidi = sum(u[b] * customers[b] for b in load_points) / total_customers
    ens = sum(u[b] * float(mean_loads_mw.get(b, 0.0)) for b in load_points)

    return AnalyticalReport(
        lambda_i=lam,
        u_i=u,
        r_i={b: (u[b] / lam[b] if lam[b] > 0 else None) for b in load_points},
        saifi=saifi,
        saidi=saidi,
        caidi=caidi(saidi, saifi),
        ens_mwh=ens,
    )


def _isolated_for_repair(model: NetworkModel, line_id: str) -> frozenset:
    """Buses that stay dark for the whole repair of a fault on `line_id`."""
    switch_closed = model.normal_switch_states()
    for disc in model.sections[line_id].boundary_disconnectors:
        switch_closed[disc] = False
    components = connected_components(model, switch_closed, failed_lines={line_id})
    energized = set()
    by_bus = {}
    for comp in components:
        for b in comp:
            by_bus[b] = comp
    for dsys in model.distribution_systems:
        comp = by_bus.get(dsys.root_bus, ())
        # the breaker recloses only if no failed line is left in the root's
        # component; with the section cut out this is the healthy upstream part
        if line_id not in {l for l in model.line_ids
                           if model.lines[l].from_bus in comp
                           and model.lines[l].to_bus in comp}:
            energized.update(comp)
    return frozenset(b for b in model.bus_ids if b not in energized)
