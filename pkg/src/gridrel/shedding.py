"""Cost-minimal load shedding for one sub-system.

The problem is a pure linear program over active power: choose per-node shed
amounts minimizing the shedding cost, subject to nodal balance with line
incidence signs, generator limits, shed bounds, and line capacities. Losses
are ignored here; the caller re-runs the load flow with the shed applied to
confirm feasibility.

The solver is an exact bounded-variable two-phase simplex with Bland's rule,
written for small dense problems (tens of variables). Equal-cost optima are
broken deterministically toward the lexicographically smallest shed vector
(in canonical node order) via a vanishing cost perturbation; the reported
objective is always recomputed from the unperturbed costs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

_TOL = 1e-9


@dataclass(frozen=True)
class GeneratorVar:
    id: str
    node: int
    min_mw: float
    max_mw: float
    cost: float = 0.0


@dataclass(frozen=True)
class LineVar:
    id: str
    from_node: int
    to_node: int
    capacity_mw: float


@dataclass(frozen=True)
class SheddingProblem:
    node_ids: tuple
    demand_mw: tuple
    shed_cost: tuple
    generators: tuple = ()
    lines: tuple = ()

    def __post_init__(self):
        n = len(self.node_ids)
        assert len(self.demand_mw) == n and len(self.shed_cost) == n
        for line in self.lines:
            assert 0 <= line.from_node < n and 0 <= line.to_node < n
            assert line.from_node != line.to_node


@dataclass(frozen=True)
class SheddingResult:
    status: str
    shed_mw: dict = field(default_factory=dict)        # node id -> MW
    generation_mw: dict = field(default_factory=dict)  # generator id -> MW
    line_flow_mw: dict = field(default_factory=dict)   # line id -> MW (from -> to)
    objective: float = 0.0

    @property
    def total_shed_mw(self) -> float:
        return sum(self.shed_mw.values())


def build_shedding_problem(node_ids, demand_mw, shed_cost, generators=(),
                           lines=()) -> SheddingProblem:
    """Assemble the LP for one sub-system.

    `generators` includes every supply path into the sub-system: production
    units capped at their drawn profile value, batteries at their dispatch
    bound (a negative lower bound means the battery may charge), and the
    upstream grid connection as a generator bounded by the feeder capacity.
    """
    ids = tuple(node_ids)
    order = {b: i for i, b in enumerate(ids)}
    gens = tuple(GeneratorVar(g[0], order[g[1]], float(g[2]), float(g[3]),
                              float(g[4]) if len(g) > 4 else 0.0)
                 for g in generators)
    lns = tuple(LineVar(l[0], order[l[1]], order[l[2]], float(l[3])) for l in lines)
    return SheddingProblem(
        node_ids=ids,
        demand_mw=tuple(float(demand_mw.get(b, 0.0)) for b in ids),
        shed_cost=tuple(float(shed_cost.get(b, 0.0)) for b in ids),
        generators=gens,
        lines=lns,
    )


def solve_shedding(problem: SheddingProblem) -> SheddingResult:
    """Solve the LP to global optimality."""
    n = len(problem.node_ids)
    ng = len(problem.generators)
    nl = len(problem.lines)
    nv = n + ng + nl  # shed vars, generator vars, flow vars

    demand = np.asarray(problem.demand_mw, dtype=float)
    cost = np.asarray(problem.shed_cost, dtype=float)

    lo = np.empty(nv)
    hi = np.empty(nv)
    c = np.zeros(nv)
    lo[:n] = 0.0
    hi[:n] = demand
    # the perturbation makes earlier nodes marginally pricier to shed, which
    # pins ties to the lexicographically smallest shed vector
    scale = float(np.max(np.abs(cost))) if n else 0.0
    eps = 1e-9 * (1.0 + scale)
    c[:n] = cost + eps * (np.arange(n, 0, -1) / max(n, 1))
    for j, g in enumerate(problem.generators):
        lo[n + j] = g.min_mw
        hi[n + j] = g.max_mw
        c[n + j] = g.cost
    for j, l in enumerate(problem.lines):
        lo[n + ng + j] = -l.capacity_mw
        hi[n + ng + j] = l.capacity_mw

    # nodal balance rows: gamma.f - sum(gen) - shed = -demand
    a = np.zeros((n, nv))
    b = -demand.copy()
    for k in range(n):
        a[k, k] = -1.0
    for j, g in enumerate(problem.generators):
        a[g.node, n + j] = -1.0
    for j, l in enumerate(problem.lines):
        a[l.from_node, n + ng + j] = 1.0
        a[l.to_node, n + ng + j] = -1.0

    x, status = _bounded_simplex(a, b, c, lo, hi)
    if status != OPTIMAL:
        return SheddingResult(status=INFEASIBLE)

    shed = {bid: float(x[i]) for i, bid in enumerate(problem.node_ids)}
    gen = {g.id: float(x[n + j]) for j, g in enumerate(problem.generators)}
    flow = {l.id: float(x[n + ng + j]) for j, l in enumerate(problem.lines)}
    objective = float(np.dot(cost, x[:n]))
    return SheddingResult(OPTIMAL, shed, gen, flow, objective)


def _bounded_simplex(a, b, c, lo, hi):
    """Two-phase simplex for min c.x s.t. a x = b, lo <= x <= hi.

    All bounds must be finite. Bland's rule on entering and leaving variables
    guarantees termination. Returns (x, status).
    """
    m, nv = a.shape
    # artificial columns form the initial basis
    art = np.arange(nv, nv + m)
    x = lo.copy()
    resid = b - a @ x
    a_full = np.hstack([a, np.diag(np.where(resid >= 0, 1.0, -1.0))])
    lo_full = np.concatenate([lo, np.zeros(m)])
    hi_full = np.concatenate([hi, np.full(m, np.inf)])
    x_full = np.concatenate([x, np.abs(resid)])

    basis = list(art)
    at_upper = np.zeros(nv + m, dtype=bool)

    phase1_cost = np.concatenate([np.zeros(nv), np.ones(m)])
    stat = _simplex_core(a_full, b, phase1_cost, lo_full, hi_full, x_full, basis, at_upper)
    if stat != OPTIMAL or float(phase1_cost @ x_full) > 1e-7:
        return x_full[:nv], INFEASIBLE

    # pin artificials at zero for phase 2
    hi_full[nv:] = 0.0
    x_full[nv:] = 0.0
    phase2_cost = np.concatenate([c, np.zeros(m)])
    stat = _simplex_core(a_full, b, phase2_cost, lo_full, hi_full, x_full, basis, at_upper)
    if stat != OPTIMAL:
        return x_full[:nv], stat
    return x_full[:nv], OPTIMAL


def _simplex_core(a, b, c, lo, hi, x, basis, at_upper, max_pivots=5000):
    m, total = a.shape
    basic = np.zeros(total, dtype=bool)
    basic[basis] = True

    # re-anchor the basic values exactly at phase entry
    nonbasic = ~basic
    rhs = b - a[:, nonbasic] @ x[nonbasic]
    try:
        x[basis] = np.linalg.solve(a[:, basis], rhs)
    except np.linalg.LinAlgError:
        return "singular"

    for _ in range(max_pivots):
        bmat = a[:, basis]
        try:
            y = np.linalg.solve(bmat.T, c[basis])
        except np.linalg.LinAlgError:
            return "singular"
        reduced = c - y @ a

        # Bland: smallest-index nonbasic variable with a favorable direction
        entering = -1
        direction = 0.0
        for j in range(total):
            if basic[j] or hi[j] - lo[j] <= _TOL:
                continue
            if not at_upper[j] and reduced[j] < -_TOL:
                entering, direction = j, 1.0
                break
            if at_upper[j] and reduced[j] > _TOL:
                entering, direction = j, -1.0
                break
        if entering < 0:
            return OPTIMAL

        w = np.linalg.solve(bmat, a[:, entering])

        # ratio test: entering variable's own span competes with every basic
        # variable hitting one of its bounds; ties resolve by variable index
        limit = hi[entering] - lo[entering]
        blocker = entering
        leaving_row = -1
        leaving_to_upper = False
        for i in range(m):
            delta = direction * w[i]
            vi = basis[i]
            if delta > _TOL:
                room = (x[vi] - lo[vi]) / delta
                to_upper = False
            elif delta < -_TOL:
                room = (hi[vi] - x[vi]) / (-delta)
                to_upper = True
            else:
                continue
            room = max(room, 0.0)
            if room < limit - _TOL or (room <= limit + _TOL and vi < blocker):
                limit = min(limit, room)
                blocker = vi
                leaving_row = i
                leaving_to_upper = to_upper
        if not np.isfinite(limit):
            return "unbounded"

        x[entering] += direction * limit
        for i in range(m):
            x[basis[i]] -= direction * limit * w[i]

        if leaving_row < 0:
            # bound flip: the entering variable crossed its whole range
            at_upper[entering] = not at_upper[entering]
            continue

        leaving = basis[leaving_row]
        x[leaving] = hi[leaving] if leaving_to_upper else lo[leaving]
        basic[leaving] = False
        basic[entering] = True
        at_upper[leaving] = leaving_to_upper
        at_upper[entering] = False
        basis[leaving_row] = entering

    return "stalled"
