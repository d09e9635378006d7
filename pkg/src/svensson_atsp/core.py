"""Svensson's algorithm with the circuit-based Step 2 and runtime certification.

The algorithm extends a backbone ``B`` to a tour ``E(B) + H``.  It keeps an
initialization ``H~`` (light, local, Eulerian, off the backbone) and repeats

1. compute a subtour cover ``F`` for the current ``H``;
2. split ``F`` into circuits; a circuit reaching far outside its component
   yields a significantly better initialization and a restart;
3. connect the component of largest index with cheap local circuits ``X``
   and move ``(F + X)[V(Z)]`` into ``H``.

Every inequality the analysis relies on is re-checked with exact arithmetic;
a failed check raises :class:`CertificationError` instead of continuing.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .cover import SubtourCover, compute_subtour_cover, cost_cap
from .instance import GENERAL, GRAPH_TSP, Backbone, StronglyLaminarInstance
from .multigraph import (
    Circuit,
    ContractError,
    component_count,
    connected_components,
    decompose_into_circuits,
    is_eulerian,
    min_cost_crossing_circuit,
)

DEFAULT_GAMMA = Fraction(169, 70)
DEFAULT_EPSILON = Fraction(1, 10)


class CertificationError(RuntimeError):
    """A proven inequality failed at runtime; carries the trace so far."""

    def __init__(self, message: str, trace: Optional[list] = None):
        super().__init__(message)
        self.trace = trace or []


def _sqrt2_upper(digits: int = 30) -> Fraction:
    scale = 10**digits
    return Fraction(math.isqrt(2 * scale * scale) + 1, scale)


@dataclass(frozen=True)
class Config:
    gamma: Fraction = DEFAULT_GAMMA
    epsilon: Fraction = DEFAULT_EPSILON
    relaxed_step3_threshold: bool = False

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        object.__setattr__(self, "epsilon", Fraction(self.epsilon))
        if not 0 < self.epsilon <= Fraction(1, 4):
            raise ValueError(f"epsilon must lie in (0, 1/4], got {self.epsilon}")
        if self.gamma < 2 / (1 - self.epsilon):
            raise ValueError(f"gamma must be at least 2/(1-epsilon) = {2 / (1 - self.epsilon)}")

    @property
    def p(self) -> int:
        return math.ceil(2 / self.epsilon)

    @property
    def _denominator(self) -> Fraction:
        return self.gamma * (1 - self.epsilon) - 1

    @property
    def exploring_coefficient(self) -> Fraction:
        """1 + 1/(gamma(1-eps) - 1)."""
        return 1 + 1 / self._denominator

    @property
    def f_coefficient(self) -> Fraction:
        """2(1-eps)/(gamma(1-eps) - 1), the per-component F-edge factor."""
        return 2 * (1 - self.epsilon) / self._denominator

    @property
    def graph_tsp_ratio(self) -> Fraction:
        """Guarantee c(H) <= ratio * LP for unit-weight instances."""
        return (1 + self.f_coefficient) * self.gamma

    @property
    def alpha(self) -> Fraction:
        """Weighted-instance constant: c(H) <= 2 LP + (alpha + 1) sum 2y_v."""
        return (1 + self.f_coefficient) * (self.gamma + self.epsilon)

    @property
    def step3_factor(self) -> Fraction:
        """Multiplier on the slack threshold for admitting X-circuits."""
        if not self.relaxed_step3_threshold:
            return Fraction(1)
        # rational lower bound on 1/(sqrt2 - 3 eps) keeps the test conservative
        return 1 / (_sqrt2_upper() - 3 * self.epsilon)


def limit_ratio(gamma, epsilon) -> Fraction:
    """(1 + 2(1-eps)/(gamma(1-eps)-1)) * gamma, without the Config range checks."""
    gamma, epsilon = Fraction(gamma), Fraction(epsilon)
    return (1 + 2 * (1 - epsilon) / (gamma * (1 - epsilon) - 1)) * gamma


def compute_budgets(inst: StronglyLaminarInstance, b: Backbone, cfg: Config) -> dict[int, Fraction]:
    outside = [v for v in range(inst.g.n) if v not in b.vertices]
    if inst.mode == GRAPH_TSP:
        return {v: cfg.gamma * inst.in_flow(v) for v in outside}
    total = sum((2 * inst.y_v(w) for w in outside), Fraction(0))
    floor = cfg.epsilon / inst.g.n * total
    return {v: max(cfg.gamma * 2 * inst.y_v(v), floor) for v in outside}


class Context:
    """Everything fixed for a run: instance, backbone, configuration, budgets."""

    def __init__(self, inst: StronglyLaminarInstance, b: Backbone, cfg: Config):
        self.inst = inst
        self.g = inst.g
        self.b = b
        self.cfg = cfg
        self.ell = compute_budgets(inst, b, cfg)
        self.outside = frozenset(self.ell)
        self.min_ell = min(self.ell.values()) if self.ell else Fraction(0)
        self.min_ell_p = self.min_ell**cfg.p

    def ell_of(self, vset) -> Fraction:
        return sum((self.ell[v] for v in vset), Fraction(0))

    def check_budgets(self) -> list[str]:
        """Return violated budget invariants (empty when all hold)."""
        problems = []
        if not self.ell:
            return problems
        if any(v <= 0 for v in self.ell.values()):
            problems.append("nonpositive budget")
        n = self.g.n
        cfg = self.cfg
        if self.ell_of(self.outside) > (cfg.gamma + cfg.epsilon) * n * n / cfg.epsilon * self.min_ell:
            problems.append("budget spread inequality")
        for v, budget in self.ell.items():
            if budget < cfg.gamma * self.inst.in_flow(v) * 2 * self.inst.y_v(v):
                problems.append(f"budget lower bound at vertex {v}")
        return problems


@dataclass
class Subgraph:
    vertices: frozenset
    edges: Counter


class InitState:
    """An initialization H~ with its sorted components W~_1..W~_k and potential."""

    def __init__(self, ctx: Context, h_tilde: Counter):
        self.ctx = ctx
        g = ctx.g
        self.h_tilde = Counter({e: k for e, k in h_tilde.items() if k})
        bad = next((e for e in self.h_tilde
                    if g.tails[e] not in ctx.outside or g.heads[e] not in ctx.outside), None)
        if bad is not None:
            raise ContractError(f"initialization edge {bad} touches the backbone")
        if not all(ctx.inst.is_local(e) for e in self.h_tilde):
            raise ContractError("initialization must be local")
        if not is_eulerian(g, self.h_tilde):
            raise ContractError("initialization must be Eulerian")
        comps = connected_components(g, self.h_tilde, ctx.outside)
        rows = []
        for verts, edges in comps:
            s = ctx.ell_of(verts) - g.cost(edges)
            if s < 0:
                raise ContractError(f"initialization is not light: component {sorted(verts)} has slack {s}")
            rows.append((s, min(verts), verts, edges))
        rows.sort(key=lambda r: (-r[0], r[1]))
        self.components: list[frozenset] = [r[2] for r in rows]
        self.component_edges: list[Counter] = [r[3] for r in rows]
        self.slacks: list[Fraction] = [r[0] for r in rows]
        self.w0 = ctx.b.vertices
        self.comp_index = {}
        for i, verts in enumerate(self.components, 1):
            for v in verts:
                self.comp_index[v] = i
        self.phi = sum((s**ctx.cfg.p for s in self.slacks), Fraction(0))

    @property
    def k(self) -> int:
        return len(self.components)

    def W(self, i: int) -> frozenset:
        return self.w0 if i == 0 else self.components[i - 1]

    def slack_of(self, i: int) -> Fraction:
        return self.slacks[i - 1]

    def edges_of(self, i: int) -> Counter:
        return self.component_edges[i - 1]


def slack(state: InitState, vset, eset: Counter) -> Fraction:
    """ell(vset) - c(eset[vset])."""
    ctx = state.ctx
    vset = frozenset(vset)
    if vset & ctx.b.vertices:
        raise ValueError("slack is only defined off the backbone")
    g = ctx.g
    inside = sum((g.costs[e] * k for e, k in eset.items()
                  if g.tails[e] in vset and g.heads[e] in vset), Fraction(0))
    return ctx.ell_of(vset) - inside


def potential(state: InitState) -> Fraction:
    return sum((s**state.ctx.cfg.p for s in state.slacks), Fraction(0))


def significantly_better(state: InitState, phi_new: Fraction) -> bool:
    return phi_new - state.phi > state.ctx.min_ell_p


def index(state: InitState, vset) -> int:
    vset = set(vset)
    if vset & state.w0:
        return 0
    idx = [state.comp_index[v] for v in vset if v in state.comp_index]
    if not idx:
        raise ContractError("vertex set meets no W~_j")
    return min(idx)


def _circuit_vertices(state: InitState, c: Circuit) -> frozenset:
    return frozenset(c.vertices(state.ctx.g))


def check_exploring_circuit(state: InitState, c: Circuit) -> bool:
    """c(E(C)) > (1 + 1/(gamma(1-eps)-1)) * sum of 2 y_v over V(C) inside W~_ind(C)."""
    verts = _circuit_vertices(state, c)
    i = index(state, verts)
    if i == 0:
        raise ValueError("the exploring-circuit test applies to circuits of positive index")
    inst = state.ctx.inst
    inner = sum((2 * inst.y_v(v) for v in verts & state.W(i)), Fraction(0))
    return c.cost(state.ctx.g) > state.ctx.cfg.exploring_coefficient * inner


def check_large_and_light(state: InitState, d: Subgraph) -> bool:
    """slack(D) > slack(W~_ind(D)) + eps * ell(V(D) \\ W~_ind(D))."""
    i = index(state, d.vertices)
    if i == 0:
        raise ValueError("the large-and-light test applies to subgraphs of positive index")
    ctx = state.ctx
    rhs = state.slack_of(i) + ctx.cfg.epsilon * ctx.ell_of(d.vertices - state.W(i))
    return slack(state, d.vertices, d.edges) > rhs


def circuit_to_D(state: InitState, c: Circuit) -> Subgraph:
    """D with V(D) = W~_ind(C) + V(C) and E(D) = H~[W~_ind(C)] + E(C)."""
    verts = _circuit_vertices(state, c)
    i = index(state, verts)
    if i == 0:
        raise ValueError("circuit must have positive index")
    return Subgraph(state.W(i) | verts, state.edges_of(i) + c.multiset())


def improved_initialization(state: InitState, d: Subgraph) -> tuple[InitState, str]:
    """Significantly better initialization from a large and light D.

    Returns the new state and which construction was used: ``"drop"`` when
    the component of index ind(D) has slack below min ell (its edges are
    simply removed), otherwise ``"merge"`` (D joined with the components
    in J).
    """
    if not check_large_and_light(state, d):
        raise ContractError("D does not satisfy the large-and-light hypothesis")
    ctx = state.ctx
    i = index(state, d.vertices)
    if state.slack_of(i) < ctx.min_ell:
        h_new = state.h_tilde - state.edges_of(i)
        branch = "drop"
    else:
        touched = sorted({state.comp_index[v] for v in d.vertices})
        keep_j = [j for j in touched
                  if ctx.ell_of(state.W(j) & d.vertices) <= state.slack_of(j)]
        h_new = Counter()
        for h in range(1, state.k + 1):
            if h not in touched:
                h_new += state.edges_of(h)
        h_new += d.edges
        for j in keep_j:
            h_new += state.edges_of(j)
        branch = "merge"
    new_state = InitState(ctx, h_new)
    if not significantly_better(state, new_state.phi):
        raise CertificationError(
            f"potential gain {new_state.phi - state.phi} does not exceed min ell^p ({branch})")
    return new_state, branch


@dataclass
class Restart:
    state: InitState
    reason: str
    branch: str
    circuit: Circuit


@dataclass
class CertifiedCover:
    f: Counter
    circuits: list[tuple[Circuit, int]]
    parts: dict[int, Counter]
    discarded: int = 0


def step2(state: InitState, h: Counter, cover: Union[SubtourCover, Counter]) -> Union[Restart, CertifiedCover]:
    """Circuit checks on the subtour cover: restart or certified F_i parts."""
    ctx = state.ctx
    g, inst, cfg = ctx.g, ctx.inst, ctx.cfg
    f = cover.f if isinstance(cover, SubtourCover) else cover
    circuits = decompose_into_circuits(g, f)
    comp_of = {}
    for idx, (verts, _) in enumerate(connected_components(g, h, ctx.outside)):
        for v in verts:
            comp_of[v] = idx
    kept = []
    for c in circuits:
        verts = c.vertices(g)
        if all(v in comp_of for v in verts) and len({comp_of[v] for v in verts}) == 1:
            continue
        kept.append((c, index(state, verts)))

    def checkable(c, i):
        return i > 0 and all(inst.is_local(e) for e in c.edges)

    for c, i in kept:
        if checkable(c, i) and check_exploring_circuit(state, c):
            d = circuit_to_D(state, c)
            if not check_large_and_light(state, d):
                raise CertificationError("exploring circuit lifted to D is not large and light")
            new_state, branch = improved_initialization(state, d)
            return Restart(new_state, "exploring-circuit", branch, c)
    for c, i in kept:
        if checkable(c, i):
            d = Subgraph(_circuit_vertices(state, c), c.multiset())
            if check_large_and_light(state, d):
                new_state, branch = improved_initialization(state, d)
                return Restart(new_state, "large-and-light", branch, c)

    parts: dict[int, Counter] = {}
    f_kept = Counter()
    for c, i in kept:
        f_kept += c.multiset()
        parts.setdefault(i, Counter()).update(c.multiset())
        if i > 0:
            verts = _circuit_vertices(state, c)
            lhs = slack(state, verts, c.multiset())
            rhs = state.slack_of(i) + cfg.epsilon * ctx.ell_of(verts)
            if lhs > rhs:
                raise CertificationError(f"circuit of index {i} has slack {lhs} > {rhs}")
    for i, part in parts.items():
        if i > 0:
            bound = cfg.f_coefficient * ctx.ell_of(state.W(i))
            if g.cost(part) > bound:
                raise CertificationError(f"c(F_{i}) = {g.cost(part)} exceeds {bound}")
    return CertifiedCover(f_kept, kept, parts, len(circuits) - len(kept))


@dataclass
class RunState:
    h: Counter
    x_ledger: list = field(default_factory=list)   # (iteration, circuit, cost, payer)
    f_ledger: list = field(default_factory=list)   # (iteration, index, cost)
    iteration: int = 0
    payers: set = field(default_factory=set)
    f_indices: set = field(default_factory=set)


def step3(state: InitState, run: RunState, certified: CertifiedCover) -> dict:
    """Extend H by (F + X)[V(Z)]; returns a trace record for the iteration."""
    ctx = state.ctx
    g, inst, b = ctx.g, ctx.inst, ctx.b
    run.iteration += 1
    before = component_count(g, b.edges + run.h)
    x = Counter()
    pending = []
    while True:
        comps = connected_components(g, b.edges + run.h + certified.f + x)
        z_verts = max((verts for verts, _ in comps), key=lambda vs: index(state, vs))
        j = index(state, z_verts)
        if j == 0:
            break
        threshold = ctx.cfg.step3_factor * state.slack_of(j)
        found = min_cost_crossing_circuit(g, inst.is_local, z_verts)
        if found is None or found[1] > threshold:
            break
        circuit, cost = found
        x += circuit.multiset()
        pending.append((circuit, cost, j))
    added = Counter({e: k for e, k in (certified.f + x).items()
                     if g.tails[e] in z_verts and g.heads[e] in z_verts})
    run.h += added
    x_added = []
    for circuit, cost, payer in pending:
        if set(circuit.vertices(g)) <= z_verts:
            if payer in run.payers:
                raise CertificationError(f"budget of W~_{payer} paid twice")
            run.payers.add(payer)
            run.x_ledger.append((run.iteration, circuit, cost, payer))
            x_added.append({"cost": str(cost), "payer": payer})
    f_costs = {}
    for i, part in sorted(certified.parts.items()):
        if part and all(g.tails[e] in z_verts and g.heads[e] in z_verts for e in part):
            if i > 0 and i in run.f_indices:
                raise CertificationError(f"F_{i} nonempty in two iterations")
            if i > 0:
                run.f_indices.add(i)
            cost = g.cost(part)
            run.f_ledger.append((run.iteration, i, cost))
            f_costs[i] = str(cost)
    after = component_count(g, b.edges + run.h)
    if after >= before:
        raise CertificationError(f"component count did not drop ({before} -> {after})")
    if not is_eulerian(g, b.edges + run.h):
        raise CertificationError("E(B) + H lost the Eulerian property")
    return {
        "iteration": run.iteration,
        "z_index": index(state, z_verts),
        "x_additions": x_added,
        "f_costs": f_costs,
        "components_before": before,
        "components_after": after,
    }


@dataclass
class RunReport:
    tour: Counter
    cost: Fraction
    lp: Fraction
    restarts: int
    restart_bound: Fraction
    phi_history: list
    x_ledger: list
    f_ledger: list
    h_tilde_cost: Fraction
    budget_total: Fraction
    bound: Fraction
    checks: dict
    trace: list
    component_budgets: dict = field(default_factory=dict)   # i -> ell(W~_i) of the final H~

    @property
    def ratio(self) -> Optional[Fraction]:
        return self.cost / self.lp if self.lp else None

    @property
    def certified(self) -> bool:
        return all(self.checks.values())


def _is_tour(g, edges: Counter) -> bool:
    return is_eulerian(g, edges) and component_count(g, edges) == 1


def _zero_budget_run(ctx: Context, trace: list) -> Counter:
    """All off-backbone y vanish, so local edges are free: link with free circuits."""
    g, inst, b = ctx.g, ctx.inst, ctx.b
    h = Counter()
    while component_count(g, b.edges + h) > 1:
        comps = connected_components(g, b.edges + h)
        z = next(verts for verts, _ in comps if not verts & b.vertices)
        found = min_cost_crossing_circuit(g, inst.is_local, z)
        if found is not None and found[1] == 0:
            h += found[0].multiset()
            trace.append({"zero_budget": "free circuit", "cost": "0"})
            continue
        cover = compute_subtour_cover(inst, b, Counter({e: k for e, k in h.items()
                                                         if g.tails[e] not in b.vertices
                                                         and g.heads[e] not in b.vertices}))
        h += cover.f
        trace.append({"zero_budget": "subtour cover", "cost": str(g.cost(cover.f))})
    return h


def run(inst: StronglyLaminarInstance, b: Optional[Backbone] = None, cfg: Optional[Config] = None):
    """Compute H with E(B) + H a tour; returns ``(H, RunReport)``."""
    b = b or Backbone()
    cfg = cfg or Config()
    ctx = Context(inst, b, cfg)
    g = ctx.g
    n = g.n
    trace: list = []
    restart_bound = ((cfg.gamma + cfg.epsilon) * n * n / cfg.epsilon) ** cfg.p
    y_total = sum((2 * inst.y_v(v) for v in ctx.outside), Fraction(0))
    zero_budget = inst.mode == GENERAL and ctx.outside and y_total == 0
    problems = [] if zero_budget else ctx.check_budgets()
    if problems:
        raise CertificationError("budget invariants fail: " + ", ".join(problems))

    if zero_budget:
        h = _zero_budget_run(ctx, trace)
        cost = g.cost(h)
        checks = {"tour": _is_tour(g, b.edges + h), "headline_bound": cost <= 2 * inst.lp_value}
        report = RunReport(h, cost, inst.lp_value, 0, restart_bound, [], [], [], Fraction(0),
                           Fraction(0), 2 * inst.lp_value, checks, trace)
        _enforce(report)
        return h, report

    h_tilde = Counter()
    restarts = 0
    phi_history = []
    while True:
        state = InitState(ctx, h_tilde)
        phi_history.append(state.phi)
        runstate = RunState(Counter(state.h_tilde))
        restarted = None
        while component_count(g, b.edges + runstate.h) > 1:
            cover = compute_subtour_cover(inst, b, runstate.h)
            outcome = step2(state, runstate.h, cover)
            record = {"restart_epoch": restarts, "phi": str(state.phi),
                      "cover_cost": str(g.cost(cover.f)), "cover_method": cover.method}
            if isinstance(outcome, Restart):
                gap = outcome.state.phi - state.phi
                if not gap > ctx.min_ell_p:
                    raise CertificationError("restart without sufficient potential gain", trace)
                record.update({"restart": True, "reason": outcome.reason, "branch": outcome.branch,
                               "phi_new": str(outcome.state.phi)})
                trace.append(record)
                restarted = outcome
                break
            try:
                step_record = step3(state, runstate, outcome)
            except CertificationError as exc:
                exc.trace = trace
                raise
            record.update({"restart": False, "discarded_circuits": outcome.discarded})
            record.update(step_record)
            trace.append(record)
        if restarted is None:
            break
        restarts += 1
        if restarts > restart_bound:
            raise CertificationError("restart count exceeds the potential bound", trace)
        h_tilde = restarted.state.h_tilde

    h = runstate.h
    cost = g.cost(h)
    budget_total = ctx.ell_of(ctx.outside)
    h_tilde_cost = g.cost(state.h_tilde)
    x_total = sum((c for _, _, c, _ in runstate.x_ledger), Fraction(0))
    f_pos = [(t, i, c) for t, i, c in runstate.f_ledger if i > 0]
    f_zero = sum((c for _, i, c in runstate.f_ledger if i == 0), Fraction(0))
    f_total = sum((c for _, _, c in f_pos), Fraction(0))
    coef = cfg.f_coefficient
    x_cap = cfg.step3_factor * (budget_total - h_tilde_cost)
    bound = h_tilde_cost + x_cap + coef * budget_total
    checks = {
        "tour": _is_tour(g, b.edges + h),
        "initialization_light": all(s >= 0 for s in state.slacks),
        "x_edges_paid_from_budgets": x_total <= x_cap,
        "f_index_at_most_once": len({i for _, i, _ in f_pos}) == len(f_pos),
        "f_parts_bounded": all(c <= coef * ctx.ell_of(state.W(i)) for _, i, c in f_pos),
        "f_total_bounded": f_total <= coef * budget_total,
        "phi_monotone": all(b2 - a > ctx.min_ell_p for a, b2 in zip(phi_history, phi_history[1:])),
        "restarts_bounded": restarts <= restart_bound,
    }
    if inst.mode == GENERAL:
        checks["f_zero_bounded"] = f_zero <= cost_cap(inst, b)
        bound += cost_cap(inst, b)
        if not cfg.relaxed_step3_threshold:
            checks["headline_bound"] = cost <= 2 * inst.lp_value + (cfg.alpha + 1) * y_total
    elif not cfg.relaxed_step3_threshold:
        if inst.mode == GRAPH_TSP:
            checks["ell_equals_gamma_lp"] = budget_total == cfg.gamma * inst.lp_value
            checks["headline_bound"] = cost <= cfg.graph_tsp_ratio * inst.lp_value
    checks["cost_bound"] = cost <= bound
    report = RunReport(h, cost, inst.lp_value, restarts, restart_bound, phi_history,
                       runstate.x_ledger, runstate.f_ledger, h_tilde_cost, budget_total,
                       bound, checks, trace,
                       {i: ctx.ell_of(state.W(i)) for i in range(1, state.k + 1)})
    _enforce(report)
    return h, report


def _enforce(report: RunReport) -> None:
    failed = [name for name, ok in report.checks.items() if not ok]
    if failed:
        raise CertificationError("certification failed: " + ", ".join(failed), report.trace)
