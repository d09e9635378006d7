"""Subtour covers: construction and verification.

A subtour cover for an Eulerian ``H`` inside ``V \\ V(B)`` is an Eulerian
multiset ``F`` that crosses the boundary of every component of
``(V \\ V(B), H)`` and whose backbone-touching components use local edges
only.  Besides that, the covers produced here respect

    c(F) <= 2 LP + sum_{v outside B} 2 y_v          (general mode)
    |F cap delta-(v)| <= 2 x(delta-(v))             (y_v > 0, component off B)
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .instance import GENERAL, Backbone, Check, StronglyLaminarInstance
from .multigraph import connected_components, is_eulerian, min_cost_crossing_circuit


class CoverError(RuntimeError):
    pass


@dataclass
class SubtourCover:
    f: Counter
    per_component_hits: dict[int, int] = field(default_factory=dict)
    method: str = "greedy"


@dataclass
class CoverReport:
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def __getitem__(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def outside_components(inst: StronglyLaminarInstance, b: Backbone, h: Counter):
    """Components of ``(V \\ V(B), H)`` ordered by smallest vertex."""
    outside = [v for v in range(inst.g.n) if v not in b.vertices]
    return connected_components(inst.g, h, outside)


def cost_cap(inst: StronglyLaminarInstance, b: Backbone) -> Fraction:
    ys = sum((2 * inst.y_v(v) for v in range(inst.g.n) if v not in b.vertices), Fraction(0))
    return 2 * inst.lp_value + ys


def verify_subtour_cover(inst: StronglyLaminarInstance, b: Backbone, h: Counter, f: Counter) -> CoverReport:
    g = inst.g
    checks = []

    def add(name, witness):
        checks.append(Check(name, witness is None, "" if witness is None else str(witness)))

    bad = next((e for e, k in f.items() if not (0 <= e < g.m) or k < 0), None)
    add("edge-ids", None if bad is None else f"invalid entry {bad}")
    if bad is not None:
        return CoverReport(checks)
    add("eulerian", None if is_eulerian(g, f) else "in-degree differs from out-degree")

    miss = None
    for idx, (w, _) in enumerate(outside_components(inst, b, h)):
        if not any(k and g.crosses(e, w) for e, k in f.items()):
            miss = f"component {idx} {sorted(w)} is not crossed"
            break
    add("coverage", miss)

    comps = connected_components(g, f)
    wit = None
    for verts, edges in comps:
        if verts & b.vertices:
            nl = next((e for e in edges if not inst.is_local(e)), None)
            if nl is not None:
                wit = f"edge {nl} is non-local in a component touching the backbone"
                break
    add("backbone-local", wit)

    if inst.mode == GENERAL:
        c = g.cost(f)
        cap = cost_cap(inst, b)
        add("cost-bound", None if c <= cap else f"c(F) = {c} > {cap}")

    wit = None
    for verts, _ in comps:
        if verts & b.vertices:
            continue
        for v in sorted(verts):
            if inst.y_v(v) > 0:
                indeg = sum(f.get(e, 0) for e in g.in_edges[v])
                if indeg > 2 * inst.in_flow(v):
                    wit = f"vertex {v}: {indeg} incoming F-edges > 2 x(delta-(v)) = {2 * inst.in_flow(v)}"
                    break
        if wit:
            break
    add("in-degree", wit)
    return CoverReport(checks)


def _hits(inst, b, h, f) -> dict[int, int]:
    hits = {}
    for idx, (w, _) in enumerate(outside_components(inst, b, h)):
        e = next((e for e in sorted(f) if f[e] and inst.g.crosses(e, w)), None)
        if e is not None:
            hits[idx] = e
    return hits


def greedy_cover(inst: StronglyLaminarInstance, b: Backbone, h: Counter) -> Optional[Counter]:
    """Union of cheapest local circuits in the support of x, one per uncovered component.

    Components are handled largest first.  Each circuit spends one unit of the
    in-degree allowance floor(2 x(delta-(v))) of every vertex it visits.
    """
    g = inst.g
    allowance = {v: math.floor(2 * inst.in_flow(v)) for v in range(g.n)}
    comps = sorted(outside_components(inst, b, h), key=lambda c: (-len(c[0]), min(c[0])))
    f: Counter = Counter()
    for w, _ in comps:
        if any(g.crosses(e, w) for e in f):
            continue

        def allowed(e):
            return (inst.x.x[e] > 0 and inst.is_local(e)
                    and allowance[g.tails[e]] > 0 and allowance[g.heads[e]] > 0)

        found = min_cost_crossing_circuit(g, allowed, w)
        if found is None:
            return None
        circuit, _ = found
        for e in circuit.edges:
            f[e] += 1
            allowance[g.heads[e]] -= 1
    return f


def exact_cover(inst: StronglyLaminarInstance, b: Backbone, h: Counter, local_only: bool = False) -> Optional[Counter]:
    """Minimum-cost cover by integer programming (branch and bound in HiGHS).

    Multiplicities are capped at ceil(2 x_e) + 1.  The in-degree bound is
    imposed on every vertex off the backbone with y_v > 0, which is at least
    as strict as required.  Backbone locality is not linear; it is checked
    on the result, and ``local_only`` forbids non-local edges outright.
    """
    g = inst.g
    m = g.m
    if m == 0:
        return None
    cost = np.array([float(c) for c in g.costs])
    upper = np.array([math.ceil(2 * inst.x.x[e]) + 1 for e in range(m)], dtype=float)
    if local_only:
        upper = np.array([u if inst.is_local(e) else 0.0 for e, u in enumerate(upper)])
    rows, lo, hi = [], [], []
    for v in range(g.n):
        row = np.zeros(m)
        for e in g.out_edges[v]:
            row[e] += 1
        for e in g.in_edges[v]:
            row[e] -= 1
        rows.append(row)
        lo.append(0.0)
        hi.append(0.0)
    for w, _ in outside_components(inst, b, h):
        row = np.array([1.0 if g.crosses(e, w) else 0.0 for e in range(m)])
        rows.append(row)
        lo.append(1.0)
        hi.append(np.inf)
    for v in range(g.n):
        if v in b.vertices or inst.y_v(v) <= 0:
            continue
        row = np.zeros(m)
        for e in g.in_edges[v]:
            row[e] = 1.0
        rows.append(row)
        lo.append(-np.inf)
        hi.append(float(math.floor(2 * inst.in_flow(v))))
    if inst.mode == GENERAL:
        rows.append(cost)
        lo.append(-np.inf)
        hi.append(float(cost_cap(inst, b)) + 1e-9)
    res = milp(cost, constraints=LinearConstraint(np.array(rows), lo, hi),
               integrality=np.ones(m), bounds=Bounds(np.zeros(m), upper))
    if res.x is None:
        return None
    f = Counter({e: int(round(v)) for e, v in enumerate(res.x) if round(v) > 0})
    return f


def compute_subtour_cover(inst: StronglyLaminarInstance, b: Backbone, h: Counter) -> SubtourCover:
    """Greedy cover, falling back to the exact search; always verified."""
    if any(len(w) == inst.g.n for w, _ in outside_components(inst, b, h)):
        raise ValueError("H already spans every vertex; there is nothing to cover")
    attempts = []
    f = greedy_cover(inst, b, h)
    if f is not None:
        report = verify_subtour_cover(inst, b, h, f)
        if report.ok:
            return SubtourCover(f, _hits(inst, b, h, f), "greedy")
        attempts.append(("greedy", report.failures))
    else:
        attempts.append(("greedy", "no admissible circuit"))
    for local_only in (True, False):
        f = exact_cover(inst, b, h, local_only)
        if f is None:
            attempts.append((f"exact(local_only={local_only})", "infeasible"))
            continue
        report = verify_subtour_cover(inst, b, h, f)
        if report.ok:
            return SubtourCover(f, _hits(inst, b, h, f), "exact")
        attempts.append((f"exact(local_only={local_only})", report.failures))
    raise CoverError(f"no valid subtour cover found: {attempts}")
