"""Exact solution of the cut LP relaxation of ATSP by cutting planes.

    min  sum_e c(e) x_e
    s.t. x(delta(U)) >= 2          for all nonempty proper U
         x(delta+(v)) = x(delta-(v)) for all v
         x >= 0

Restricted LPs are solved in floating point with HiGHS.  The float primal and
dual solutions are then rounded to nearby rationals and accepted only if they
form an exact certificate: primal feasible for the full LP (exact separation),
dual feasible, and equal objective values.  When rounding fails the restricted
LP is re-solved with the exact tableau simplex.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .multigraph import ContractError, MultiDigraph, strongly_connected
from .simplex import solve_exact_lp

log = logging.getLogger(__name__)

FLOAT_TOL = 1e-7


@dataclass
class LpSolution:
    x: list[Fraction]
    value: Fraction

    def in_flow(self, g: MultiDigraph, v: int) -> Fraction:
        return sum((self.x[e] for e in g.in_edges[v]), Fraction(0))

    def out_flow(self, g: MultiDigraph, v: int) -> Fraction:
        return sum((self.x[e] for e in g.out_edges[v]), Fraction(0))


def cut_value(g: MultiDigraph, x: Sequence, vset) -> object:
    """x(delta(U)), counting both directions."""
    vset = set(vset)
    return sum((x[e] for e in range(g.m) if g.crosses(e, vset)), type(x[0])(0) if len(x) else 0)


def _max_flow_min_cut(n: int, arcs: list[tuple[int, int, object]], s: int, t: int, eps):
    """Edmonds-Karp; returns (flow value, source side of a minimum cut)."""
    head, cap, adj = [], [], [[] for _ in range(n)]
    for u, v, c in arcs:
        adj[u].append(len(head))
        head.append(v)
        cap.append(c)
        adj[v].append(len(head))
        head.append(u)
        cap.append(c * 0)
    total = cap[0] * 0 if cap else 0
    while True:
        pred = [-1] * n
        pred[s] = -2
        q = deque([s])
        while q and pred[t] == -1:
            u = q.popleft()
            for a in adj[u]:
                w = head[a]
                if pred[w] == -1 and cap[a] > eps:
                    pred[w] = a
                    q.append(w)
        if pred[t] == -1:
            side = {v for v in range(n) if pred[v] != -1}
            return total, side
        push = None
        w = t
        while w != s:
            a = pred[w]
            push = cap[a] if push is None or cap[a] < push else push
            w = head[a ^ 1]
        w = t
        while w != s:
            a = pred[w]
            cap[a] -= push
            cap[a ^ 1] += push
            w = head[a ^ 1]
        total += push


def min_cut(g: MultiDigraph, x: Sequence, eps=0) -> tuple[object, frozenset]:
    """Global minimum of x(delta(U)) over nonempty proper U (U contains vertex 0).

    x(delta(U)) is the undirected cut with capacity x_e per edge, so n-1
    max-flow computations from vertex 0 suffice.
    """
    if g.n < 2:
        raise ValueError("cuts need at least two vertices")
    arcs = []
    for e in range(g.m):
        u, v = g.tails[e], g.heads[e]
        if u != v and x[e] > eps:
            arcs.append((u, v, x[e]))
            arcs.append((v, u, x[e]))
    best = None
    for t in range(1, g.n):
        val, side = _max_flow_min_cut(g.n, arcs, 0, t, eps)
        if best is None or val < best[0]:
            best = (val, frozenset(side))
    return best


def _is_balanced(g: MultiDigraph, x: Sequence, eps=0) -> bool:
    for v in range(g.n):
        bal = sum(x[e] for e in g.out_edges[v]) - sum(x[e] for e in g.in_edges[v])
        if abs(bal) > eps:
            return False
    return True


def separate_cut(g: MultiDigraph, x: Sequence, eps=0) -> Optional[frozenset]:
    """Return a most violated cut U (x(delta(U)) < 2), or None.

    Works exactly on Fractions (``eps=0``) or on floats with a tolerance.
    """
    if not _is_balanced(g, x, eps):
        raise ContractError("separation assumes flow-balanced x")
    val, side = min_cut(g, x, eps)
    if val < 2 - 2 * eps:
        return side
    return None


def _incidence(g: MultiDigraph, vset) -> list[int]:
    return [1 if g.crosses(e, vset) else 0 for e in range(g.m)]


def _balance_rows(g: MultiDigraph) -> list[list[int]]:
    rows = []
    for v in range(g.n):
        row = [0] * g.m
        for e in g.out_edges[v]:
            row[e] += 1
        for e in g.in_edges[v]:
            row[e] -= 1
        rows.append(row)
    return rows


def _highs_restricted(g, cuts, balance):
    c = np.array([float(v) for v in g.costs])
    a_ub = -np.array([_incidence(g, u) for u in cuts], dtype=float)
    b_ub = -2.0 * np.ones(len(cuts))
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=np.array(balance, dtype=float),
                  b_eq=np.zeros(g.n), bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed on restricted LP: {res.message}")
    return res


def _round_certificate(g, cuts, res) -> Optional[list[Fraction]]:
    """Try to read an exact optimal primal/dual pair off the float solution."""
    inc = [_incidence(g, u) for u in cuts]
    for den in (12, 720, 10**5, 10**8):
        x = [Fraction(float(v)).limit_denominator(den) for v in res.x]
        mu = [Fraction(float(v)).limit_denominator(den) for v in res.eqlin.marginals]
        pi = [max(Fraction(0), -Fraction(float(v)).limit_denominator(den)) for v in res.ineqlin.marginals]
        if any(v < 0 for v in x) or not _is_balanced(g, x):
            continue
        if any(sum(x[e] for e in range(g.m) if row[e]) < 2 for row in inc):
            continue
        ok = True
        for e in range(g.m):
            red = g.costs[e] - mu[g.tails[e]] + mu[g.heads[e]]
            red -= sum((p for p, row in zip(pi, inc) if row[e]), Fraction(0))
            if red < 0:
                ok = False
                break
        if not ok:
            continue
        primal = sum((c * v for c, v in zip(g.costs, x)), Fraction(0))
        if primal == 2 * sum(pi, Fraction(0)):
            return x
    return None


def solve_atsp_lp(g: MultiDigraph, max_rounds: int = 10_000) -> LpSolution:
    """Optimal (exact rational) solution of the cut LP on a strongly connected digraph."""
    if g.n == 0 or not strongly_connected(g):
        raise ValueError("the ATSP LP needs a nonempty strongly connected digraph")
    if g.n == 1:
        return LpSolution([Fraction(0)] * g.m, Fraction(0))
    balance = _balance_rows(g)
    cuts: list[frozenset] = [frozenset([v]) for v in range(g.n)]
    seen = set(cuts)
    for _ in range(max_rounds):
        res = _highs_restricted(g, cuts, balance)
        xf = [max(0.0, float(v)) for v in res.x]
        u = separate_cut(g, xf, eps=FLOAT_TOL)
        if u is not None and u not in seen:
            cuts.append(u)
            seen.add(u)
            continue
        x = _round_certificate(g, cuts, res)
        if x is None:
            log.info("rounding failed; exact simplex on %d cuts", len(cuts))
            x, _ = solve_exact_lp(
                list(g.costs), balance, [0] * g.n, [_incidence(g, c) for c in cuts], [2] * len(cuts)
            )
        u = separate_cut(g, x)
        if u is None:
            value = sum((c * v for c, v in zip(g.costs, x)), Fraction(0))
            return LpSolution(list(x), value)
        if u in seen:
            raise RuntimeError("cutting-plane loop re-generated an existing cut")
        cuts.append(u)
        seen.add(u)
    raise RuntimeError("cutting-plane loop did not converge")


def solve_atsp_lp_exhaustive(g: MultiDigraph) -> LpSolution:
    """Reference solver: every cut written out, exact simplex.  Tiny n only."""
    if g.n > 9:
        raise ValueError("exhaustive cut LP limited to n <= 9")
    if g.n == 1:
        return LpSolution([Fraction(0)] * g.m, Fraction(0))
    cuts = []
    for mask in range(1, 2 ** g.n - 1):
        if mask & 1:
            cuts.append({v for v in range(g.n) if mask >> v & 1})
    x, value = solve_exact_lp(
        list(g.costs), _balance_rows(g), [0] * g.n, [_incidence(g, c) for c in cuts], [2] * len(cuts)
    )
    return LpSolution(x, value)


@dataclass
class FeasibilityReport:
    nonnegative: bool
    balanced: bool
    min_cut_value: Fraction
    min_cut_set: frozenset
    value: Fraction
    violations: list[str] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.violations


def certify_feasible(g: MultiDigraph, x) -> FeasibilityReport:
    """Check nonnegativity, balance and every cut constraint of the LP exactly."""
    xs = list(x.x if isinstance(x, LpSolution) else x)
    if len(xs) != g.m:
        raise ValueError("x must have one entry per edge")
    xs = [Fraction(v) for v in xs]
    violations = []
    nonneg = all(v >= 0 for v in xs)
    if not nonneg:
        bad = [e for e, v in enumerate(xs) if v < 0]
        violations.append(f"negative x on edges {bad}")
    balanced = _is_balanced(g, xs)
    if not balanced:
        bad = [v for v in range(g.n)
               if sum(xs[e] for e in g.out_edges[v]) != sum(xs[e] for e in g.in_edges[v])]
        violations.append(f"flow imbalance at vertices {bad}")
    if g.n >= 2:
        val, side = min_cut(g, xs)
        if val < 2:
            violations.append(f"cut {sorted(side)} has x(delta(U)) = {val} < 2")
    else:
        val, side = Fraction(0), frozenset()
    value = sum((c * v for c, v in zip(g.costs, xs)), Fraction(0))
    return FeasibilityReport(nonneg, balanced, Fraction(val), side, value, violations)
