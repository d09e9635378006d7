"""Instance generation, the exact optimum oracle and batch experiments."""

from __future__ import annotations

import csv
import io
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import DEFAULT_EPSILON, DEFAULT_GAMMA, CertificationError, Config, run
from .instance import from_unit_graph
from .multigraph import MultiDigraph, strongly_connected

OPT_MAX_N = 15


def generate_unit_instance(n: int, extra_edge_prob, seed: int) -> MultiDigraph:
    """Random Hamiltonian cycle plus every other ordered pair with the given probability."""
    if n < 2:
        raise ValueError("need at least two vertices")
    prob = float(Fraction(extra_edge_prob))
    if not 0 <= prob <= 1:
        raise ValueError("probability must lie in [0, 1]")
    rng = random.Random(seed)
    perm = list(range(n))
    rng.shuffle(perm)
    edges = [(perm[i], perm[(i + 1) % n]) for i in range(n)]
    present = set(edges)
    for u in range(n):
        for v in range(n):
            if u != v and (u, v) not in present and rng.random() < prob:
                edges.append((u, v))
    return MultiDigraph(n, [(u, v, 1) for u, v in edges])


def generate_sparse_unit_instance(n: int, seed: int, extra_edge_prob: float = 0.0) -> MultiDigraph:
    """Strongly connected unit digraph grown from random ears; usually not Hamiltonian."""
    if n < 2:
        raise ValueError("need at least two vertices")
    rng = random.Random(seed)
    order = list(range(n))
    rng.shuffle(order)
    pairs = set()
    for i in range(1, n):
        v = order[i]
        pairs.add((order[rng.randrange(i)], v))
        pairs.add((v, order[rng.randrange(i)]))
    for u in range(n):
        for v in range(n):
            if u != v and rng.random() < extra_edge_prob:
                pairs.add((u, v))
    return MultiDigraph(n, [(u, v, 1) for u, v in sorted(pairs)])


def _integer_scale(g: MultiDigraph) -> int:
    return math.lcm(*(c.denominator for c in g.costs)) if g.m else 1


def metric_closure(g: MultiDigraph) -> list[list[Optional[int]]]:
    """All-pairs shortest path lengths (scaled to integers), None if unreachable."""
    scale = _integer_scale(g)
    n = g.n
    d: list[list[Optional[int]]] = [[None] * n for _ in range(n)]
    for v in range(n):
        d[v][v] = 0
    for u, v, c in g.edges():
        w = int(c * scale)
        if u != v and (d[u][v] is None or w < d[u][v]):
            d[u][v] = w
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik is None:
                continue
            di = d[i]
            for j in range(n):
                if dk[j] is not None and (di[j] is None or dik + dk[j] < di[j]):
                    di[j] = dik + dk[j]
    return d


def exact_opt(g: MultiDigraph) -> Fraction:
    """Minimum tour cost: cheapest closed walk through all vertices (subset DP)."""
    n = g.n
    if n > OPT_MAX_N:
        raise ValueError(f"exact optimum limited to n <= {OPT_MAX_N}")
    if n == 0 or not strongly_connected(g):
        raise ValueError("graph must be nonempty and strongly connected")
    if n == 1:
        return Fraction(0)
    d = metric_closure(g)
    scale = _integer_scale(g)
    full = (1 << n) - 1
    inf = float("inf")
    dp = [[inf] * n for _ in range(1 << n)]
    dp[1][0] = 0
    for mask in range(1, 1 << n, 2):
        row = dp[mask]
        for v in range(n):
            cur = row[v]
            if cur == inf:
                continue
            dv = d[v]
            for w in range(1, n):
                if not mask >> w & 1:
                    nm = mask | 1 << w
                    val = cur + dv[w]
                    if val < dp[nm][w]:
                        dp[nm][w] = val
    best = min(dp[full][v] + d[v][0] for v in range(1, n))
    return Fraction(best, scale)


@dataclass
class ExperimentRow:
    n: int
    seed: int
    lp: Fraction
    alg_cost: Fraction
    opt: Optional[Fraction]
    ratio_alg_lp: Fraction
    restarts: int
    runtime_ms: int
    certified: bool = True
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.certified and not self.problems


@dataclass(frozen=True)
class BenchConfig:
    n_min: int = 5
    n_max: int = 10
    seeds: int = 10
    prob: Fraction = Fraction(3, 10)
    gamma: Fraction = DEFAULT_GAMMA
    epsilon: Fraction = DEFAULT_EPSILON
    relaxed_step3: bool = False
    opt_max_n: int = 12
    jobs: int = 1


def bench_row(n: int, seed: int, bc: BenchConfig) -> ExperimentRow:
    start = time.perf_counter()
    g = generate_unit_instance(n, bc.prob, seed)
    inst = from_unit_graph(g)
    cfg = Config(bc.gamma, bc.epsilon, bc.relaxed_step3)
    problems = []
    try:
        h, report = run(inst, cfg=cfg)
        cost, restarts, certified = report.cost, report.restarts, report.certified
    except CertificationError as exc:
        cost, restarts, certified = Fraction(0), 0, False
        problems.append(str(exc))
    opt = exact_opt(g) if n <= min(bc.opt_max_n, OPT_MAX_N) else None
    lp = inst.lp_value
    if certified:
        if opt is not None and not (lp <= opt <= cost):
            problems.append(f"sandwich fails: lp={lp} opt={opt} alg={cost}")
        if cost < lp:
            problems.append("algorithm beat the LP bound")
        if not bc.relaxed_step3 and cost > cfg.graph_tsp_ratio * lp:
            problems.append("guarantee violated")
    ratio = cost / lp if lp else Fraction(0)
    elapsed = int((time.perf_counter() - start) * 1000)
    return ExperimentRow(n, seed, lp, cost, opt, ratio, restarts, elapsed, certified, problems)


def _row_task(args):
    return bench_row(*args)


def bench(bc: BenchConfig) -> list[ExperimentRow]:
    """One row per (n, seed), ordered by (n, seed) whatever the completion order."""
    tasks = [(n, seed, bc) for n in range(bc.n_min, bc.n_max + 1) for seed in range(1, bc.seeds + 1)]
    if bc.jobs > 1:
        with ProcessPoolExecutor(bc.jobs) as pool:
            rows = list(pool.map(_row_task, tasks))
    else:
        rows = [_row_task(t) for t in tasks]
    rows.sort(key=lambda r: (r.n, r.seed))
    return rows


CSV_COLUMNS = ["n", "seed", "lp", "alg_cost", "opt", "ratio_alg_lp", "restarts", "certified"]


def rows_to_csv(rows: list[ExperimentRow], timing: bool = False) -> str:
    out = io.StringIO()
    cols = CSV_COLUMNS + (["runtime_ms"] if timing else [])
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        vals = [r.n, r.seed, r.lp, r.alg_cost, "" if r.opt is None else r.opt,
                r.ratio_alg_lp, r.restarts, int(r.ok)]
        if timing:
            vals.append(r.runtime_ms)
        writer.writerow([str(v) for v in vals])
    return out.getvalue()


def generate_laminar_instance(n: int, seed: int, extra_edge_prob: float = 0.2):
    """Random general-mode instance with its backbone.

    The laminar sets are nested segments of a planted Hamiltonian tour, which
    serves as ``x`` (so every set is crossed exactly twice).  Reverse edges
    inside each segment keep ``G[L]`` strongly connected, costs follow from
    the weights, and the backbone is a cycle through one vertex of every
    atom of the family, so every region can reach it by local edges.
    """
    from .instance import GENERAL, Backbone, LaminarFamily, StronglyLaminarInstance
    from .lp import LpSolution

    if n < 3:
        raise ValueError("need at least three vertices")
    rng = random.Random(seed)
    tour = list(range(n))
    rng.shuffle(tour)
    segments = []

    def split(lo, hi, depth):
        if hi - lo < 2 or depth > 2:
            return
        a = rng.randrange(lo, hi - 1)
        b = rng.randrange(a + 2, hi + 1)
        if b - a < n:
            segments.append((a, b))
        split(a, b - 1, depth + 1) if rng.random() < 0.5 else None

    for _ in range(rng.randint(1, 2)):
        split(0, n, 0)
    big = []
    for a, b in segments:
        s = frozenset(tour[a:b])
        if 2 <= len(s) < n and s not in big and all(not (s & t) or s <= t or t <= s for t in big):
            big.append(s)
    sets = [frozenset([v]) for v in range(n)] + big
    weights = [Fraction(rng.choice([0, 1, 1, 2]), 2) for _ in range(n)]
    weights += [Fraction(rng.choice([0, 1, 2]), 2) for _ in big]

    pairs = [(tour[i], tour[(i + 1) % n]) for i in range(n)]
    for s in big:
        members = [v for v in tour if v in s]
        for u, v in zip(members, members[1:]):
            pairs.append((v, u))
    atoms: dict[tuple, list[int]] = {}
    for v in range(n):
        atoms.setdefault(tuple(v in s for s in big), []).append(v)
    reps = [rng.choice(sorted(vs)) for _, vs in sorted(atoms.items())]
    cyc = [(reps[i], reps[(i + 1) % len(reps)]) for i in range(len(reps))] if len(reps) > 1 else []
    for vs in atoms.values():
        ring = [v for v in tour if v in vs]
        if len(ring) > 1:
            pairs += [(ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))]
    existing = set(pairs)
    for u in range(n):
        for v in range(n):
            if u != v and (u, v) not in existing and rng.random() < extra_edge_prob:
                pairs.append((u, v))
                existing.add((u, v))
    first_backbone = len(pairs)
    pairs += cyc

    def cost(u, v):
        return sum((w for s, w in zip(sets, weights) if (u in s) != (v in s)), Fraction(0))

    g = MultiDigraph(n, [(u, v, cost(u, v)) for u, v in pairs])
    x = [Fraction(1)] * n + [Fraction(0)] * (len(pairs) - n)
    lp = LpSolution(x, sum(g.costs[:n], Fraction(0)))
    inst = StronglyLaminarInstance(g, LaminarFamily(tuple(sets), tuple(weights)), lp, GENERAL)
    from collections import Counter
    backbone = Backbone(frozenset(reps), Counter(range(first_backbone, len(pairs))))
    return inst, backbone
