"""Directed multigraphs with exact rational costs and multiset edge operations.

Edge multisets are plain ``collections.Counter`` objects mapping edge ids to
multiplicities.  Every routine here treats its inputs as read-only values.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional


class ContractError(RuntimeError):
    """An operation was called on input violating its precondition."""


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions and "p/q" strings to Fraction (floats refused)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact or boolean value {value!r}")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


class MultiDigraph:
    """Vertices ``0..n-1`` and an indexed list of directed edges.

    Parallel edges and self-loops are allowed.  Edge ``e`` runs from
    ``tails[e]`` to ``heads[e]`` and costs ``costs[e]``.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int, object]]):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        self.n = n
        tails, heads, costs = [], [], []
        for k, (u, v, c) in enumerate(edges):
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {k} = ({u}, {v}) has an endpoint outside 0..{n - 1}")
            c = as_fraction(c)
            if c < 0:
                raise ValueError(f"edge {k} has negative cost {c}")
            tails.append(u)
            heads.append(v)
            costs.append(c)
        self.tails: tuple[int, ...] = tuple(tails)
        self.heads: tuple[int, ...] = tuple(heads)
        self.costs: tuple[Fraction, ...] = tuple(costs)
        out_edges: list[list[int]] = [[] for _ in range(n)]
        in_edges: list[list[int]] = [[] for _ in range(n)]
        for e, (u, v) in enumerate(zip(self.tails, self.heads)):
            out_edges[u].append(e)
            in_edges[v].append(e)
        self.out_edges = tuple(tuple(a) for a in out_edges)
        self.in_edges = tuple(tuple(a) for a in in_edges)

    @property
    def m(self) -> int:
        return len(self.tails)

    def edges(self) -> list[tuple[int, int, Fraction]]:
        return list(zip(self.tails, self.heads, self.costs))

    def endpoints(self, e: int) -> tuple[int, int]:
        return self.tails[e], self.heads[e]

    def cost(self, s: Counter) -> Fraction:
        """Multiplicity-weighted cost of an edge multiset."""
        return sum((self.costs[e] * k for e, k in s.items()), Fraction(0))

    def crosses(self, e: int, vset) -> bool:
        """True iff edge ``e`` has exactly one endpoint in ``vset``."""
        return (self.tails[e] in vset) != (self.heads[e] in vset)

    def __eq__(self, other):
        if not isinstance(other, MultiDigraph):
            return NotImplemented
        return self.n == other.n and self.edges() == other.edges()

    def __repr__(self):
        return f"MultiDigraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Circuit:
    """A simple directed cycle given as a cyclically ordered edge-id tuple."""

    edges: tuple[int, ...]

    def vertices(self, g: MultiDigraph) -> list[int]:
        return [g.tails[e] for e in self.edges]

    def cost(self, g: MultiDigraph) -> Fraction:
        return sum((g.costs[e] for e in self.edges), Fraction(0))

    def multiset(self) -> Counter:
        return Counter(self.edges)

    def is_valid(self, g: MultiDigraph) -> bool:
        k = len(self.edges)
        if k == 0:
            return False
        for j in range(k):
            if g.heads[self.edges[j]] != g.tails[self.edges[(j + 1) % k]]:
                return False
        verts = self.vertices(g)
        return len(set(verts)) == len(verts)


def _check_ids(g: MultiDigraph, s: Counter) -> None:
    for e, k in s.items():
        if not (isinstance(e, int) and 0 <= e < g.m):
            raise ValueError(f"invalid edge id {e!r}")
        if k < 0:
            raise ValueError(f"negative multiplicity {k} for edge {e}")


def degree_imbalance(g: MultiDigraph, s: Counter) -> dict[int, int]:
    """Map vertex -> (out-degree - in-degree) for vertices where nonzero."""
    _check_ids(g, s)
    bal = Counter()
    for e, k in s.items():
        if k:
            bal[g.tails[e]] += k
            bal[g.heads[e]] -= k
    return {v: d for v, d in bal.items() if d}


def is_eulerian(g: MultiDigraph, s: Counter) -> bool:
    """In-degree equals out-degree at every vertex, counting multiplicity."""
    return not degree_imbalance(g, s)


class _DisjointSets:
    def __init__(self, items):
        self.parent = {v: v for v in items}

    def find(self, v):
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def connected_components(
    g: MultiDigraph, s: Counter, restrict: Optional[Iterable[int]] = None
) -> list[tuple[frozenset, Counter]]:
    """Weak components of ``(restrict, s)``, each with its induced edge multiset.

    Edges with an endpoint outside ``restrict`` are ignored.  Components are
    ordered by their smallest vertex.
    """
    verts = range(g.n) if restrict is None else sorted(set(restrict))
    inside = set(verts)
    dsu = _DisjointSets(verts)
    for e, k in s.items():
        if k and g.tails[e] in inside and g.heads[e] in inside:
            dsu.union(g.tails[e], g.heads[e])
    groups: dict[int, list[int]] = {}
    for v in verts:
        groups.setdefault(dsu.find(v), []).append(v)
    comp_of = {}
    result = []
    for idx, members in enumerate(sorted(groups.values(), key=lambda a: a[0])):
        for v in members:
            comp_of[v] = idx
        result.append((frozenset(members), Counter()))
    for e, k in s.items():
        if k and g.tails[e] in inside and g.heads[e] in inside:
            result[comp_of[g.tails[e]]][1][e] += k
    return result


def component_count(g: MultiDigraph, s: Counter) -> int:
    return len(connected_components(g, s))


def decompose_into_circuits(g: MultiDigraph, s: Counter) -> list[Circuit]:
    """Split an Eulerian multiset into simple circuits.

    Repeatedly start at the lowest-id remaining edge, keep following the
    lowest-id remaining out-edge until a vertex repeats, and peel off the
    closed part.  The incidence vectors of the result sum to ``s``.
    """
    if not is_eulerian(g, s):
        raise ContractError("circuit decomposition needs an Eulerian multiset")
    rest = Counter({e: k for e, k in s.items() if k > 0})
    circuits = []
    while rest:
        first = min(rest)
        walk = [first]
        pos = {g.tails[first]: 0}
        v = g.heads[first]
        while v not in pos:
            pos[v] = len(walk)
            nxt = min(e for e in g.out_edges[v] if rest.get(e, 0) > 0)
            walk.append(nxt)
            v = g.heads[nxt]
        cycle = tuple(walk[pos[v]:])
        for e in cycle:
            rest[e] -= 1
            if rest[e] == 0:
                del rest[e]
        circuits.append(Circuit(cycle))
    return circuits


def strongly_connected(g: MultiDigraph, restrict: Optional[Iterable[int]] = None) -> bool:
    """Whether the (induced) digraph is strongly connected."""
    verts = set(range(g.n)) if restrict is None else set(restrict)
    if not verts:
        raise ValueError("strong connectivity of an empty vertex set is undefined")
    root = min(verts)

    def reach(adj, ends):
        seen = {root}
        stack = [root]
        while stack:
            u = stack.pop()
            for e in adj[u]:
                w = ends[e]
                if w in verts and w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    return len(reach(g.out_edges, g.heads)) == len(verts) == len(reach(g.in_edges, g.tails))


def shortest_paths(
    g: MultiDigraph, source: int, allowed: Callable[[int], bool]
) -> tuple[dict[int, Fraction], dict[int, int]]:
    """Dijkstra over allowed edges; returns distances and predecessor edges."""
    dist = {source: Fraction(0)}
    pred: dict[int, int] = {}
    done = set()
    heap = [(Fraction(0), source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for e in g.out_edges[u]:
            if not allowed(e):
                continue
            w = g.heads[e]
            nd = d + g.costs[e]
            if w not in dist or nd < dist[w]:
                dist[w] = nd
                pred[w] = e
                heapq.heappush(heap, (nd, w))
    return dist, pred


def min_cost_crossing_circuit(
    g: MultiDigraph, allowed: Callable[[int], bool], cut_set: Iterable[int]
) -> Optional[tuple[Circuit, Fraction]]:
    """Cheapest simple circuit of allowed edges with an edge in ``delta(cut_set)``.

    Any crossing circuit contains a crossing edge ``e``, and then costs at
    least ``c(e) + dist(head(e), tail(e))``; that bound is attained by ``e``
    followed by a shortest path back, which is simple for nonnegative costs.
    """
    cut = set(cut_set)
    crossing = [e for e in range(g.m) if allowed(e) and g.crosses(e, cut)]
    if not crossing:
        return None
    by_head: dict[int, list[int]] = {}
    for e in crossing:
        by_head.setdefault(g.heads[e], []).append(e)
    best = None
    for v in sorted(by_head):
        dist, pred = shortest_paths(g, v, allowed)
        for e in by_head[v]:
            u = g.tails[e]
            if u not in dist:
                continue
            total = g.costs[e] + dist[u]
            if best is None or total < best[0]:
                best = (total, e, pred, u, v)
    if best is None:
        return None
    total, e, pred, u, v = best
    path = []
    w = u
    while w != v:
        path.append(pred[w])
        w = g.tails[pred[w]]
    circuit = Circuit((e,) + tuple(reversed(path)))
    assert circuit.is_valid(g) and circuit.cost(g) == total
    return circuit, total


def enumerate_simple_circuits(g: MultiDigraph, allowed: Callable[[int], bool] = lambda e: True):
    """Yield every simple circuit once (rooted at its smallest vertex).

    Exponential; intended for small-instance checks only.
    """
    for root in range(g.n):
        stack = [(root, [], {root})]
        while stack:
            u, path, seen = stack.pop()
            for e in g.out_edges[u]:
                if not allowed(e):
                    continue
                w = g.heads[e]
                if w == root:
                    yield Circuit(tuple(path + [e]))
                elif w > root and w not in seen:
                    stack.append((w, path + [e], seen | {w}))
