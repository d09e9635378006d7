"""Small graph and state constructors shared by the test modules."""

import random
from collections import Counter
from fractions import Fraction

from svensson_atsp.core import Config, Context, InitState
from svensson_atsp.harness import generate_laminar_instance, generate_sparse_unit_instance, generate_unit_instance
from svensson_atsp.instance import Backbone, from_unit_graph
from svensson_atsp.multigraph import MultiDigraph, component_count

_complete_cache = {}


def cycle_graph(n, cost=1):
    return MultiDigraph(n, [(i, (i + 1) % n, cost) for i in range(n)])


def complete_graph(n, cost=1):
    return MultiDigraph(n, [(u, v, cost) for u in range(n) for v in range(n) if u != v])


def edge_lookup(g):
    table = {}
    for e, (u, v, _) in enumerate(g.edges()):
        table.setdefault((u, v), e)
    return table


def walk(g, vertices, closed=True):
    """Edge multiset following the vertex sequence (closing it by default)."""
    table = edge_lookup(g)
    seq = list(vertices) + ([vertices[0]] if closed else [])
    return Counter(table[(a, b)] for a, b in zip(seq, seq[1:]))


def complete_instance(n):
    if n not in _complete_cache:
        _complete_cache[n] = from_unit_graph(complete_graph(n))
    return _complete_cache[n]


def make_state(inst, h_tilde, cfg=None):
    ctx = Context(inst, Backbone(), cfg or Config())
    return InitState(ctx, h_tilde)


def random_eulerian(g, rng, cycles, allowed=lambda e: True, start=None):
    """Union of random simple cycles found by random walks over allowed edges."""
    total = Counter()
    starts = list(range(g.n)) if start is None else list(start)
    if not starts:
        return total
    for _ in range(cycles):
        v = rng.choice(starts)
        path, seen = [], {v: 0}
        while True:
            outs = [e for e in g.out_edges[v] if allowed(e)]
            if not outs:
                break
            e = rng.choice(outs)
            path.append(e)
            v = g.heads[e]
            if v in seen:
                total.update(path[seen[v]:])
                break
            seen[v] = len(path)
    return total


def random_digraph(n, rng, prob, max_cost=3):
    edges = [(u, v, Fraction(rng.randint(0, max_cost * 2), 2))
             for u in range(n) for v in range(n) if u != v and rng.random() < prob]
    return MultiDigraph(n, edges)


def random_strong_digraph(n, rng, prob, max_cost=3):
    perm = list(range(n))
    rng.shuffle(perm)
    edges = [(perm[i], perm[(i + 1) % n], Fraction(rng.randint(1, max_cost * 2), 2)) for i in range(n)]
    edges += random_digraph(n, rng, prob, max_cost).edges()
    return MultiDigraph(n, edges)



def random_initialization_like(inst, b, rng, cycles):
    """Random local Eulerian multiset on the vertices off the backbone."""
    outside = [v for v in range(inst.g.n) if v not in b.vertices]
    inside = set(outside)
    g = inst.g

    def ok(e):
        return inst.is_local(e) and g.tails[e] in inside and g.heads[e] in inside
    return random_eulerian(g, rng, cycles, ok, outside)


def random_cover_pair(seed):
    """(instance, backbone, H) with H local, Eulerian, off the backbone and not yet a tour."""
    rng = random.Random(seed)
    kind = seed % 3
    n = rng.randint(3, 13)
    if kind == 0:
        inst, b = from_unit_graph(generate_unit_instance(n, Fraction(rng.choice([1, 3]), 10), seed)), Backbone()
    elif kind == 1:
        inst, b = from_unit_graph(generate_sparse_unit_instance(n, seed, 0.05)), Backbone()
    else:
        inst, b = generate_laminar_instance(n, seed)
    while True:
        h = random_initialization_like(inst, b, rng, rng.randint(0, 4))
        if component_count(inst.g, b.edges + h) > 1:
            return inst, b, h



def _group_sizes(rng, n, doubled_only):
    sizes = []
    left = n
    while left:
        if not doubled_only:
            size = rng.randint(1, 5)
        elif left in (2, 3):
            size = left
        elif left == 4:
            size = 2
        else:
            size = rng.randint(2, 3)
        size = min(size, left)
        sizes.append(size)
        left -= size
    return sizes


def planted_pair(seed):
    """Initialization on a complete unit digraph plus a planted cheap subgraph D.

    Even seeds build components that are short cycles traversed twice (slack
    below every budget); odd seeds mix singletons, simple cycles and doubled
    cycles.  D is a circuit through part of one component W~_i and many
    vertices of components sorted after it, optionally lifted by adding
    H~[W~_i].  Returns ``(state, d)``; D need not be large and light.
    """
    from svensson_atsp.core import Subgraph, circuit_to_D
    from svensson_atsp.multigraph import Circuit

    rng = random.Random(seed)
    n = rng.randint(8, 16)
    inst = complete_instance(n)
    g = inst.g
    table = edge_lookup(g)
    verts = list(range(n))
    rng.shuffle(verts)
    doubled_only = seed % 2 == 0
    h = Counter()
    pos = 0
    for size in _group_sizes(rng, n, doubled_only):
        group = verts[pos:pos + size]
        pos += size
        if size > 1:
            cyc = walk(g, group)
            h += cyc + cyc if doubled_only or rng.random() < 0.3 else cyc
    state = make_state(inst, h)
    eligible = [i for i in range(1, state.k + 1)
                if doubled_only or state.slack_of(i) >= state.ctx.min_ell]
    if not eligible:
        return state, None
    i = rng.choice(eligible)
    w = sorted(state.W(i))
    later = [v for j in range(i + 1, state.k + 1) for v in state.W(j)]
    route = rng.sample(w, rng.randint(1, len(w)))
    if later:
        route += rng.sample(later, rng.randint(1, len(later)))
    if len(route) < 2:
        return state, None
    rng.shuffle(route)
    closed = route + route[:1]
    c = Circuit(tuple(table[a, b] for a, b in zip(closed, closed[1:])))
    if rng.random() < 0.5:
        return state, circuit_to_D(state, c)
    return state, Subgraph(frozenset(route), c.multiset())
