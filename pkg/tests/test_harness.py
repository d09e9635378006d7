import random
from fractions import Fraction

import pytest

from builders import complete_graph, cycle_graph, random_strong_digraph
from svensson_atsp.harness import (
    BenchConfig,
    bench,
    bench_row,
    exact_opt,
    generate_sparse_unit_instance,
    generate_unit_instance,
    metric_closure,
    rows_to_csv,
)
from svensson_atsp.multigraph import MultiDigraph, strongly_connected


def brute_tour(g, max_len):
    """Cheapest closed walk from vertex 0 visiting every vertex, by enumeration."""
    best = None
    stack = [(0, frozenset([0]), Fraction(0), 0)]
    while stack:
        v, seen, cost, length = stack.pop()
        if length and v == 0 and len(seen) == g.n:
            best = cost if best is None or cost < best else best
        if length == max_len:
            continue
        for e in g.out_edges[v]:
            w = g.heads[e]
            stack.append((w, seen | {w}, cost + g.costs[e], length + 1))
    return best


def test_generator_shape():
    g = generate_unit_instance(6, Fraction(0), 3)
    assert g.m == 6 and strongly_connected(g)
    dense = generate_unit_instance(6, Fraction(1), 3)
    assert dense.m == 30
    assert generate_unit_instance(8, "3/10", 5) == generate_unit_instance(8, Fraction(3, 10), 5)
    with pytest.raises(ValueError):
        generate_unit_instance(1, Fraction(1, 2), 0)


@pytest.mark.parametrize("seed", range(20))
def test_sparse_generator_strong(seed):
    assert strongly_connected(generate_sparse_unit_instance(2 + seed, seed))


def test_path_graph_opt():
    g = MultiDigraph(3, [(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1)])
    assert exact_opt(g) == 4 == brute_tour(g, 6)


def test_opt_examples():
    assert exact_opt(cycle_graph(5)) == 5
    assert exact_opt(complete_graph(4)) == 4
    assert exact_opt(MultiDigraph(1, [])) == 0
    with pytest.raises(ValueError):
        exact_opt(MultiDigraph(2, [(0, 1, 1)]))
    with pytest.raises(ValueError):
        exact_opt(complete_graph(16))


@pytest.mark.parametrize("seed", range(25))
def test_opt_matches_enumeration(seed):
    rng = random.Random(seed)
    g = random_strong_digraph(rng.randint(2, 5), rng, 0.3)
    assert exact_opt(g) == brute_tour(g, 2 * g.n)


def test_metric_closure_unreachable():
    d = metric_closure(MultiDigraph(2, [(0, 1, "1/2")]))
    assert d[0][1] == 1 and d[1][0] is None


def test_bench_row_fields():
    row = bench_row(7, 2, BenchConfig())
    assert row.ok and row.opt is not None
    assert row.lp <= row.opt <= row.alg_cost
    assert row.ratio_alg_lp == row.alg_cost / row.lp
    assert bench_row(14, 2, BenchConfig(opt_max_n=12)).opt is None


def test_bench_deterministic_csv():
    bc = BenchConfig(5, 8, 3)
    a = rows_to_csv(bench(bc))
    b = rows_to_csv(bench(bc))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "n,seed,lp,alg_cost,opt,ratio_alg_lp,restarts,certified"
    assert len(lines) == 1 + 4 * 3
    assert "runtime_ms" in rows_to_csv(bench(BenchConfig(5, 5, 1)), timing=True)


def test_bench_parallel_matches_serial():
    serial = rows_to_csv(bench(BenchConfig(5, 9, 2)))
    parallel = rows_to_csv(bench(BenchConfig(5, 9, 2, jobs=2)))
    assert serial == parallel


def test_three_vertex_examples():
    g = generate_unit_instance(3, Fraction(0), 9)
    assert g.m == 3 and exact_opt(g) == 3
    row = bench_row(3, 9, BenchConfig(prob=Fraction(0)))
    assert row.ratio_alg_lp == 1 and row.ok


def test_default_sweep_sixty_rows():
    rows = bench(BenchConfig(5, 10, 10))
    assert len(rows) == 60
    assert all(r.ok and r.ratio_alg_lp >= 1 for r in rows)
    assert [(r.n, r.seed) for r in rows] == sorted((r.n, r.seed) for r in rows)
