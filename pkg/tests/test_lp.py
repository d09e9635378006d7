import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from builders import complete_graph, cycle_graph, random_strong_digraph
from svensson_atsp.harness import exact_opt, generate_unit_instance
from svensson_atsp.lp import (
    LpSolution,
    certify_feasible,
    cut_value,
    separate_cut,
    solve_atsp_lp,
    solve_atsp_lp_exhaustive,
)
from svensson_atsp.multigraph import ContractError, MultiDigraph
from svensson_atsp.simplex import InfeasibleLP, UnboundedLP, solve_exact_lp


def float_cut_lp(g):
    """Every cut written out, solved in floating point by HiGHS."""
    rows = []
    for r in range(1, g.n):
        for u in itertools.combinations(range(g.n), r):
            s = set(u)
            rows.append([-1.0 if g.crosses(e, s) else 0.0 for e in range(g.m)])
    bal = np.zeros((g.n, g.m))
    for e, (u, v, _) in enumerate(g.edges()):
        bal[u, e] += 1
        bal[v, e] -= 1
    res = linprog([float(c) for c in g.costs], A_ub=rows, b_ub=[-2.0] * len(rows),
                  A_eq=bal, b_eq=np.zeros(g.n), method="highs")
    assert res.status == 0
    return res.fun


def test_three_cycle():
    sol = solve_atsp_lp(cycle_graph(3))
    assert sol.value == 3
    assert sol.x == [1, 1, 1]


def test_two_cycle():
    assert solve_atsp_lp(MultiDigraph(2, [(0, 1, 1), (1, 0, 1)])).value == 2


def test_complete_four():
    g = complete_graph(4)
    sol = solve_atsp_lp(g)
    assert sol.value == 4
    # independent lower bound: unit costs make c.x the sum of in-flows, each >= 1
    assert all(sol.in_flow(g, v) >= 1 for v in range(4))
    assert solve_atsp_lp_exhaustive(g).value == 4
    assert abs(float_cut_lp(g) - 4) < 1e-6


def test_single_vertex_and_errors():
    assert solve_atsp_lp(MultiDigraph(1, [])).value == 0
    with pytest.raises(ValueError):
        solve_atsp_lp(MultiDigraph(2, [(0, 1, 1)]))


def test_fractional_optimum_is_exact():
    # two triangles joined by cheap-ish links; the optimum is not a tour
    g = MultiDigraph(4, [(0, 1, 1), (1, 0, 1), (2, 3, 1), (3, 2, 1), (0, 2, 3), (2, 0, 3),
                         (1, 3, "1/3"), (3, 1, 7)])
    sol = solve_atsp_lp(g)
    assert all(isinstance(v, Fraction) for v in sol.x)
    assert sol.value == solve_atsp_lp_exhaustive(g).value
    assert certify_feasible(g, sol).feasible


def test_separation_examples():
    g = complete_graph(4)
    table = {(u, v): e for e, (u, v, _) in enumerate(g.edges())}
    tour = [Fraction(0)] * g.m
    for a, b in [(0, 1), (1, 2), (2, 3), (3, 0)]:
        tour[table[a, b]] = Fraction(1)
    assert separate_cut(g, tour) is None

    split = [Fraction(0)] * g.m
    for a, b in [(0, 1), (1, 0), (2, 3), (3, 2)]:
        split[table[a, b]] = Fraction(1)
    u = separate_cut(g, split)
    assert u in ({0, 1}, {2, 3})
    assert cut_value(g, split, u) == 0


def _all_cuts(n):
    for r in range(1, n):
        for u in itertools.combinations(range(n), r):
            yield set(u)


def test_separation_finds_three_halves():
    # two disjoint 3-cycles; links of 3/4 each way give x(delta(U)) = 3/2
    g = MultiDigraph(6, [(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 1), (4, 5, 1), (5, 3, 1),
                         (0, 3, 1), (3, 0, 1)])
    x = [Fraction(1)] * 6 + [Fraction(3, 4)] * 2
    u = separate_cut(g, x)
    assert u is not None
    assert cut_value(g, x, u) == Fraction(3, 2)
    assert min(cut_value(g, x, s) for s in _all_cuts(6)) == Fraction(3, 2)


def test_separation_rejects_unbalanced():
    g = cycle_graph(3)
    with pytest.raises(ContractError):
        separate_cut(g, [Fraction(1), Fraction(0), Fraction(0)])


def test_certify_examples():
    g = complete_graph(4)
    zero = certify_feasible(g, [Fraction(0)] * g.m)
    assert not zero.feasible and zero.min_cut_value == 0
    rep = certify_feasible(cycle_graph(5), [1] * 5)
    assert rep.feasible and rep.value == 5
    assert certify_feasible(g, solve_atsp_lp(g)).feasible
    neg = certify_feasible(cycle_graph(3), [Fraction(-1)] * 3)
    assert not neg.nonnegative


def test_exact_simplex_small():
    # min x + y  s.t. x + 2y >= 2, 3x + y >= 3
    x, val = solve_exact_lp([1, 1], a_ge=[[1, 2], [3, 1]], b_ge=[2, 3])
    assert val == Fraction(7, 5) and x == [Fraction(4, 5), Fraction(3, 5)]
    with pytest.raises(InfeasibleLP):
        solve_exact_lp([1], a_eq=[[1]], b_eq=[-1])
    with pytest.raises(UnboundedLP):
        solve_exact_lp([-1], a_ge=[[1]], b_ge=[0])


@pytest.mark.parametrize("seed", range(40))
def test_matches_exhaustive_oracles(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 6)
    g = random_strong_digraph(n, rng, 0.4)
    sol = solve_atsp_lp(g)
    assert certify_feasible(g, sol).feasible
    assert sol.value == solve_atsp_lp_exhaustive(g).value
    assert abs(float(sol.value) - float_cut_lp(g)) < 1e-6


@pytest.mark.parametrize("seed", range(15))
def test_permuted_edge_ids_same_value(seed):
    rng = random.Random(seed)
    g = random_strong_digraph(rng.randint(4, 9), rng, 0.35)
    edges = g.edges()
    rng.shuffle(edges)
    assert solve_atsp_lp(MultiDigraph(g.n, edges)).value == solve_atsp_lp(g).value


@pytest.mark.parametrize("seed", range(25))
def test_lp_below_opt(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 12)
    g = random_strong_digraph(n, rng, 0.3)
    assert solve_atsp_lp(g).value <= exact_opt(g)
    u = generate_unit_instance(n if n > 1 else 2, Fraction(1, 5), seed)
    assert solve_atsp_lp(u).value <= exact_opt(u)


def test_solution_type_flows():
    g = cycle_graph(3)
    sol = LpSolution([Fraction(1)] * 3, Fraction(3))
    assert sol.in_flow(g, 0) == sol.out_flow(g, 0) == 1
