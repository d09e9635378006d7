import json
import random
from collections import Counter
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from builders import complete_graph, cycle_graph
from svensson_atsp.harness import generate_laminar_instance, generate_unit_instance
from svensson_atsp.instance import (
    GENERAL,
    GRAPH_TSP,
    HALF,
    Backbone,
    LaminarFamily,
    ParseError,
    StronglyLaminarInstance,
    ValidationError,
    format_edge_list,
    from_unit_graph,
    instance_from_dict,
    instance_to_dict,
    laminar_violation,
    laminar_violation_pairwise,
    load,
    parse_edge_list,
    store,
    validate,
)
from svensson_atsp.lp import LpSolution
from svensson_atsp.multigraph import MultiDigraph

DATA = Path(__file__).resolve().parent.parent / "data"


def general(n, pairs, sets, ys, x):
    """General-mode instance with costs derived from the weights."""
    def cost(u, v):
        return sum((w for s, w in zip(sets, ys) if (u in s) != (v in s)), Fraction(0))
    g = MultiDigraph(n, [(u, v, cost(u, v)) for u, v in pairs])
    x = [Fraction(v) for v in x]
    value = sum((c * v for c, v in zip(g.costs, x)), Fraction(0))
    fam = LaminarFamily(tuple(frozenset(s) for s in sets), tuple(Fraction(w) for w in ys))
    return StronglyLaminarInstance(g, fam, LpSolution(x, value), GENERAL)


def test_unit_cycle_instance():
    inst = from_unit_graph(cycle_graph(3))
    assert inst.mode == GRAPH_TSP
    assert inst.family.sets == tuple(frozenset([v]) for v in range(3))
    assert inst.family.y == (HALF,) * 3
    assert inst.lp_value == 3
    assert validate(inst).ok


def test_unit_two_cycle():
    inst = from_unit_graph(MultiDigraph(2, [(0, 1, 1), (1, 0, 1)]))
    assert inst.lp_value == 2 and inst.y_v(0) == inst.y_v(1) == HALF


def test_unit_graph_errors():
    with pytest.raises(ValueError):
        from_unit_graph(MultiDigraph(2, [(0, 1, 2), (1, 0, 1)]))
    with pytest.raises(ValueError):
        from_unit_graph(MultiDigraph(2, [(0, 1, 1)]))


@pytest.mark.parametrize("seed", range(100))
def test_validate_random_unit(seed):
    n = 2 + seed % 15
    inst = from_unit_graph(generate_unit_instance(n, Fraction(3, 10), seed))
    assert validate(inst).ok
    for e, (u, v, c) in enumerate(inst.g.edges()):
        assert inst.is_local(e)
        assert c == inst.y_v(u) + inst.y_v(v) == 1


def test_cost_decomposition_failure():
    g = MultiDigraph(2, [(0, 1, 1), (1, 0, 1)])
    fam = LaminarFamily((frozenset([0]), frozenset([1])), (Fraction(1), HALF))
    inst = StronglyLaminarInstance(g, fam, LpSolution([Fraction(1)] * 2, Fraction(2)), GENERAL)
    rep = validate(inst)
    assert not rep["cost-decomposition"].ok
    assert "edge 0" in rep["cost-decomposition"].witness


def test_tight_set_failure():
    pairs = [(0, 1), (1, 2), (2, 0), (2, 1), (1, 0)]
    sets = [{0}, {1}, {2}, {0, 1}]
    x = [1, Fraction(5, 4), 1, Fraction(1, 4), 0]
    inst = general(3, pairs, sets, [HALF, HALF, HALF, 1], x)
    rep = validate(inst, Backbone(frozenset({0}), Counter()))
    assert not rep["tight-sets"].ok
    assert "5/2" in rep["tight-sets"].witness


def test_locality_general():
    pairs = [(0, 1), (1, 0), (0, 2), (2, 0)]
    inst = general(3, pairs, [{0}, {1}, {2}, {0, 1}], [HALF, HALF, HALF, 1], [0, 0, 1, 1])
    assert inst.is_local(0) and inst.is_local(1)
    assert not inst.is_local(2) and not inst.is_local(3)
    # a local edge costs y_v + y_w
    assert inst.g.costs[0] == inst.y_v(0) + inst.y_v(1)


def test_backbone_checks():
    inst, b = generate_laminar_instance(8, 3)
    assert validate(inst, b).ok
    rep = validate(inst, Backbone())
    if inst.family.non_singletons():
        assert not rep["backbone-meets-sets"].ok
    broken = Backbone(b.vertices | {v for v in range(8)}, Counter({0: 1}))
    assert not validate(inst, broken)["backbone-connected-eulerian"].ok


def test_graph_tsp_shape_enforced():
    inst = from_unit_graph(complete_graph(3))
    fam = LaminarFamily(inst.family.sets, (Fraction(1),) * 3)
    bad = StronglyLaminarInstance(inst.g, fam, inst.x, GRAPH_TSP)
    assert not validate(bad)["graph-tsp-shape"].ok


@pytest.mark.parametrize("name", ["general_small.json", "unit_12.json", "sparse_15.json", "sparse_9.dimacs"])
def test_bundled_round_trip(name, tmp_path):
    inst, b = load(DATA / name)
    out = tmp_path / "copy.json"
    store(out, inst, b)
    again, b2 = load(out)
    assert instance_to_dict(again, b2) == instance_to_dict(inst, b)
    if name.endswith(".json"):
        original = json.loads((DATA / name).read_text())
        assert json.loads(out.read_text())["edges"] == original["edges"]


def test_rational_strings_exact():
    doc = {"n": 2, "mode": GENERAL, "edges": [[0, 1, "1/3"], [1, 0, "1/3"]],
           "laminar": [{"verts": [0], "y": "1/6"}, {"verts": [1], "y": "1/6"}],
           "x": ["1", "1"], "backbone": {"verts": [], "edge_ids": []}}
    inst, _ = instance_from_dict(doc)
    assert inst.g.costs[0] == Fraction(1, 3)
    assert isinstance(inst.g.costs[0], Fraction)
    assert validate(inst).ok


def test_missing_x_general():
    doc = {"n": 2, "mode": GENERAL, "edges": [[0, 1, "1"], [1, 0, "1"]],
           "laminar": [{"verts": [0], "y": "1/2"}, {"verts": [1], "y": "1/2"}]}
    with pytest.raises(ValidationError):
        instance_from_dict(doc)


def test_missing_x_graph_tsp_solves_lp():
    inst, b = instance_from_dict({"n": 3, "edges": [[0, 1, "1"], [1, 2, "1"], [2, 0, "1"]]})
    assert inst.lp_value == 3 and b.empty


@pytest.mark.parametrize("doc, fragment", [
    ({"edges": []}, "'n'"),
    ({"n": 2, "edges": [[0, 1]]}, "edges[0]"),
    ({"n": 2, "edges": [[0, 1, 0.5]]}, "edges[0][2]"),
    ({"n": 2, "edges": [[0, 1, "1"]], "mode": "other"}, "mode"),
    ({"n": 2, "edges": [[0, 1, "1"], [1, 0, "1"]], "x": ["1"]}, "x"),
])
def test_parse_errors(doc, fragment):
    with pytest.raises(ParseError) as info:
        instance_from_dict(doc)
    assert fragment in str(info.value)


def test_load_reports_json_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"n": 2,\n "edges": [}')
    with pytest.raises(ParseError, match="line 2"):
        load(p)


def test_load_rejects_invalid(tmp_path):
    inst, b = generate_laminar_instance(6, 1)
    doc = instance_to_dict(inst, b)
    doc["edges"][0][2] = "99"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(ValidationError):
        load(p)
    load(p, check=False)


def test_edge_list_format():
    g = parse_edge_list("c comment\np atsp 3 3\na 1 2\na 2 3\na 3 1\n")
    assert g.n == 3 and g.edges() == [(0, 1, 1), (1, 2, 1), (2, 0, 1)]
    assert parse_edge_list(format_edge_list(g)) == g
    with pytest.raises(ParseError, match="line 2"):
        parse_edge_list("p atsp 2 1\na 1 5\n")
    with pytest.raises(ParseError):
        parse_edge_list("a 1 2\n")


def test_laminar_examples():
    sets = [frozenset({0, 1, 2}), frozenset({0, 1}), frozenset({3})]
    assert laminar_violation(sets) is None
    crossing = sets + [frozenset({1, 3})]
    assert laminar_violation(crossing) is not None


def _random_family(rng, n, count):
    sets = []
    for _ in range(count):
        a = rng.randrange(n)
        b = rng.randrange(a, n)
        sets.append(frozenset(range(a, b + 1)) if rng.random() < 0.7
                    else frozenset(rng.sample(range(n), rng.randint(1, n))))
    return sets


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 9), st.integers(1, 8), st.integers(0, 10**6))
def test_laminarity_matches_pairwise(n, count, seed):
    sets = _random_family(random.Random(seed), n, count)
    fast = laminar_violation(sets)
    slow = laminar_violation_pairwise(sets)
    assert (fast is None) == (slow is None)
    if fast is not None:
        a, b = sets[fast[0]], sets[fast[1]]
        assert a & b and not (a <= b or b <= a)


@pytest.mark.parametrize("seed", range(40))
def test_random_general_instances_validate(seed):
    inst, b = generate_laminar_instance(3 + seed % 10, seed)
    assert validate(inst, b).ok
