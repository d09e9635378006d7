"""Strongly laminar ATSP instances, backbones, validation and file I/O."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .lp import LpSolution, certify_feasible, cut_value, solve_atsp_lp
from .multigraph import (
    MultiDigraph,
    as_fraction,
    connected_components,
    is_eulerian,
    strongly_connected,
)

GRAPH_TSP = "graph-tsp"
GENERAL = "general"
HALF = Fraction(1, 2)


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(f"{c.name}: {c.witness}" for c in report.failures))


@dataclass(frozen=True)
class LaminarFamily:
    sets: tuple[frozenset, ...]
    y: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.sets) != len(self.y):
            raise ValueError("one weight per laminar set")

    def non_singletons(self) -> list[int]:
        return [i for i, s in enumerate(self.sets) if len(s) >= 2]


def laminar_violation(sets) -> Optional[tuple[int, int]]:
    """Return indices of two crossing sets, or None if the family is laminar.

    Sets are scanned largest first while tracking, for every vertex, the
    smallest set seen so far containing it; a new set is compatible iff all
    its vertices share the same tracker.
    """
    order = sorted(range(len(sets)), key=lambda i: (-len(sets[i]), i))
    owner: dict[int, int] = {}
    for i in order:
        owners = {owner.get(v) for v in sets[i]}
        if len(owners) > 1:
            members = sorted(o for o in owners if o is not None)
            other = next(o for o in members if not sets[i] <= sets[o])
            return (other, i) if other < i else (i, other)
        for v in sets[i]:
            owner[v] = i
    return None


def laminar_violation_pairwise(sets) -> Optional[tuple[int, int]]:
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            a, b = sets[i], sets[j]
            if a & b and not (a <= b or b <= a):
                return i, j
    return None


@dataclass(frozen=True)
class Backbone:
    vertices: frozenset = frozenset()
    edges: Counter = field(default_factory=Counter)

    @property
    def empty(self) -> bool:
        return not self.vertices


class StronglyLaminarInstance:
    """Graph, laminar family with weights, LP solution and mode."""

    def __init__(self, g: MultiDigraph, family: LaminarFamily, x: LpSolution, mode: str):
        if mode not in (GRAPH_TSP, GENERAL):
            raise ValueError(f"unknown mode {mode!r}")
        if len(x.x) != g.m:
            raise ValueError("x must carry one value per edge")
        self.g = g
        self.family = family
        self.x = x
        self.mode = mode
        yv = [Fraction(0)] * g.n
        for s, w in zip(family.sets, family.y):
            if len(s) == 1:
                (v,) = s
                yv[v] = w
        self._yv = tuple(yv)
        big = [family.sets[i] for i in family.non_singletons()]
        self._local = tuple(not any(g.crosses(e, s) for s in big) for e in range(g.m))

    @property
    def lp_value(self) -> Fraction:
        return self.x.value

    def y_v(self, v: int) -> Fraction:
        return self._yv[v]

    def is_local(self, e: int) -> bool:
        """True iff edge ``e`` crosses no laminar set of size >= 2."""
        return self._local[e]

    def in_flow(self, v: int) -> Fraction:
        return self.x.in_flow(self.g, v)


def from_unit_graph(g: MultiDigraph) -> StronglyLaminarInstance:
    """Asymmetric Graph TSP: singleton family, y = 1/2, LP solved exactly."""
    if any(c != 1 for c in g.costs):
        raise ValueError("graph-TSP instances need unit costs")
    if g.n == 0 or not strongly_connected(g):
        raise ValueError("graph must be strongly connected")
    family = LaminarFamily(tuple(frozenset([v]) for v in range(g.n)), tuple([HALF] * g.n))
    return StronglyLaminarInstance(g, family, solve_atsp_lp(g), GRAPH_TSP)


@dataclass
class Check:
    name: str
    ok: bool
    witness: str = ""


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def __getitem__(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def validate(inst: StronglyLaminarInstance, b: Optional[Backbone] = None) -> ValidationReport:
    b = b or Backbone()
    g, fam = inst.g, inst.family
    checks = []

    def add(name, witness):
        checks.append(Check(name, witness is None, "" if witness is None else str(witness)))

    bad = next((i for i, s in enumerate(fam.sets) if not s or any(not 0 <= v < g.n for v in s)), None)
    add("sets-valid", None if bad is None else f"set {bad} is empty or has invalid vertices")
    pair = laminar_violation(fam.sets)
    add("laminar", None if pair is None else f"sets {pair[0]} and {pair[1]} cross")
    neg = next((i for i, w in enumerate(fam.y) if w < 0), None)
    add("y-nonnegative", None if neg is None else f"y of set {neg} is {fam.y[neg]}")

    wit = None
    for e in range(g.m):
        want = sum((w for s, w in zip(fam.sets, fam.y) if g.crosses(e, s)), Fraction(0))
        if want != g.costs[e]:
            wit = f"edge {e} {g.endpoints(e)}: cost {g.costs[e]} but crossing weights sum to {want}"
            break
    add("cost-decomposition", wit)

    feas = certify_feasible(g, inst.x.x)
    add("x-lp-feasible", None if feas.feasible else "; ".join(feas.violations))
    if feas.value != inst.x.value:
        add("x-value", f"stored value {inst.x.value} but c.x = {feas.value}")

    if inst.mode == GENERAL:
        wit = None
        for i, s in enumerate(fam.sets):
            val = cut_value(g, inst.x.x, s)
            if len(s) < g.n and val != 2:
                wit = f"set {i} {sorted(s)} has x(delta(L)) = {val}"
                break
        add("tight-sets", wit)
    else:
        singles = sorted(next(iter(s)) for s in fam.sets if len(s) == 1)
        wit = None
        if len(fam.sets) != g.n or singles != list(range(g.n)):
            wit = "family must be exactly the singletons"
        elif any(w != HALF for w in fam.y):
            wit = "all y must equal 1/2"
        elif any(c != 1 for c in g.costs):
            wit = "all costs must equal 1"
        elif not b.empty:
            wit = "graph-TSP mode uses the empty backbone"
        add("graph-tsp-shape", wit)

    wit = next((f"G[L] not strongly connected for set {i}"
                for i, s in enumerate(fam.sets) if s and not strongly_connected(g, s)), None)
    add("sets-strongly-connected", wit)

    wit = None
    if b.empty:
        if sum(b.edges.values()):
            wit = "empty backbone vertex set with edges"
    else:
        if any(not 0 <= e < g.m for e in b.edges):
            wit = "backbone edge id out of range"
        elif any(g.tails[e] not in b.vertices or g.heads[e] not in b.vertices
                 for e, k in b.edges.items() if k):
            wit = "backbone edge leaves the backbone vertex set"
        elif not is_eulerian(g, b.edges):
            wit = "backbone is not Eulerian"
        elif len(connected_components(g, b.edges, b.vertices)) != 1:
            wit = "backbone is not connected"
    add("backbone-connected-eulerian", wit)
    miss = next((i for i in fam.non_singletons() if not fam.sets[i] & b.vertices), None)
    add("backbone-meets-sets", None if miss is None else f"backbone misses set {miss}")
    return ValidationReport(checks)


# --- file formats ----------------------------------------------------------

def _rat(value, where: str) -> Fraction:
    try:
        return as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{where}: expected an exact rational string like \"p/q\", got {value!r}") from exc


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{where}: expected an integer, got {value!r}")
    return value


def _list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected a list, got {type(value).__name__}")
    return value


def _not_strongly_connected() -> ValidationError:
    return ValidationError(ValidationReport([Check("strongly-connected", False, "graph is not strongly connected")]))


def instance_from_dict(doc: dict) -> tuple[StronglyLaminarInstance, Backbone]:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("n", "edges"):
        if key not in doc:
            raise ParseError(f"missing field '{key}'")
    n = _int(doc["n"], "n")
    edges = []
    for k, item in enumerate(_list(doc["edges"], "edges")):
        item = _list(item, f"edges[{k}]")
        if len(item) != 3:
            raise ParseError(f"edges[{k}]: expected [tail, head, cost]")
        edges.append((_int(item[0], f"edges[{k}][0]"), _int(item[1], f"edges[{k}][1]"),
                      _rat(item[2], f"edges[{k}][2]")))
    try:
        g = MultiDigraph(n, edges)
    except ValueError as exc:
        raise ParseError(f"edges: {exc}") from exc
    mode = doc.get("mode", GRAPH_TSP)
    if mode not in (GRAPH_TSP, GENERAL):
        raise ParseError(f"mode: expected '{GRAPH_TSP}' or '{GENERAL}', got {mode!r}")

    if "laminar" in doc:
        sets, ys = [], []
        for k, item in enumerate(_list(doc["laminar"], "laminar")):
            if not isinstance(item, dict) or "verts" not in item or "y" not in item:
                raise ParseError(f"laminar[{k}]: expected {{verts: [...], y: \"p/q\"}}")
            sets.append(frozenset(_int(v, f"laminar[{k}].verts") for v in _list(item["verts"], f"laminar[{k}].verts")))
            ys.append(_rat(item["y"], f"laminar[{k}].y"))
        family = LaminarFamily(tuple(sets), tuple(ys))
    elif mode == GRAPH_TSP:
        family = LaminarFamily(tuple(frozenset([v]) for v in range(n)), tuple([HALF] * n))
    else:
        raise ParseError("missing field 'laminar' (required in general mode)")

    if "x" in doc and doc["x"] is not None:
        xs = [_rat(v, f"x[{k}]") for k, v in enumerate(_list(doc["x"], "x"))]
        if len(xs) != g.m:
            raise ParseError(f"x: expected {g.m} entries (one per edge), got {len(xs)}")
        x = LpSolution(xs, sum((c * v for c, v in zip(g.costs, xs)), Fraction(0)))
    elif mode == GRAPH_TSP:
        if not strongly_connected(g):
            raise _not_strongly_connected()
        x = solve_atsp_lp(g)
    else:
        raise ValidationError(ValidationReport([Check("x-present", False, "general mode requires the x vector")]))

    bb = doc.get("backbone") or {}
    if not isinstance(bb, dict):
        raise ParseError("backbone: expected {verts: [...], edge_ids: [...]}")
    bverts = frozenset(_int(v, "backbone.verts") for v in _list(bb.get("verts", []), "backbone.verts"))
    bedges = Counter(_int(e, "backbone.edge_ids") for e in _list(bb.get("edge_ids", []), "backbone.edge_ids"))
    return StronglyLaminarInstance(g, family, x, mode), Backbone(bverts, bedges)


def instance_to_dict(inst: StronglyLaminarInstance, b: Optional[Backbone] = None) -> dict:
    b = b or Backbone()
    return {
        "n": inst.g.n,
        "mode": inst.mode,
        "edges": [[u, v, str(c)] for u, v, c in inst.g.edges()],
        "laminar": [{"verts": sorted(s), "y": str(w)} for s, w in zip(inst.family.sets, inst.family.y)],
        "x": [str(v) for v in inst.x.x],
        "backbone": {"verts": sorted(b.vertices), "edge_ids": sorted(b.edges.elements())},
    }


def parse_edge_list(text: str) -> MultiDigraph:
    """DIMACS-like unit digraph: ``p <n> <m>`` then ``a <tail> <head>`` (1-based)."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            nums = [p for p in parts[1:] if p.lstrip("-").isdigit()]
            if not nums:
                raise ParseError(f"line {lineno}: problem line needs a vertex count")
            n = int(nums[0])
        elif parts[0] == "a":
            if n is None:
                raise ParseError(f"line {lineno}: arc before problem line")
            if len(parts) < 3 or not parts[1].isdigit() or not parts[2].isdigit():
                raise ParseError(f"line {lineno}: expected 'a <tail> <head>'")
            u, v = int(parts[1]) - 1, int(parts[2]) - 1
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"line {lineno}: vertex out of range 1..{n}")
            edges.append((u, v, 1))
        else:
            raise ParseError(f"line {lineno}: unknown line type {parts[0]!r}")
    if n is None:
        raise ParseError("missing problem line 'p <n> <m>'")
    return MultiDigraph(n, edges)


def format_edge_list(g: MultiDigraph) -> str:
    lines = [f"p atsp {g.n} {g.m}"]
    lines += [f"a {u + 1} {v + 1}" for u, v, _ in g.edges()]
    return "\n".join(lines) + "\n"


def load(path, check: bool = True) -> tuple[StronglyLaminarInstance, Backbone]:
    """Read an instance file (JSON document or DIMACS-like unit edge list)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        inst, b = instance_from_dict(doc)
    else:
        g = parse_edge_list(text)
        if g.n == 0 or not strongly_connected(g):
            raise _not_strongly_connected()
        inst, b = from_unit_graph(g), Backbone()
    if check:
        report = validate(inst, b)
        if not report.ok:
            raise ValidationError(report)
    return inst, b


def store(path, inst: StronglyLaminarInstance, b: Optional[Backbone] = None) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst, b), indent=1) + "\n")
