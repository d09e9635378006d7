"""Command line: gen, lp, solve, verify, opt, bench.

Exit status is 0 only when every certified check passes.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path

from .core import CertificationError, Config, run
from .cover import verify_subtour_cover
from .harness import BenchConfig, bench, exact_opt, generate_unit_instance, rows_to_csv
from .instance import (
    GRAPH_TSP,
    HALF,
    ParseError,
    ValidationError,
    load,
    store,
)


def to_dot(g, highlight: Counter = Counter(), name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    for v in range(g.n):
        lines.append(f"  {v};")
    for e, (u, v, c) in enumerate(g.edges()):
        attrs = [f'label="{c}"']
        if highlight.get(e):
            attrs += ["color=red", f"penwidth={1 + highlight[e]}"]
        lines.append(f"  {u} -> {v} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _cmd_gen(args) -> int:
    g = generate_unit_instance(args.n, Fraction(args.prob), args.seed)
    doc = {
        "n": g.n,
        "mode": GRAPH_TSP,
        "edges": [[u, v, str(c)] for u, v, c in g.edges()],
        "laminar": [{"verts": [v], "y": str(HALF)} for v in range(g.n)],
        "backbone": {"verts": [], "edge_ids": []},
    }
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_lp(args) -> int:
    inst, b = load(args.input)
    print(f"LP = {inst.lp_value} ({float(inst.lp_value):.6f})")
    if args.out:
        store(args.out, inst, b)
    return 0


def _cmd_solve(args) -> int:
    inst, b = load(args.input)
    cfg = Config(Fraction(args.gamma), Fraction(args.epsilon), args.relaxed_step3)
    try:
        h, report = run(inst, b, cfg)
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        if args.trace:
            Path(args.trace).write_text(json.dumps(exc.trace, indent=1) + "\n")
        return 1
    print(f"cost = {report.cost}  LP = {report.lp}  ratio = {float(report.ratio or 0):.4f}")
    print(f"bound = {report.bound} ({float(report.bound):.4f})  restarts = {report.restarts}")
    for name, ok in report.checks.items():
        print(f"  [{'pass' if ok else 'FAIL'}] {name}")
    if args.trace:
        Path(args.trace).write_text(json.dumps(report.trace, indent=1) + "\n")
    if args.out:
        Path(args.out).write_text(json.dumps({"h": sorted(h.elements()), "cost": str(report.cost)}) + "\n")
    if args.dot:
        Path(args.dot).write_text(to_dot(inst.g, b.edges + h))
    return 0 if report.certified else 1


def _cmd_verify(args) -> int:
    inst, b = load(args.input)
    doc = json.loads(Path(args.cover).read_text())
    h = Counter(doc.get("h", []))
    f = Counter(doc["f"])
    report = verify_subtour_cover(inst, b, h, f)
    for c in report.checks:
        print(f"  [{'pass' if c.ok else 'FAIL'}] {c.name} {c.witness}")
    return 0 if report.ok else 1


def _cmd_opt(args) -> int:
    inst, _ = load(args.input)
    print(f"OPT = {exact_opt(inst.g)}")
    return 0


def _cmd_bench(args) -> int:
    bc = BenchConfig(args.n_min, args.n_max, args.seeds, Fraction(args.prob),
                     Fraction(args.gamma), Fraction(args.epsilon), args.relaxed_step3,
                     args.opt_max_n, args.jobs)
    rows = bench(bc)
    text = rows_to_csv(rows, timing=args.timing)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if not r.ok]
    for r in bad:
        print(f"row n={r.n} seed={r.seed} flagged: {r.problems}", file=sys.stderr)
    print(f"{len(rows)} rows, {len(bad)} flagged, {sum(r.restarts for r in rows)} restarts",
          file=sys.stderr)
    return 0 if not bad else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svensson-atsp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random strongly connected unit digraph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--prob", default="3/10", help="extra-edge probability, e.g. 1/10")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    def config_flags(p):
        p.add_argument("--gamma", default="169/70")
        p.add_argument("--epsilon", default="1/10")
        p.add_argument("--relaxed-step3", action="store_true")

    p = sub.add_parser("lp", help="solve the LP relaxation exactly")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_lp)

    p = sub.add_parser("solve", help="run the approximation algorithm")
    p.add_argument("--in", dest="input", required=True)
    config_flags(p)
    p.add_argument("--trace", help="write the per-iteration trace as JSON")
    p.add_argument("--out", help="write the edge multiset H as JSON")
    p.add_argument("--dot", help="write the tour as a Graphviz file")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="check a subtour cover file against an instance")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--cover", required=True, help='JSON {"h": [edge ids], "f": [edge ids]}')
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("opt", help="exact optimum by subset dynamic programming (n <= 15)")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=_cmd_opt)

    p = sub.add_parser("bench", help="sweep random instances and write CSV")
    p.add_argument("--n-min", type=int, default=5)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--prob", default="3/10")
    p.add_argument("--opt-max-n", type=int, default=12)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="add a runtime_ms column")
    p.add_argument("--csv")
    config_flags(p)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
