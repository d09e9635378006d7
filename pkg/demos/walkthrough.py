# One run on a unit digraph, iteration by iteration.
from fractions import Fraction

from svensson_atsp import Config, exact_opt, from_unit_graph, run
from svensson_atsp.harness import generate_sparse_unit_instance

g = generate_sparse_unit_instance(11, seed=3, extra_edge_prob=0.02)
inst = from_unit_graph(g)
cfg = Config()
print(f"n = {g.n}, m = {g.m}, LP = {inst.lp_value}")
print(f"gamma = {cfg.gamma}, eps = {cfg.epsilon}, p = {cfg.p}")
print(f"guarantee: cost <= {cfg.graph_tsp_ratio} * LP  (~{float(cfg.graph_tsp_ratio):.4f})")

h, report = run(inst, cfg=cfg)

for rec in report.trace:
    if rec.get("restart"):
        print(f"epoch {rec['restart_epoch']}: cover cost {rec['cover_cost']}, "
              f"restart ({rec['reason']}, {rec['branch']})")
    else:
        print(f"epoch {rec['restart_epoch']} step {rec['iteration']}: cover cost {rec['cover_cost']}, "
              f"components {rec['components_before']} -> {rec['components_after']}, "
              f"X circuits {len(rec['x_additions'])}")

print("tour cost", report.cost, " OPT", exact_opt(g), " ratio to LP", f"{float(report.ratio):.3f}")
print("all certified checks hold:", report.certified)
for name, ok in report.checks.items():
    print(f"  {name}: {ok}")
assert report.cost <= cfg.graph_tsp_ratio * inst.lp_value
assert Fraction(report.cost) >= inst.lp_value
