# The cut LP on a small digraph, solved exactly and checked cut by cut.
from fractions import Fraction

from svensson_atsp import MultiDigraph, certify_feasible, exact_opt, solve_atsp_lp

# two 2-cycles {0,1} and {2,3}; crossing between them is expensive one way
g = MultiDigraph(4, [
    (0, 1, 1), (1, 0, 1),
    (2, 3, 1), (3, 2, 1),
    (1, 2, 3), (2, 1, Fraction(1, 2)),
    (0, 3, 4), (3, 0, 2),
])

sol = solve_atsp_lp(g)
print("LP value:", sol.value)
for e, (u, v, c) in enumerate(g.edges()):
    if sol.x[e]:
        print(f"  x[{u}->{v}] = {sol.x[e]}   (cost {c})")

report = certify_feasible(g, sol)
print("feasible:", report.feasible, " smallest cut x(delta(U)) =", report.min_cut_value,
      "at U =", sorted(report.min_cut_set))

# the LP is a lower bound on the best closed walk
print("OPT:", exact_opt(g))
