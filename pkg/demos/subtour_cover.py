# Covers for a partial solution H on a random unit digraph.
from collections import Counter
from fractions import Fraction

from svensson_atsp import Backbone, compute_subtour_cover, from_unit_graph, generate_unit_instance, verify_subtour_cover
from svensson_atsp.cover import outside_components

g = generate_unit_instance(9, Fraction(1, 5), seed=7)
inst = from_unit_graph(g)

# H: a 2-cycle if the graph has one, otherwise nothing
pair = next(((e, f) for e in range(g.m) for f in range(g.m)
             if g.tails[e] == g.heads[f] and g.heads[e] == g.tails[f]), None)
h = Counter(pair) if pair else Counter()
print("components of (V, H):", [sorted(w) for w, _ in outside_components(inst, Backbone(), h)])

cover = compute_subtour_cover(inst, Backbone(), h)
print("cover built by", cover.method, "with cost", g.cost(cover.f))
print("edges:", [g.endpoints(e) for e in sorted(cover.f.elements())])

for check in verify_subtour_cover(inst, Backbone(), h, cover.f).checks:
    print(f"  {check.name:15s} {'ok' if check.ok else 'FAILED ' + check.witness}")

# an empty F leaves every component uncovered
empty = verify_subtour_cover(inst, Backbone(), h, Counter())
print("empty F:", empty["coverage"].witness)
