# Small sweep of random unit instances; rows go to CSV and a quick summary.
import io
from fractions import Fraction

import numpy as np

from svensson_atsp.harness import BenchConfig, bench, rows_to_csv

rows = bench(BenchConfig(n_min=5, n_max=12, seeds=4, prob=Fraction(1, 5)))
text = rows_to_csv(rows)
print(text.splitlines()[0])
print(*text.splitlines()[1:6], sep="\n")
print("...")

table = np.genfromtxt(io.StringIO(text), delimiter=",", names=True, dtype=None, encoding=None)
ratio = np.array([float(Fraction(r)) for r in table["ratio_alg_lp"]])
gap = np.array([float(Fraction(a) / Fraction(o)) for a, o in zip(table["alg_cost"], table["opt"])])
print(f"{len(rows)} rows, ALG/LP mean {ratio.mean():.3f} max {ratio.max():.3f}")
print(f"ALG/OPT mean {gap.mean():.3f} max {gap.max():.3f}")
print("rows with restarts:", int((table["restarts"] > 0).sum()))
print("all certified:", bool(table["certified"].all()))
