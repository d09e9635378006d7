"""Dense two-phase tableau simplex over Fractions.

Small and slow on purpose: it serves as the exact fallback for the cut LP and
as an independent oracle in tests.  Bland's rule guarantees termination.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)


class InfeasibleLP(ValueError):
    pass


class UnboundedLP(ValueError):
    pass


def _pivot(tab: list[list[Fraction]], basis: list[int], r: int, col: int) -> None:
    row = tab[r]
    piv = row[col]
    if piv != 1:
        inv = 1 / piv
        tab[r] = row = [a * inv if a else ZERO for a in row]
    nz = [j for j, a in enumerate(row) if a]
    for i, other in enumerate(tab):
        if i == r:
            continue
        f = other[col]
        if f:
            for j in nz:
                other[j] -= f * row[j]
    basis[r] = col


def _run(tab, basis, obj_row: int, allowed_cols: int) -> None:
    """Minimize; the objective row stores reduced costs, last column is -z."""
    while True:
        obj = tab[obj_row]
        col = next((j for j in range(allowed_cols) if obj[j] < 0), None)
        if col is None:
            return
        best = None
        for i in range(len(basis)):
            a = tab[i][col]
            if a > 0:
                ratio = tab[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise UnboundedLP("objective unbounded below")
        _pivot(tab, basis, best[1], col)


def solve_exact_lp(
    c: Sequence,
    a_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    a_ge: Sequence[Sequence] = (),
    b_ge: Sequence = (),
) -> tuple[list[Fraction], Fraction]:
    """min c.x  s.t.  a_eq x = b_eq,  a_ge x >= b_ge,  x >= 0  (all exact)."""
    nvar = len(c)
    rows = []
    for a, b in zip(a_eq, b_eq):
        rows.append(([Fraction(v) for v in a], None, Fraction(b)))
    for a, b in zip(a_ge, b_ge):
        rows.append(([Fraction(v) for v in a], True, Fraction(b)))
    m = len(rows)
    nsurplus = sum(1 for _, ge, _ in rows if ge)
    width = nvar + nsurplus + m + 1
    tab: list[list[Fraction]] = []
    basis = []
    s = 0
    for i, (a, ge, b) in enumerate(rows):
        row = a + [ZERO] * (width - nvar)
        if ge:
            row[nvar + s] = Fraction(-1)
            s += 1
        if b < 0:
            row = [-v for v in row]
            b = -b
        row[nvar + nsurplus + i] = Fraction(1)
        row[-1] = b
        tab.append(row)
        basis.append(nvar + nsurplus + i)
    art0 = nvar + nsurplus
    # phase 1 objective: sum of artificials, expressed in nonbasic terms
    phase1 = [ZERO] * width
    for row in tab:
        for j in range(art0):
            phase1[j] -= row[j]
        phase1[-1] -= row[-1]
    tab.append(phase1)
    _run(tab, basis, m, art0)
    if tab[m][-1] != 0:
        raise InfeasibleLP("no feasible point")
    tab.pop()
    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= art0:
            col = next((j for j in range(art0) if tab[i][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, i, col)
    keep = [i for i in range(m) if basis[i] < art0]
    tab = [tab[i] for i in keep]
    basis = [basis[i] for i in keep]
    obj = [Fraction(v) for v in c] + [ZERO] * (width - nvar)
    for i, b in enumerate(basis):
        f = obj[b]
        if f:
            obj = [o - f * t for o, t in zip(obj, tab[i])]
    tab.append(obj)
    _run(tab, basis, len(basis), art0)
    x = [ZERO] * nvar
    for i, b in enumerate(basis):
        if b < nvar:
            x[b] = tab[i][-1]
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), ZERO)
    return x, value
