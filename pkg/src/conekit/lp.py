"""Exact rational linear programming (two-phase tableau simplex, Bland's rule).

Only what the chamber engine needs: maximize ``c.x`` subject to ``A x <= b``,
``E x = f`` and finite box bounds, everything in Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


@dataclass
class LPResult:
    status: str
    x: list[Fraction] | None = None
    value: Fraction | None = None

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T, basis, r, c):
    p = T[r][c]
    prow = T[r]
    nz = [j for j, v in enumerate(prow) if v != 0]
    for j in nz:
        prow[j] = prow[j] / p
    for i, row in enumerate(T):
        if i != r:
            f = row[c]
            if f != 0:
                for j in nz:
                    row[j] -= f * prow[j]
    basis[r] = c


def _simplex(T, basis, allowed):
    """Maximize; the last row of T holds reduced costs (entering when > 0)."""
    m = len(T) - 1
    obj = T[-1]
    while True:
        # entering: smallest index with positive reduced cost (Bland)
        enter = next((j for j in allowed if obj[j] > 0), None)
        if enter is None:
            return True
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False  # unbounded
        _pivot(T, basis, best[1], enter)


def maximize(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
             A_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
             bounds: Sequence[tuple] = ()) -> LPResult:
    n = len(c)
    c = [Fraction(v) for v in c]
    lo = [Fraction(b[0]) for b in bounds]
    hi = [Fraction(b[1]) for b in bounds]
    if len(lo) != n:
        raise ValueError("every variable needs finite bounds")
    # x = lo + y, 0 <= y <= hi - lo
    rows, rhs, kinds = [], [], []
    for a, b in zip(A_ub, b_ub):
        a = [Fraction(v) for v in a]
        rows.append(a)
        rhs.append(Fraction(b) - sum(x * l for x, l in zip(a, lo)))
        kinds.append("le")
    for j in range(n):
        rows.append([Fraction(int(i == j)) for i in range(n)])
        rhs.append(hi[j] - lo[j])
        kinds.append("le")
    for a, b in zip(A_eq, b_eq):
        a = [Fraction(v) for v in a]
        rows.append(a)
        rhs.append(Fraction(b) - sum(x * l for x, l in zip(a, lo)))
        kinds.append("eq")
    m = len(rows)
    n_slack = sum(k == "le" for k in kinds)
    # artificials only where no slack can start in the basis
    need_art = [k == "eq" or b < 0 for k, b in zip(kinds, rhs)]
    n_art = sum(need_art)
    width = n + n_slack + n_art
    zero = Fraction(0)
    T, basis = [], []
    s = a_i = 0
    for a, b, k, art in zip(rows, rhs, kinds, need_art):
        row = a + [zero] * (n_slack + n_art) + [b]
        slack_col = None
        if k == "le":
            slack_col = n + s
            row[slack_col] = Fraction(1)
            s += 1
        if b < 0:
            row = [-v for v in row]
        if art:
            col = n + n_slack + a_i
            a_i += 1
            row[col] = Fraction(1)
            basis.append(col)
        else:
            basis.append(slack_col)
        T.append(row)
    real = range(n + n_slack)
    if n_art:
        # phase 1: maximize -sum(artificials)
        obj = [zero] * (width + 1)
        for row, art in zip(T, need_art):
            if art:
                for j in real:
                    obj[j] += row[j]
                obj[-1] += row[-1]
        T.append(obj)
        _simplex(T, basis, real)
        if T[-1][-1] != 0:
            return LPResult(INFEASIBLE)
        for i in range(m):
            if basis[i] >= n + n_slack:
                j = next((j for j in real if T[i][j] != 0), None)
                if j is not None:
                    _pivot(T, basis, i, j)
        T.pop()
    # phase 2
    obj = [zero] * (width + 1)
    for j in range(n):
        obj[j] = c[j]
    for i in range(m):
        b = basis[i]
        if obj[b] != 0:
            f = obj[b]
            obj = [o - f * t for o, t in zip(obj, T[i])]
    T.append(obj)
    if not _simplex(T, basis, real):
        raise ArithmeticError("LP unbounded despite box bounds")
    y = [zero] * width
    for i in range(m):
        y[basis[i]] = T[i][-1]
    x = [l + y[j] for j, l in enumerate(lo)]
    return LPResult(OPTIMAL, x, sum(a * b for a, b in zip(c, x)))
