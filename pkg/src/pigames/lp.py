"""Exact linear programming over the rationals.

A dense two-phase tableau simplex with Bland's anti-cycling rule.  Problems
are tiny (a few dozen variables at most) so clarity wins over speed.
"""

from dataclasses import dataclass
from fractions import Fraction

__all__ = ["LPResult", "linprog", "simplex_standard"]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: tuple = None
    fun: Fraction = None


def _pivot(T, r, c):
    row = T[r]
    p = row[c]
    if p != 1:
        inv = ONE / p
        row = [e * inv for e in row]
        T[r] = row
    for i, other in enumerate(T):
        if i != r:
            f = other[c]
            if f:
                T[i] = [a - f * b for a, b in zip(other, row)]


def _run(T, basis, ncols):
    """Minimize the objective held in the last row of ``T`` (Bland's rule).

    Row layout: constraint rows then the reduced-cost row, rhs in column
    ``ncols``.  Returns False if unbounded.
    """
    m = len(T) - 1
    obj = T[m]
    while True:
        enter = next((j for j in range(ncols) if obj[j] < 0), None)
        if enter is None:
            return True
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][ncols] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        r = best[1]
        _pivot(T, r, enter)
        basis[r] = enter
        obj = T[m]


def simplex_standard(c, A, b):
    """Minimize ``c·x`` subject to ``A x = b`` and ``x >= 0``."""
    n = len(c)
    rows = []
    for ai, bi in zip(A, b):
        ai = [Fraction(v) for v in ai]
        bi = Fraction(bi)
        if bi < 0:
            ai = [-v for v in ai]
            bi = -bi
        rows.append((ai, bi))
    m = len(rows)
    width = n + m
    # phase 1: one artificial per row
    T = []
    for i, (ai, bi) in enumerate(rows):
        art = [ZERO] * m
        art[i] = ONE
        T.append(ai + art + [bi])
    cost = [ZERO] * (width + 1)
    for row in T:
        for j in range(n):
            cost[j] -= row[j]
        cost[width] -= row[width]
    T.append(cost)
    basis = list(range(n, n + m))
    _run(T, basis, width)
    if T[m][width] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(basis):
        if basis[i] >= n:
            j = next((j for j in range(n) if T[i][j] != 0), None)
            if j is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, i, j)
            basis[i] = j
        i += 1
    m = len(basis)
    T = [row[:n] + [row[width]] for row in T[:m]]
    obj = [Fraction(v) for v in c] + [ZERO]
    for i, bv in enumerate(basis):
        f = obj[bv]
        if f:
            obj = [a - f * r for a, r in zip(obj, T[i])]
    T.append(obj)
    if not _run(T, basis, n):
        return LPResult("unbounded")
    x = [ZERO] * n
    for i, bv in enumerate(basis):
        x[bv] = T[i][n]
    fun = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), ZERO)
    return LPResult("optimal", tuple(x), fun)


def linprog(c, A_ub=(), b_ub=(), A_eq=(), b_eq=(), maximize=False, free=()):
    """Solve a small LP exactly.

    Minimizes (or maximizes) ``c·x`` subject to ``A_ub x <= b_ub`` and
    ``A_eq x = b_eq``.  Variables are nonnegative except those whose index
    is listed in ``free``.
    """
    n = len(c)
    free = sorted(set(free))
    sign = -1 if maximize else 1
    # column map: each free variable gets a negative twin appended
    k = len(A_ub)

    def expand(row):
        row = [Fraction(v) for v in row]
        return row + [-row[j] for j in free]

    A = []
    b = []
    for i, (row, bi) in enumerate(zip(A_ub, b_ub)):
        slack = [ZERO] * k
        slack[i] = ONE
        A.append(expand(row) + slack)
        b.append(bi)
    for row, bi in zip(A_eq, b_eq):
        A.append(expand(row) + [ZERO] * k)
        b.append(bi)
    cc = [sign * v for v in expand(c)] + [ZERO] * k
    if not A:
        if any(v < 0 for v in cc):
            return LPResult("unbounded")
        return LPResult("optimal", tuple([ZERO] * n), ZERO)
    res = simplex_standard(cc, A, b)
    if res.status != "optimal":
        return res
    x = list(res.x[:n])
    for t, j in enumerate(free):
        x[j] -= res.x[n + t]
    fun = sum((Fraction(ci) * xi for ci, xi in zip(c, x)), ZERO)
    return LPResult("optimal", tuple(x), fun)
