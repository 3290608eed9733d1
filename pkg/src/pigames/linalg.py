"""Exact Gaussian elimination over the rationals."""

from fractions import Fraction

__all__ = ["row_reduce", "solve_unique", "solve_square"]

ZERO = Fraction(0)


def row_reduce(A, b):
    """Reduced row echelon form of ``[A | b]``.

    Returns ``(rows, pivots, consistent)`` where ``rows`` holds the nonzero
    reduced rows (rhs last) and ``pivots`` their pivot columns.
    """
    n = len(A[0]) if A else 0
    M = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(A, b)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        piv = M[r][c]
        if piv != 1:
            M[r] = [v / piv for v in M[r]]
        row = M[r]
        for i in range(len(M)):
            if i != r:
                f = M[i][c]
                if f:
                    M[i] = [x - f * y for x, y in zip(M[i], row)]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    consistent = all(M[i][n] == 0 for i in range(r, len(M)))
    return M[:r], pivots, consistent


def solve_unique(A, b):
    """Unique solution of ``A x = b`` or None (singular or inconsistent)."""
    n = len(A[0])
    rows, pivots, ok = row_reduce(A, b)
    if not ok or len(pivots) < n:
        return None
    return tuple(row[n] for row in rows)


def solve_square(A, B):
    """Solve ``A X = B`` for a nonsingular square ``A`` and several columns.

    ``B`` is a list of rows (one rhs column per entry).  Raises ValueError on
    a singular system.
    """
    n = len(A)
    k = len(B[0]) if B else 0
    M = [[Fraction(v) for v in A[i]] + [Fraction(v) for v in B[i]] for i in range(n)]
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            raise ValueError("singular system")
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        if piv != 1:
            M[c] = [v / piv for v in M[c]]
        row = M[c]
        for i in range(n):
            if i != c:
                f = M[i][c]
                if f:
                    M[i] = [x - f * y for x, y in zip(M[i], row)]
    return [M[i][n:n + k] for i in range(n)]
