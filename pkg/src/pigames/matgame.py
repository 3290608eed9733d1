"""Exact zero-sum matrix games.

Player A picks a row and maximizes, Player B picks a column and minimizes.
A mixed strategy is a tuple of Fractions aligned with the declared rows
(or columns); functions also accept a mapping from action id to weight.
"""

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .core import DomainError, as_fraction
from .linalg import row_reduce, solve_unique
from .lp import _run, linprog

__all__ = [
    "GameForm",
    "NormalFormGame",
    "MatrixSolution",
    "outcome",
    "strategy_value",
    "matrix_value",
    "solve",
    "is_optimal",
    "optimal_polytope_vertices",
    "in_convex_hull",
    "mixed",
    "format_mixed",
]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class GameForm:
    """Interaction table: ``outcomes[i][j]`` is the outcome of (rows[i], cols[j])."""

    rows: tuple
    cols: tuple
    outcomes: tuple

    def __post_init__(self):
        if not self.rows or not self.cols:
            raise DomainError("game form needs non-empty action sets")
        if len(self.outcomes) != len(self.rows) or any(len(r) != len(self.cols) for r in self.outcomes):
            raise DomainError("outcome table has the wrong shape")

    def valued(self, value_of):
        """Normal form obtained by valuing each outcome with ``value_of``."""
        payoff = tuple(tuple(value_of(o) for o in row) for row in self.outcomes)
        return NormalFormGame(self.rows, self.cols, payoff)


@dataclass(frozen=True)
class NormalFormGame:
    rows: tuple
    cols: tuple
    payoff: tuple

    def __post_init__(self):
        if not self.rows or not self.cols:
            raise DomainError("matrix game needs non-empty action sets")
        payoff = tuple(tuple(as_fraction(x) for x in row) for row in self.payoff)
        if len(payoff) != len(self.rows) or any(len(r) != len(self.cols) for r in payoff):
            raise DomainError("payoff matrix has the wrong shape")
        if any(not 0 <= x <= 1 for row in payoff for x in row):
            raise DomainError("payoffs must lie in [0, 1]")
        object.__setattr__(self, "payoff", payoff)
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))

    @classmethod
    def from_matrix(cls, matrix):
        matrix = [list(r) for r in matrix]
        rows = tuple(f"a{i + 1}" for i in range(len(matrix)))
        cols = tuple(f"b{j + 1}" for j in range(len(matrix[0]) if matrix else 0))
        return cls(rows, cols, matrix)

    @property
    def shape(self):
        return len(self.rows), len(self.cols)


@dataclass(frozen=True)
class MatrixSolution:
    value: Fraction
    optA: tuple
    optB: tuple


def mixed(actions, weights):
    """Coerce a mapping or sequence into a weight tuple aligned with ``actions``."""
    if isinstance(weights, Mapping):
        extra = [a for a in weights if a not in actions]
        if extra:
            raise DomainError(f"unknown actions {extra}")
        vec = tuple(as_fraction(weights.get(a, 0)) for a in actions)
    else:
        vec = tuple(as_fraction(w) for w in weights)
        if len(vec) != len(actions):
            raise DomainError(f"strategy has {len(vec)} weights for {len(actions)} actions")
    if any(w < 0 for w in vec) or sum(vec, ZERO) != 1:
        raise DomainError("strategy weights must be nonnegative and sum to 1")
    return vec


def format_mixed(vec):
    return "(" + ",".join(str(w) for w in vec) + ")"


def outcome(nf, sigma_a, sigma_b):
    """Expected payoff when A mixes with ``sigma_a`` and B with ``sigma_b``."""
    x = mixed(nf.rows, sigma_a)
    y = mixed(nf.cols, sigma_b)
    return sum((xi * yj * p for xi, row in zip(x, nf.payoff) if xi for yj, p in zip(y, row) if yj), ZERO)


def _column_values(M, x):
    return [sum((xi * row[j] for xi, row in zip(x, M) if xi), ZERO) for j in range(len(M[0]))]


def strategy_value(nf, sigma_a):
    """Worst-case payoff of ``sigma_a``; the minimum is attained at a pure column."""
    return min(_column_values(nf.payoff, mixed(nf.rows, sigma_a)))


def _lp_solve(M):
    """Value and one optimal pair of the matrix game ``M`` (any rationals).

    Shifts ``M`` to entries >= 1 and solves ``max sum(w)`` subject to
    ``M' w <= 1``; the slack reduced costs of the final tableau give A's
    optimal strategy.
    """
    n, k = len(M), len(M[0])
    lo = min(min(row) for row in M)
    shift = ONE - lo
    T = []
    for i, row in enumerate(M):
        slack = [ZERO] * n
        slack[i] = ONE
        T.append([p + shift for p in row] + slack + [ONE])
    T.append([-ONE] * k + [ZERO] * (n + 1))
    basis = list(range(k, k + n))
    _run(T, basis, k + n)
    w = [ZERO] * k
    for i, bv in enumerate(basis):
        if bv < k:
            w[bv] = T[i][k + n]
    total = sum(w, ZERO)
    scaled = ONE / total
    y = tuple(wj * scaled for wj in w)
    x = tuple(T[n][k + i] * scaled for i in range(n))
    return scaled - shift, x, y


def _pure_saddle(M):
    lower = max(min(row) for row in M)
    upper = min(max(row[j] for row in M) for j in range(len(M[0])))
    return lower if lower == upper else None


def matrix_value(nf):
    """Value of the game (cheaper than :func:`solve`)."""
    M = nf.payoff if isinstance(nf, NormalFormGame) else nf
    v = _pure_saddle(M)
    if v is not None:
        return v
    return _lp_solve(M)[0]


def _vertices(M, v, y):
    """Vertices of ``{x in simplex : x^T M >= v}`` given an optimal column mix ``y``.

    Complementary slackness restricts the search: rows that do worse than
    ``v`` against ``y`` carry no weight in any optimal strategy, and
    columns in the support of ``y`` are tight for every optimal strategy.
    """
    n, k = len(M), len(M[0])
    R = [a for a in range(n) if sum((yj * M[a][j] for j, yj in enumerate(y) if yj), ZERO) == v]
    T = [j for j in range(k) if y[j] > 0]
    eq_A = [[ONE] * len(R)] + [[M[a][j] for a in R] for j in T]
    eq_b = [ONE] + [v] * len(T)
    ineq = []
    for t in range(len(R)):
        e = [ZERO] * len(R)
        e[t] = ONE
        ineq.append((e, ZERO))
    for j in range(k):
        if j not in T:
            ineq.append(([M[a][j] for a in R], v))
    _, pivots, _ = row_reduce(eq_A, eq_b)
    d = len(R) - len(pivots)
    found = set()
    for S in combinations(range(len(ineq)), d):
        A = eq_A + [ineq[s][0] for s in S]
        b = eq_b + [ineq[s][1] for s in S]
        z = solve_unique(A, b)
        if z is None:
            continue
        if all(sum((ci * zi for ci, zi in zip(c, z)), ZERO) >= rhs for c, rhs in ineq):
            x = [ZERO] * n
            for a, za in zip(R, z):
                x[a] = za
            found.add(tuple(x))
    return sorted(found)


def _solve_matrix(M):
    v = _pure_saddle(M)
    _, x, y = _lp_solve(M)
    if v is None:
        v = sum((xi * yj * M[i][j] for i, xi in enumerate(x) for j, yj in enumerate(y)), ZERO)
    vert_a = _vertices(M, v, y)
    neg_t = [[-M[i][j] for i in range(len(M))] for j in range(len(M[0]))]
    vert_b = _vertices(neg_t, -v, x)
    return v, vert_a, vert_b


def solve(nf):
    """Exact value with the lexicographically least optimal vertex per player."""
    v, vert_a, vert_b = _solve_matrix(nf.payoff)
    return MatrixSolution(v, vert_a[0], vert_b[0])


def is_optimal(nf, sigma_a, value=None):
    if value is None:
        value = matrix_value(nf)
    return strategy_value(nf, sigma_a) == value


def optimal_polytope_vertices(nf):
    """All vertices of A's optimal-strategy polytope, sorted lexicographically."""
    return _solve_matrix(nf.payoff)[1]


def in_convex_hull(point, vertices):
    """Exact test whether ``point`` is a convex combination of ``vertices``."""
    m = len(vertices)
    if m == 0:
        return False
    A_eq = [[ONE] * m] + [[vert[i] for vert in vertices] for i in range(len(point))]
    b_eq = [ONE] + list(point)
    return linprog([ZERO] * m, A_eq=A_eq, b_eq=b_eq).status == "optimal"
