"""Valuations, local games, fixpoint checks, value iteration and best responses.

A valuation is a plain ``{state: Fraction}`` dict in state declaration
order.  Strategies are duck-typed here: anything with a ``skeleton``
(``memories``, ``init``, ``step(m, color)``) and an ``action(m, q)`` method
returning a Distribution over A's actions will do.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor

from .core import DomainError, as_fraction
from .matgame import GameForm, matrix_value
from .mdp import losing_region, max_reach_reward

__all__ = [
    "as_valuation",
    "lift",
    "local_form",
    "local_nf",
    "bellman",
    "check_fixpoint",
    "FixpointReport",
    "value_iteration",
    "VIResult",
    "ValueAreas",
    "value_areas",
    "best_response_mdp",
    "mdp_best_response",
    "start_node",
    "start_values",
]

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_TOL = Fraction(1, 10**9)


def as_valuation(game, values):
    """Validate and normalize a valuation for ``game``."""
    arena = game.arena
    out = {}
    for q in arena.states:
        if q not in values:
            raise DomainError(f"valuation misses state {q}")
        x = as_fraction(values[q])
        if not 0 <= x <= 1:
            raise DomainError(f"value {x} at {q} outside [0, 1]")
        if q in arena.terminal and x != arena.terminal[q]:
            raise DomainError(f"terminal {q} must carry its payoff {arena.terminal[q]}")
        out[q] = x
    return out


def lift(arena, v):
    """Expected value of every Nature state under ``v``."""
    return {d: sum((p * v[q] for q, p in dist.items()), ZERO) for d, dist in arena.nature.items()}


def local_form(arena, q):
    """The interaction table at ``q`` with Nature ids as outcomes."""
    rows = tuple(arena.actions_a[q])
    cols = tuple(arena.actions_b[q])
    return GameForm(rows, cols, tuple(tuple(arena.delta[(q, a, b)] for b in cols) for a in rows))


def local_nf(arena, v, q, lifted=None):
    """Local matrix game at ``q``: cell (a, b) pays the lifted value of δ(q, a, b)."""
    if q in arena.terminal:
        raise DomainError(f"{q} is terminal and has no local game")
    if lifted is None:
        lifted = lift(arena, v)
    return local_form(arena, q).valued(lifted.__getitem__)


def bellman(game, v):
    """One application of the local-value operator (terminals stay pinned)."""
    arena = game.arena
    lifted = lift(arena, v)
    out = {}
    for q in arena.states:
        if q in arena.terminal:
            out[q] = arena.terminal[q]
        else:
            out[q] = matrix_value(local_nf(arena, v, q, lifted))
    return out


@dataclass
class FixpointReport:
    ok: bool
    rows: list = field(default_factory=list)  # (state, claimed, local value, ok)

    @property
    def failures(self):
        return [r for r in self.rows if not r[3]]


def check_fixpoint(game, v, tol=ZERO):
    """Compare ``v(q)`` with the value of the local game at every state.

    With ``tol = 0`` the comparison is exact equality.
    """
    arena = game.arena
    tol = as_fraction(tol)
    tv = bellman(game, v)
    rows = []
    for q in arena.states:
        rows.append((q, v[q], tv[q], abs(tv[q] - v[q]) <= tol))
    return FixpointReport(all(r[3] for r in rows), rows)


@dataclass
class VIResult:
    valuation: dict
    iterations: int
    residual: Fraction
    converged: bool
    history: list = field(default_factory=list)


def _snap(x, grid, up):
    if grid is None or x.denominator <= grid:
        return x
    scaled = x * grid
    return Fraction(ceil(scaled) if up else floor(scaled), grid)


def value_iteration(game, mode="least", tol=DEFAULT_TOL, max_iter=100_000, grid=2**48, keep_history=False):
    """Iterate the local-value operator from all-0 (least) or all-1 (greatest).

    Iterates are rounded down (least) or up (greatest) to multiples of
    ``1/grid`` so that fractions stay small; rounding in that direction keeps
    the sequence monotone and on the correct side of the fixpoint.  Pass
    ``grid=None`` for exact iterates.  Returns the first iterate ``v`` whose
    residual ``max |T v - v|`` is at most ``tol``.
    """
    if mode not in ("least", "greatest"):
        raise DomainError("mode must be 'least' or 'greatest'")
    tol = as_fraction(tol)
    if tol <= 0:
        raise DomainError("tol must be positive")
    arena = game.arena
    start = ZERO if mode == "least" else ONE
    v = {q: arena.terminal.get(q, start) for q in arena.states}
    hist = [dict(v)] if keep_history else []
    up = mode == "greatest"
    n = 0
    while True:
        tv = bellman(game, v)
        res = max(abs(tv[q] - v[q]) for q in arena.states)
        if res <= tol or n >= max_iter:
            return VIResult(v, n, res, res <= tol, hist)
        v = {q: tv[q] if q in arena.terminal else _snap(tv[q], grid, up) for q in arena.states}
        n += 1
        if keep_history:
            hist.append(dict(v))


@dataclass(frozen=True)
class ValueAreas:
    value_set: tuple
    areas: dict


def value_areas(v):
    areas = {}
    for q, x in v.items():
        areas.setdefault(x, []).append(q)
    keys = sorted(areas)
    return ValueAreas(tuple(keys), {u: tuple(areas[u]) for u in keys})


def best_response_mdp(game, strat):
    """B's MDP against the finite-memory ``strat``.

    Nodes are ``(m, q)`` where ``m`` is the memory in force when A acts at
    ``q`` (already updated with the color of ``q``); only memories reachable
    over the arena's colors appear.
    """
    arena = game.arena
    sk = strat.skeleton
    mems = {sk.init: None}
    frontier = [sk.init]
    while frontier:
        m = frontier.pop()
        for c in arena.used_colors:
            m2 = sk.step(m, c)
            if m2 not in mems:
                mems[m2] = None
                frontier.append(m2)
    mdp = {}
    for m in sk.memories:
        if m not in mems:
            continue
        for q in arena.states:
            if q in arena.terminal:
                mdp[(m, q)] = [("-", {(m, q): ONE})]
                continue
            sa = strat.action(m, q)
            acts = []
            for b in arena.actions_b[q]:
                d = {}
                for a, pa in sa.items():
                    for q2, p in arena.nature[arena.delta[(q, a, b)]].items():
                        key = (sk.step(m, arena.color[q2]), q2)
                        d[key] = d.get(key, ZERO) + pa * p
                acts.append((b, d))
            mdp[(m, q)] = acts
    return mdp


def mdp_best_response(game, strat):
    """Value of ``strat`` against B's best response from every product node.

    B maximizes the probability of falsifying the objective plus, on
    absorption at a terminal with payoff ``p``, the amount ``1 - p``.  End
    components where B falsifies the objective almost surely are found by
    maximal end component analysis; the rest is a reachability problem
    solved exactly.  Returns ``{(m, q): value for A}``.
    """
    if hasattr(strat, "as_finite_memory"):
        strat = strat.as_finite_memory()
    arena = game.arena
    mdp = best_response_mdp(game, strat)
    term = {x for x in mdp if x[1] in arena.terminal}
    color = {x: arena.color[x[1]] for x in mdp}
    reward = {x: ONE - arena.terminal[x[1]] for x in term}
    for x in losing_region(mdp, color, game.objective, exclude=term):
        reward[x] = ONE
    loss = max_reach_reward(mdp, reward)
    return {x: ONE - loss[x] for x in mdp}


def start_node(strat, arena, q):
    """Product node of a play that starts at ``q``."""
    if hasattr(strat, "as_finite_memory"):
        strat = strat.as_finite_memory()
    sk = strat.skeleton
    return (sk.step(sk.init, arena.color[q]), q)


def start_values(game, strat, br=None):
    """``{q: value of strat from q}`` read off :func:`mdp_best_response`."""
    if br is None:
        br = mdp_best_response(game, strat)
    return {q: br[start_node(strat, game.arena, q)] for q in game.arena.states}
