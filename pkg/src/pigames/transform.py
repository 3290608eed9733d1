"""Game constructions: the free-choice color game, value-area slices and
their turn-based expansion.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .core import Arena, DomainError, Game, LassoWord, lasso_in_objective, neutral_color
from .matgame import format_mixed, mixed, optimal_polytope_vertices, strategy_value, matrix_value
from .valuation import lift, local_nf, value_areas

__all__ = [
    "winning_lasso",
    "build_gw",
    "SlicedGame",
    "TurnBasedSlicedGame",
    "build_gu",
    "build_gu_tb",
    "is_turn_based",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def winning_lasso(objective, max_len=None):
    """Shortest-first search for a cycle word in the objective.

    Prefixes are irrelevant for prefix-independent objectives, so only
    cycles are tried, up to length ``max_len`` (default: alphabet size).
    """
    alphabet = tuple(objective.alphabet)
    if max_len is None:
        max_len = len(alphabet)
    for n in range(1, max_len + 1):
        for cycle in product(alphabet, repeat=n):
            w = LassoWord((), cycle)
            if lasso_in_objective(w, objective):
                return w
    return None


def _gw_name(c):
    return f"w{c}"


def build_gw(alphabet, objective, prefix=""):
    """Game where A alone picks the next color; every state has value 1."""
    objective = objective.with_alphabet(tuple(alphabet))
    lasso = winning_lasso(objective)
    if lasso is None:
        raise DomainError("objective possibly empty")
    states = tuple(prefix + _gw_name(c) for c in alphabet)
    color = dict(zip(states, alphabet))
    acts = tuple(f"to{c}" for c in alphabet)
    actions_a = {q: acts for q in states}
    actions_b = {q: ("-",) for q in states}
    nature = {}
    delta = {}
    for q2 in states:
        nature[prefix + "n" + q2[len(prefix):]] = {q2: ONE}
    for q in states:
        for a, q2 in zip(acts, states):
            delta[(q, a, "-")] = prefix + "n" + q2[len(prefix):]
    arena = Arena(states, color, actions_a, actions_b, nature, delta)
    return Game(arena, objective, name="gw")


@dataclass
class SlicedGame:
    game: Game
    origin_map: dict
    vertex_actions: dict
    gw_states: tuple = ()
    area: tuple = ()


@dataclass
class TurnBasedSlicedGame:
    game: Game
    origin_map: dict
    choice_actions: dict
    neutral_color: object
    filtered: list = field(default_factory=list)
    gw_states: tuple = ()
    area: tuple = ()


def _fresh_prefix(taken):
    prefix = "gw:"
    while any(str(x).startswith(prefix) for x in taken):
        prefix = "_" + prefix
    return prefix


def _slice_frame(game, v, u):
    if u == 0:
        raise DomainError("slices are only built for positive values")
    areas = value_areas(v)
    if u not in areas.areas:
        raise DomainError(f"{u} is not a value of the valuation")
    return areas.areas[u]


def _embed_gw(game, taken):
    prefix = _fresh_prefix(taken)
    gw = build_gw(game.objective.alphabet, game.objective, prefix=prefix)
    return gw.arena, prefix


def _split(arena, q, sigma, b, inside, gw_states):
    """Mixed successor distribution with exits redirected uniformly into the sink block."""
    keep = {}
    for a, pa in sigma.items():
        for q2, p in arena.nature[arena.delta[(q, a, b)]].items():
            if q2 in inside:
                keep[q2] = keep.get(q2, ZERO) + pa * p
    out = sum(keep.values(), ZERO)
    rest = ONE - out
    dist = dict(keep)
    if rest:
        share = rest / len(gw_states)
        for w in gw_states:
            dist[w] = dist.get(w, ZERO) + share
    return dist


def build_gu(game, v, u):
    """Slice of the area ``Q_u`` whose A-actions are optimal polytope vertices."""
    u = Fraction(u)
    area = _slice_frame(game, v, u)
    arena = game.arena
    gwa, prefix = _embed_gw(game, arena.states)
    inside = set(area)
    states = tuple(area) + gwa.states
    color = {q: arena.color[q] for q in area}
    color.update(gwa.color)
    actions_a = dict(gwa.actions_a)
    actions_b = dict(gwa.actions_b)
    nature = dict(gwa.nature)
    delta = dict(gwa.delta)
    terminal = {}
    origin = {q: q for q in area}
    origin.update({w: ("gw", gwa.color[w]) for w in gwa.states})
    vertex_actions = {}
    lifted = lift(arena, v)
    for q in area:
        if q in arena.terminal:
            terminal[q] = ONE
            actions_a[q] = ("-",)
            actions_b[q] = ("-",)
            nature[f"{q}|stay"] = {q: ONE}
            delta[(q, "-", "-")] = f"{q}|stay"
            continue
        nf = local_nf(arena, v, q, lifted)
        verts = optimal_polytope_vertices(nf)
        names = tuple(f"v{i}" for i in range(len(verts)))
        vertex_actions[q] = [dict((a, w) for a, w in zip(nf.rows, vert) if w) for vert in verts]
        actions_a[q] = names
        actions_b[q] = tuple(arena.actions_b[q])
        for name, sigma in zip(names, vertex_actions[q]):
            for b in arena.actions_b[q]:
                d = f"{q}|{name}|{b}"
                nature[d] = _split(arena, q, sigma, b, inside, gwa.states)
                delta[(q, name, b)] = d
    new = Arena(states, color, actions_a, actions_b, nature, delta, terminal)
    return SlicedGame(Game(new, game.objective, name=f"{game.name}_u{u}"), origin, vertex_actions, gwa.states, tuple(area))


def build_gu_tb(game, v, u, choice_sets):
    """Turn-based slice: A commits to a listed optimal mix, then B answers.

    Members of ``choice_sets[q]`` that are not optimal in the local game are
    dropped and reported in ``filtered``.
    """
    u = Fraction(u)
    area = _slice_frame(game, v, u)
    arena = game.arena
    k, objective = neutral_color(game.objective)
    gwa, prefix = _embed_gw(game, arena.states)
    inside = set(area)
    lifted = lift(arena, v)
    states = list(area)
    color = {q: arena.color[q] for q in area}
    actions_a, actions_b, nature, delta, terminal = {}, {}, {}, {}, {}
    origin = {q: q for q in area}
    choices = {}
    filtered = []
    bstates = []
    for q in area:
        if q in arena.terminal:
            terminal[q] = ONE
            actions_a[q] = ("-",)
            actions_b[q] = ("-",)
            nature[f"{q}|stay"] = {q: ONE}
            delta[(q, "-", "-")] = f"{q}|stay"
            continue
        nf = local_nf(arena, v, q, lifted)
        val = matrix_value(nf)
        kept = []
        for sigma in choice_sets.get(q, ()):
            vec = mixed(nf.rows, sigma)
            if strategy_value(nf, vec) == val:
                d = dict(sigma)
                if d not in kept:
                    kept.append(d)
            else:
                filtered.append((q, format_mixed(vec)))
        if not kept:
            raise DomainError(f"no optimal choices at {q}")
        choices[q] = kept
        names = tuple(f"c{i}" for i in range(len(kept)))
        actions_a[q] = names
        actions_b[q] = ("-",)
        for i, sigma in enumerate(kept):
            bq = f"{q}#{i}"
            bstates.append(bq)
            origin[bq] = (q, i)
            color[bq] = k
            nature[f"{q}|c{i}"] = {bq: ONE}
            delta[(q, f"c{i}", "-")] = f"{q}|c{i}"
            actions_a[bq] = ("-",)
            actions_b[bq] = tuple(arena.actions_b[q])
            for b in arena.actions_b[q]:
                d = f"{bq}|{b}"
                nature[d] = _split(arena, q, sigma, b, inside, gwa.states)
                delta[(bq, "-", b)] = d
    states = tuple(states + bstates) + gwa.states
    color.update(gwa.color)
    actions_a.update(gwa.actions_a)
    actions_b.update(gwa.actions_b)
    nature.update(gwa.nature)
    delta.update(gwa.delta)
    origin.update({w: ("gw", gwa.color[w]) for w in gwa.states})
    new = Arena(states, color, actions_a, actions_b, nature, delta, terminal)
    g = Game(new, objective, name=f"{game.name}_tb{u}")
    return TurnBasedSlicedGame(g, origin, choices, k, filtered, gwa.states, tuple(area))


def is_turn_based(game):
    a = game.arena
    return all(len(a.actions_a[q]) == 1 or len(a.actions_b[q]) == 1 for q in a.states)
