"""Bundled example games, strategies and claimed valuations.

Entries marked ``authoritative=False`` are illustrative reconstructions
with no claimed values.  Every claimed valuation is re-derived by the test
suite rather than trusted.
"""

import os
from dataclasses import dataclass
from fractions import Fraction

from .core import DomainError, Distribution, point
from .formats import parse_game, parse_strategy, parse_valuation
from .strategies import PositionalStrategy, ProgrammaticStrategy

__all__ = [
    "CorpusEntry",
    "CORPUS",
    "corpus_dir",
    "corpus_path",
    "load_corpus_game",
    "load_corpus_values",
    "load_corpus_strategy",
    "resolve_game_path",
    "epsilon_strategy",
    "fig2_grid",
]


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    description: str
    authoritative: bool = True
    strategies: tuple = ()


CORPUS = (
    CorpusEntry("fig9_reach", "reachability game whose optimal strategies include a non-subgame-optimal one",
                strategies=("fig9_uniform", "fig9_loopy", "fig9_quarter", "fig9_left", "fig9_right")),
    CorpusEntry("fig9_variant", "fig9_reach with a locally optimal bottom row",
                strategies=("fig9_uniform", "fig9_loopy", "fig9_quarter", "fig9_left", "fig9_right")),
    CorpusEntry("fig2_parity", "parity game where every finite-choice strategy has value 0",
                strategies=("fig2_left", "fig2_right")),
    CorpusEntry("hide_or_run", "value 1 without an optimal strategy"),
    CorpusEntry("gw_buchi", "free-choice color game for the Buchi objective"),
    CorpusEntry("tb_buchi_ladder", "turn-based Buchi game with five value areas"),
    CorpusEntry("tb_buchi_fork", "turn-based Buchi game"),
    CorpusEntry("tb_buchi_quarter", "turn-based Buchi game"),
    CorpusEntry("tb_cobuchi_pair", "turn-based co-Buchi game"),
    CorpusEntry("tb_cobuchi_third", "turn-based co-Buchi game"),
    CorpusEntry("tb_cobuchi_twothirds", "turn-based co-Buchi game"),
    CorpusEntry("fig1_cobuchi", "co-Buchi game needing infinite memory (illustrative only)", authoritative=False),
)

_BY_NAME = {e.name: e for e in CORPUS}


def corpus_dir():
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


def corpus_path(name, ext="cgame"):
    path = os.path.join(corpus_dir(), f"{name}.{ext}")
    if not os.path.exists(path):
        raise DomainError(f"no corpus file {name}.{ext}")
    return path


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def resolve_game_path(arg):
    """A file path as given, or the path of a corpus game by name."""
    if os.path.exists(arg):
        return arg
    name = os.path.basename(arg)
    if name.endswith(".cgame"):
        name = name[: -len(".cgame")]
    if name in _BY_NAME:
        return corpus_path(name)
    raise DomainError(f"no such game file or corpus entry: {arg}")


def load_corpus_game(name):
    return parse_game(_read(corpus_path(name)))


def load_corpus_values(name, game=None):
    game = game or load_corpus_game(name)
    return parse_valuation(_read(corpus_path(name, "values")), game)


def load_corpus_strategy(name, game):
    return parse_strategy(_read(corpus_path(name, "cstrat")), game)


def epsilon_strategy(game, state="q0", main="top", deviate="bottom", eps=None, count=None):
    """Infinite-memory strategy that deviates at ``state`` with probability ``eps(k)``.

    ``eps`` defaults to ``k -> 2**-k``.  With ``count`` unset, ``k`` is the
    number of visits to ``state`` so far, the current one included.  With
    ``count`` a collection of states, ``k`` is one plus the number of visits
    to those states so far, so ``eps`` stays constant between them.
    Elsewhere the first action is played.
    """
    eps = eps or (lambda k: Fraction(1, 2**k))
    arena = game.arena
    cache = [None]
    others = {q: point(arena.actions_a[q][0]) for q in arena.states}
    counted = frozenset(count) if count is not None else frozenset((state,))
    offset = 0 if count is None else 1

    def dist(k):
        while len(cache) <= k:
            e = eps(len(cache))
            cache.append(Distribution({main: 1 - e, deviate: e}))
        return cache[k]

    def observer():
        seen = [offset]

        def step(q):
            if q in counted:
                seen[0] += 1
            if q != state:
                return others[q]
            return dist(seen[0])

        return step

    return ProgrammaticStrategy(observer=observer, name="epsilon")


def fig2_grid(game, size=10, state="q0", main="top", deviate="bottom"):
    """``size * size`` positional strategies with ``P(main) = (size*i + j) / (size*size - 1)``."""
    arena = game.arena
    n = size * size - 1
    out = []
    for i in range(size):
        for j in range(size):
            p = Fraction(size * i + j, n)
            act = {q: point(arena.actions_a[q][0]) for q in arena.nonterminal_states}
            act[state] = Distribution({main: p, deviate: 1 - p})
            out.append(PositionalStrategy(act, arena))
    return out
