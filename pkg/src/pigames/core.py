"""Exact-rational model of finite concurrent stochastic arenas and objectives.

Everything here is built on :class:`fractions.Fraction`; no floating point
is involved.  State, action and Nature ids are plain strings and every
iteration follows declaration order.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import chain

__all__ = [
    "DomainError",
    "Distribution",
    "point",
    "uniform",
    "as_fraction",
    "Arena",
    "Objective",
    "Game",
    "LassoWord",
    "validate_arena",
    "step_distribution",
    "path_probability",
    "lasso_in_objective",
    "neutral_color",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def as_fraction(x):
    """Parse ints, Fractions and strings like ``"3/4"`` into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; use a Fraction or 'p/q'")
    return Fraction(x)


class Distribution(Mapping):
    """Immutable finite probability distribution with exact weights.

    Zero weights are dropped.  By default the weights must be positive and
    sum to exactly one; ``check=False`` skips that (used internally for
    intermediate sums that are known to be normalized).
    """

    __slots__ = ("_w", "_hash", "_thr")

    def __init__(self, weights=(), *, check=True):
        if isinstance(weights, Mapping):
            weights = weights.items()
        w = {}
        for k, p in weights:
            p = as_fraction(p)
            if check and p < 0:
                raise DomainError(f"negative probability {p} for {k!r}")
            if p != 0:
                w[k] = w.get(k, ZERO) + p
        if check and sum(w.values(), ZERO) != 1:
            raise DomainError(f"distribution sums to {sum(w.values(), ZERO)}, not 1")
        self._w = w
        self._hash = None
        self._thr = None

    def __getitem__(self, k):
        return self._w[k]

    def get(self, k, default=ZERO):
        return self._w.get(k, default)

    def __iter__(self):
        return iter(self._w)

    def __len__(self):
        return len(self._w)

    def __eq__(self, other):
        if isinstance(other, Distribution):
            return self._w == other._w
        if isinstance(other, Mapping):
            return self._w == {k: v for k, v in other.items() if v != 0}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._w.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in self._w.items())
        return f"Distribution({{{body}}})"

    @property
    def support(self):
        return tuple(self._w)

    def restricted_to(self, keys):
        return {k: p for k, p in self._w.items() if k in keys}


def point(x):
    return Distribution({x: ONE})


def uniform(xs):
    xs = list(xs)
    return Distribution({x: Fraction(1, len(xs)) for x in xs})


@dataclass(frozen=True, eq=False)
class Arena:
    """Finite stochastic concurrent arena.

    ``nature`` maps a Nature id to a raw ``{state: Fraction}`` dict so that a
    malformed arena can still be represented and diagnosed by
    :func:`validate_arena`.  ``terminal`` holds the fixed payoff of
    absorbing end states.
    """

    states: tuple
    color: Mapping
    actions_a: Mapping
    actions_b: Mapping
    nature: Mapping
    delta: Mapping
    terminal: Mapping = field(default_factory=dict)

    def is_terminal(self, q):
        return q in self.terminal

    def successors(self, q, a, b):
        return self.nature[self.delta[(q, a, b)]]

    @property
    def used_colors(self):
        seen = {}
        for q in self.states:
            seen.setdefault(self.color[q], None)
        return tuple(seen)

    @property
    def nonterminal_states(self):
        return tuple(q for q in self.states if q not in self.terminal)


PARITY_KINDS = ("parity", "buchi", "cobuchi")
KINDS = PARITY_KINDS + ("genbuchi", "meanpayoff")


@dataclass(frozen=True)
class Objective:
    """Prefix-independent objective over a finite color alphabet.

    ``sets`` is only used by generalized Büchi (one color set per conjunct),
    ``threshold`` only by mean-payoff.
    """

    kind: str
    alphabet: tuple
    sets: tuple = ()
    threshold: Fraction = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown objective kind {self.kind!r}")
        if self.kind == "buchi" and set(self.alphabet) != {1, 2}:
            raise DomainError("Büchi objectives use the alphabet {1, 2}")
        if self.kind == "cobuchi" and set(self.alphabet) != {0, 1}:
            raise DomainError("co-Büchi objectives use the alphabet {0, 1}")
        if self.kind == "meanpayoff":
            if self.threshold is None:
                raise DomainError("mean-payoff needs a threshold")
            if any(not 0 <= c <= 1 for c in self.alphabet):
                raise DomainError("mean-payoff colors must lie in [0, 1]")
        if self.kind == "genbuchi":
            if not self.sets:
                raise DomainError("generalized Büchi needs at least one color set")
            if any(not s <= set(self.alphabet) for s in self.sets):
                raise DomainError("generalized Büchi set outside the alphabet")

    def check_color(self, c):
        if c not in self.alphabet:
            raise DomainError(f"color {c} not in alphabet {self.alphabet}")

    def accepts(self, recurrent, mean=None):
        """Membership of a run whose infinitely-often colors are ``recurrent``.

        Mean-payoff needs the long-run average ``mean`` instead.
        """
        if self.kind in PARITY_KINDS:
            return max(recurrent) % 2 == 0
        if self.kind == "genbuchi":
            rec = set(recurrent)
            return all(rec & s for s in self.sets)
        return mean >= self.threshold

    def with_alphabet(self, alphabet):
        return Objective(self.kind, tuple(alphabet), self.sets, self.threshold)


@dataclass(frozen=True, eq=False)
class Game:
    arena: Arena
    objective: Objective
    name: str = "game"

    def __post_init__(self):
        for q in self.arena.states:
            c = self.arena.color[q]
            if c not in self.objective.alphabet:
                raise DomainError(f"state {q} has color {c} outside the objective alphabet")


@dataclass(frozen=True)
class LassoWord:
    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        if not self.cycle:
            raise DomainError("lasso cycle must be non-empty")


def validate_arena(arena):
    """Return a list of human-readable invariant violations (empty if sound)."""
    diags = []
    states = set(arena.states)
    if not arena.states:
        diags.append("no states")
    for q in arena.states:
        if q not in arena.color:
            diags.append(f"state {q}: missing color")
        for side, acts in (("A", arena.actions_a), ("B", arena.actions_b)):
            if not acts.get(q):
                diags.append(f"state {q}: empty action set for {side}")
    for d, dist in arena.nature.items():
        bad = [q for q in dist if q not in states]
        if bad:
            diags.append(f"nature {d}: unknown states {bad}")
        if any(p < 0 or p > 1 for p in dist.values()):
            diags.append(f"nature {d}: probability outside [0,1]")
        total = sum(dist.values(), ZERO)
        if total != 1:
            diags.append(f"nature {d}: distribution not normalized (sums to {total})")
    for q in arena.states:
        for a in arena.actions_a.get(q, ()):
            for b in arena.actions_b.get(q, ()):
                d = arena.delta.get((q, a, b))
                if d is None:
                    diags.append(f"transition undefined: ({q}, {a}, {b})")
                elif d not in arena.nature:
                    diags.append(f"transition ({q}, {a}, {b}) targets unknown nature {d}")
    for (q, a, b) in arena.delta:
        if q not in states or a not in arena.actions_a.get(q, ()) or b not in arena.actions_b.get(q, ()):
            diags.append(f"transition defined outside action sets: ({q}, {a}, {b})")
    for q, pay in arena.terminal.items():
        if q not in states:
            diags.append(f"terminal {q}: unknown state")
            continue
        if not 0 <= pay <= 1:
            diags.append(f"terminal {q}: payoff {pay} outside [0,1]")
        for a in arena.actions_a.get(q, ()):
            for b in arena.actions_b.get(q, ()):
                d = arena.delta.get((q, a, b))
                if d in arena.nature and {k: v for k, v in arena.nature[d].items() if v} != {q: 1}:
                    diags.append(f"terminal {q}: not absorbing under ({a}, {b})")
    return diags


def step_distribution(arena, q, sigma_a, sigma_b):
    """Successor distribution at ``q`` when both players mix as given."""
    for side, sigma, acts in (("A", sigma_a, arena.actions_a[q]), ("B", sigma_b, arena.actions_b[q])):
        extra = [x for x in sigma if x not in acts]
        if extra:
            raise DomainError(f"actions {extra} not available to {side} at {q}")
    out = {}
    for a, pa in sigma_a.items():
        for b, pb in sigma_b.items():
            w = pa * pb
            for q2, p in arena.nature[arena.delta[(q, a, b)]].items():
                out[q2] = out.get(q2, ZERO) + w * p
    return Distribution(out, check=False)


def path_probability(game, strat_a, strat_b, q0, path):
    """Probability of the finite state sequence ``path`` from ``q0``."""
    arena = game.arena
    if not path or path[0] != q0:
        return ZERO
    prob = ONE
    for i in range(len(path) - 1):
        hist = tuple(path[: i + 1])
        nxt = step_distribution(arena, path[i], strat_a.play(arena, hist), strat_b.play(arena, hist))
        prob *= nxt.get(path[i + 1])
        if prob == 0:
            break
    return prob


def lasso_in_objective(word, objective):
    """Decide membership of the ultimately periodic word ``prefix·cycle^ω``."""
    for c in chain(word.prefix, word.cycle):
        objective.check_color(c)
    mean = None
    if objective.kind == "meanpayoff":
        mean = sum((as_fraction(c) for c in word.cycle), ZERO) / len(word.cycle)
    return objective.accepts(set(word.cycle), mean)


def neutral_color(objective):
    """Return ``(k, objective')`` where ``k`` is neutral for ``objective'``.

    ``objective'`` differs from the input only for generalized Büchi, whose
    alphabet gets a fresh color that belongs to none of the conjuncts.
    """
    if objective.kind in PARITY_KINDS:
        return min(objective.alphabet), objective
    if objective.kind == "meanpayoff":
        m = objective.threshold
        if m in objective.alphabet:
            return m, objective
        return m, objective.with_alphabet(objective.alphabet + (m,))
    fresh = max(objective.alphabet) + 1
    return fresh, objective.with_alphabet(objective.alphabet + (fresh,))
