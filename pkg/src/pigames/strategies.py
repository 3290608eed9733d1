"""Strategy representations and the operations that build or inspect them.

Every strategy offers ``play(arena, history)`` returning a Distribution over
the actions available at ``history[-1]``.  Finite-memory strategies follow
the color-driven convention: after a history ``ρ`` the memory is the fold
of the update over the colors of ``ρ`` (last state included), and the
action map is applied to that memory and the last state.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .core import DomainError, Distribution, point
from .matgame import matrix_value, mixed
from .valuation import check_fixpoint, local_nf, lift, mdp_best_response

__all__ = [
    "MemorySkeleton",
    "TRIVIAL_SKELETON",
    "PositionalStrategy",
    "FiniteMemoryStrategy",
    "ProgrammaticStrategy",
    "GluedStrategy",
    "update_star",
    "residual",
    "relevant_states",
    "history_nodes",
    "witness_history",
    "LocalOptReport",
    "is_locally_optimal",
    "finite_choice_set",
    "glue",
    "product_skeleton",
    "lift_to_skeleton",
    "reset_wrapper",
    "default_fallback",
]


@dataclass(frozen=True)
class MemorySkeleton:
    """Finite automaton over colors.

    ``update`` maps ``(m, color)`` to the next memory; pairs left out keep
    the memory unchanged.  If ``alphabet`` is set, colors outside it are
    rejected.
    """

    memories: tuple
    init: object
    update: dict = field(default_factory=dict, hash=False)
    alphabet: tuple = None

    def __post_init__(self):
        if self.init not in self.memories:
            raise DomainError(f"initial memory {self.init!r} not declared")
        for (m, _), m2 in self.update.items():
            if m not in self.memories or m2 not in self.memories:
                raise DomainError(f"update {m!r} -> {m2!r} uses an undeclared memory")

    def step(self, m, c):
        if self.alphabet is not None and c not in self.alphabet:
            raise DomainError(f"color {c} outside the skeleton alphabet")
        return self.update.get((m, c), m)

    def colors(self):
        if self.alphabet is not None:
            return tuple(self.alphabet)
        seen = {}
        for (_, c) in self.update:
            seen.setdefault(c, None)
        return tuple(seen)


TRIVIAL_SKELETON = MemorySkeleton(("-",), "-")


def update_star(skeleton, word, start=None):
    """Fold the update over ``word`` starting from ``start`` (default: init)."""
    m = skeleton.init if start is None else start
    for c in word:
        m = skeleton.step(m, c)
    return m


def _check_dist(dist, acts, where):
    if not isinstance(dist, Distribution):
        dist = Distribution(dist)
    extra = [a for a in dist if a not in acts]
    if extra:
        raise DomainError(f"{where}: actions {extra} not available")
    return dist


class PositionalStrategy:
    """One distribution per non-terminal state."""

    def __init__(self, act, arena=None, player="A"):
        self.player = player
        self.act = {q: d if isinstance(d, Distribution) else Distribution(d) for q, d in act.items()}
        if arena is not None:
            acts = arena.actions_a if player == "A" else arena.actions_b
            for q in arena.nonterminal_states:
                if q not in self.act:
                    raise DomainError(f"positional strategy undefined at {q}")
                _check_dist(self.act[q], acts[q], f"state {q}")

    skeleton = TRIVIAL_SKELETON

    def action(self, m, q):
        return self.act[q]

    def play(self, arena, history):
        q = history[-1]
        if q in arena.terminal and q not in self.act:
            return _terminal_action(arena, q, self.player)
        return self.act[q]

    def as_finite_memory(self):
        return FiniteMemoryStrategy(TRIVIAL_SKELETON, {("-", q): d for q, d in self.act.items()}, player=self.player)

    def is_deterministic(self):
        return all(len(d) == 1 for d in self.act.values())

    def __eq__(self, other):
        return isinstance(other, PositionalStrategy) and self.act == other.act

    def __repr__(self):
        return f"PositionalStrategy({self.act!r})"


def _terminal_action(arena, q, player):
    acts = arena.actions_a[q] if player == "A" else arena.actions_b[q]
    return point(acts[0])


class FiniteMemoryStrategy:
    """Memory skeleton plus an action map on ``(memory, state)`` pairs."""

    def __init__(self, skeleton, action_map, arena=None, player="A"):
        self.skeleton = skeleton
        self.player = player
        self.action_map = {k: d if isinstance(d, Distribution) else Distribution(d) for k, d in action_map.items()}
        if arena is not None:
            acts = arena.actions_a if player == "A" else arena.actions_b
            for m in relevant_states(skeleton, arena.used_colors):
                for q in arena.nonterminal_states:
                    if (m, q) not in self.action_map:
                        raise DomainError(f"action map undefined at ({m}, {q})")
                    _check_dist(self.action_map[(m, q)], acts[q], f"({m}, {q})")

    def action(self, m, q):
        return self.action_map[(m, q)]

    def memory_after(self, arena, history):
        return update_star(self.skeleton, [arena.color[q] for q in history])

    def play(self, arena, history):
        q = history[-1]
        m = self.memory_after(arena, history)
        if q in arena.terminal and (m, q) not in self.action_map:
            return _terminal_action(arena, q, self.player)
        return self.action_map[(m, q)]

    def as_finite_memory(self):
        return self

    def with_init(self, m):
        sk = MemorySkeleton(self.skeleton.memories, m, self.skeleton.update, self.skeleton.alphabet)
        return FiniteMemoryStrategy(sk, self.action_map, player=self.player)

    def is_deterministic(self):
        return all(len(d) == 1 for d in self.action_map.values())

    def __repr__(self):
        return f"FiniteMemoryStrategy({self.skeleton.memories!r}, init={self.skeleton.init!r})"


class ProgrammaticStrategy:
    """Arbitrary history-dependent strategy.

    Either ``fn(history)`` maps a state tuple to a distribution, or
    ``observer()`` returns a fresh stateful callable that is fed the states
    of a play one at a time and answers with the distribution to play at
    each.  The observer form lets long simulations avoid rescanning the
    history at every step.
    """

    def __init__(self, fn=None, player="A", name="programmatic", observer=None):
        if (fn is None) == (observer is None):
            raise DomainError("give exactly one of fn and observer")
        self.fn = fn
        self.observer = observer
        self.player = player
        self.name = name

    def play(self, arena, history):
        if self.fn is not None:
            return self.fn(tuple(history))
        obs = self.observer()
        for q in history:
            d = obs(q)
        return d

    def session(self):
        """Callable fed one state per step, returning the distribution to play."""
        if self.observer is not None:
            return self.observer()
        hist = []

        def step(q):
            hist.append(q)
            return self.fn(tuple(hist))

        return step


def residual(strategy, rho, arena):
    """Strategy ``π ↦ s(ρ·π)``: the same action map with a shifted initial memory."""
    if not rho:
        raise DomainError("residual needs a non-empty history")
    s = strategy.as_finite_memory()
    return s.with_init(update_star(s.skeleton, [arena.color[q] for q in rho]))


def relevant_states(skeleton, colors=None):
    """Memories reachable from the initial one under ``colors`` (default: all known)."""
    if colors is None:
        colors = skeleton.colors()
    seen = {skeleton.init: None}
    frontier = deque([skeleton.init])
    while frontier:
        m = frontier.popleft()
        for c in colors:
            m2 = skeleton.step(m, c)
            if m2 not in seen:
                seen[m2] = None
                frontier.append(m2)
    return tuple(seen)


def history_nodes(strategy, arena):
    """Product nodes ``(m, q)`` met after some history in ``Q+``.

    Histories range over all state sequences, so this is every
    ``(step(m, col q), q)`` with ``m`` reachable over the arena's colors.
    """
    s = strategy.as_finite_memory()
    sk = s.skeleton
    out = {}
    for m in relevant_states(sk, arena.used_colors):
        for q in arena.states:
            out.setdefault((sk.step(m, arena.color[q]), q), None)
    return list(out)


def witness_history(strategy, arena, node):
    """A shortest state sequence after which the strategy sits at ``node``."""
    s = strategy.as_finite_memory()
    sk = s.skeleton
    target_m, q = node
    rep = {}
    for x in arena.states:
        rep.setdefault(arena.color[x], x)
    prev = {sk.init: None}
    frontier = deque([sk.init])
    order = [sk.init]
    while frontier:
        m = frontier.popleft()
        for c in arena.used_colors:
            m2 = sk.step(m, c)
            if m2 not in prev:
                prev[m2] = (m, c)
                frontier.append(m2)
                order.append(m2)
    for m in order:
        if sk.step(m, arena.color[q]) == target_m:
            word = []
            while prev[m] is not None:
                m, c = prev[m]
                word.append(rep[c])
            return tuple(reversed(word)) + (q,)
    return None


@dataclass
class LocalOptReport:
    ok: bool
    violations: list = field(default_factory=list)  # (memory, state, column, payoff, value)
    checked: int = 0


def is_locally_optimal(game, v, strategy):
    """Check that every reachable action map entry is optimal in its local game."""
    arena = game.arena
    s = strategy.as_finite_memory()
    lifted = lift(arena, v)
    nfs = {}
    viol = []
    checked = 0
    for (m, q) in history_nodes(s, arena):
        if q in arena.terminal:
            continue
        if q not in nfs:
            nf = local_nf(arena, v, q, lifted)
            nfs[q] = (nf, matrix_value(nf))
        nf, val = nfs[q]
        x = mixed(nf.rows, s.action(m, q))
        cols = [sum((xi * row[j] for xi, row in zip(x, nf.payoff)), Fraction(0)) for j in range(len(nf.cols))]
        checked += 1
        worst = min(range(len(cols)), key=cols.__getitem__)
        if cols[worst] < v[q]:
            viol.append((m, q, nf.cols[worst], cols[worst], v[q]))
    return LocalOptReport(not viol, viol, checked)


def finite_choice_set(strategy, q, colors=None):
    """Distinct distributions the strategy may use at ``q``."""
    s = strategy.as_finite_memory()
    out = []
    for m in relevant_states(s.skeleton, colors):
        d = s.action_map.get((m, q))
        if d is not None and d not in out:
            out.append(d)
    return out


def default_fallback(arena, player="A"):
    """Pure positional strategy playing the lexicographically first action."""
    acts = arena.actions_a if player == "A" else arena.actions_b
    return PositionalStrategy({q: point(min(acts[q])) for q in arena.nonterminal_states}, player=player)


class GluedStrategy:
    """Per-area pieces played on the longest suffix that stays in the area."""

    def __init__(self, pieces, areas, fallback):
        self.pieces = dict(pieces)
        self.areas = areas
        self.fallback = fallback
        self.value_of = {q: u for u, qs in areas.areas.items() for q in qs}
        missing = [u for u in areas.value_set if u != 0 and u not in self.pieces]
        if missing:
            raise DomainError(f"no piece for value areas {missing}")

    def play(self, arena, history):
        q = history[-1]
        u = self.value_of[q]
        if u == 0:
            return self.fallback.play(arena, history)
        k = len(history)
        while k > 0 and self.value_of[history[k - 1]] == u:
            k -= 1
        return self.pieces[u].play(arena, tuple(history[k:]))

    def flatten(self):
        """Equivalent positional strategy when every piece is positional.

        Finite-memory pieces restart their memory on entering an area, which
        a single skeleton over colors cannot express, so they are rejected.
        """
        if not all(isinstance(p, PositionalStrategy) for p in self.pieces.values()):
            raise DomainError("only gluings of positional pieces flatten to a single strategy")
        act = dict(self.fallback.act)
        for u, p in self.pieces.items():
            if u == 0:
                continue
            for q in self.areas.areas[u]:
                if q in p.act:
                    act[q] = p.act[q]
        return PositionalStrategy(act)


def glue(pieces, areas, fallback):
    return GluedStrategy(pieces, areas, fallback)


def product_skeleton(first, second):
    """Product of two skeletons; memories are pairs updated componentwise."""
    mems = tuple((a, b) for a in first.memories for b in second.memories)
    colors = dict.fromkeys(first.colors() + second.colors())
    update = {}
    for a, b in mems:
        for c in colors:
            nxt = (first.step(a, c), second.step(b, c))
            if nxt != (a, b):
                update[((a, b), c)] = nxt
    alphabet = None
    if first.alphabet is not None and second.alphabet is not None:
        alphabet = tuple(c for c in first.alphabet if c in second.alphabet)
    return MemorySkeleton(mems, (first.init, second.init), update, alphabet)


def lift_to_skeleton(strategy, skeleton, component):
    """Re-express a strategy on a product skeleton, reading memory ``component``."""
    if isinstance(strategy, PositionalStrategy):
        amap = {(m, q): d for m in skeleton.memories for q, d in strategy.act.items()}
    else:
        amap = {(m, q): strategy.action_map[(m[component], q)]
                for m in skeleton.memories for (mm, q) in strategy.action_map if mm == m[component]}
    return FiniteMemoryStrategy(skeleton, amap, player=strategy.player)


def reset_wrapper(game, v, base):
    """Fall back to the fresh-start choice wherever the base strategy is no longer optimal.

    At a product node whose continuation is worth less than ``v`` the
    wrapper plays what the base would play on the one-state history made of
    the current state; elsewhere it plays the base.  The skeleton is kept,
    so the wrapper is finite-memory whenever the base is.
    """
    if not check_fixpoint(game, v).ok:
        raise DomainError("reset_wrapper needs an exact fixpoint valuation")
    arena = game.arena
    s = base.as_finite_memory()
    sk = s.skeleton
    br = mdp_best_response(game, s)
    amap = {}
    for (m, q), d in s.action_map.items():
        if q in arena.terminal or br.get((m, q), v[q]) == v[q]:
            amap[(m, q)] = d
            continue
        fresh = (sk.step(sk.init, arena.color[q]), q)
        if br[fresh] != v[q]:
            raise DomainError(f"base strategy is not optimal from {q}")
        amap[(m, q)] = s.action_map[fresh]
    return FiniteMemoryStrategy(sk, amap, player=s.player)
