"""Seeded Monte Carlo play for arbitrary strategies.

Randomness comes from xorshift64* (shifts 12, 25, 27; multiplier
``0x2545F4914F6CDD1D``).  Episode ``e`` of a run with seed ``s`` uses its
own generator seeded with ``splitmix64(s + (e + 1) * 0x9E3779B97F4A7C15)``,
so episodes are independent of each other and of the order they are run
in.  A distribution with weights ``p_1, ..., p_n`` is sampled by drawing a
64-bit word ``x`` and taking the first ``i`` with
``x < ceil((p_1 + ... + p_i) * 2**64)``.  Distributions with a single
support point consume no draw.  Within a step A's action is drawn first,
then B's, then Nature's successor.

Each episode makes ``horizon`` steps from the start state, visiting
``s_1, ..., s_horizon``.  Occupancy is measured on the tail window made of
the last ``horizon - horizon // 2`` of these states, which stands in for
settling in a value area.  A play that reaches a terminal state stays
there for the remaining steps without consuming randomness.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt

from .core import DomainError, Distribution
from .strategies import FiniteMemoryStrategy, GluedStrategy, PositionalStrategy, ProgrammaticStrategy

__all__ = [
    "SimConfig",
    "SimReport",
    "SimulationError",
    "Xorshift64Star",
    "splitmix64",
    "episode_seed",
    "simulate",
    "binomial_band",
]

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MULT = 0x2545F4914F6CDD1D


def splitmix64(x):
    x = (x + GOLDEN) & MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def episode_seed(seed, episode):
    s = splitmix64((seed + (episode + 1) * GOLDEN) & MASK)
    return s or GOLDEN


class Xorshift64Star:
    """xorshift64* generator; the state must be non-zero."""

    __slots__ = ("x",)

    def __init__(self, seed):
        self.x = (seed & MASK) or GOLDEN

    def next(self):
        x = self.x
        x ^= x >> 12
        x ^= (x << 25) & MASK
        x ^= x >> 27
        self.x = x
        return (x * MULT) & MASK


def _thresholds(weights):
    acc = Fraction(0)
    out = []
    for p in weights:
        acc += p
        t = acc * (1 << 64)
        out.append(-((-t.numerator) // t.denominator))
    out[-1] = 1 << 64
    return tuple(out)


def _table(dist):
    """``(keys, thresholds)`` for a Distribution, cached on the object."""
    thr = dist._thr
    if thr is None:
        keys = tuple(dist)
        thr = dist._thr = (keys, _thresholds(dist[k] for k in keys) if len(keys) > 1 else None)
    return thr


def _draw(table, rng):
    keys, thr = table
    if thr is None:
        return keys[0]
    x = rng.next()
    for k, t in zip(keys, thr):
        if x < t:
            return k
    return keys[-1]


class SimulationError(DomainError):
    def __init__(self, msg, history):
        self.history = tuple(history)
        super().__init__(f"{msg} after history {' '.join(map(str, self.history))}")


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    episodes: int = 1000
    horizon: int = 1000

    def __post_init__(self):
        if self.episodes < 1 or self.horizon < 1:
            raise DomainError("episodes and horizon must be at least 1")


@dataclass
class SimReport:
    config: SimConfig
    terminal_payoff_mean: float
    absorbed_fraction: float
    state_occupancy: dict
    color_frequencies: dict
    area_occupancy: dict = field(default_factory=dict)
    settle_frequency: dict = field(default_factory=dict)

    def lines(self):
        out = [f"episodes {self.config.episodes} horizon {self.config.horizon} seed {self.config.seed}",
               f"terminal_payoff_mean {self.terminal_payoff_mean:.6f}",
               f"absorbed_fraction {self.absorbed_fraction:.6f}"]
        out += [f"state_occupancy {q} {x:.6f}" for q, x in self.state_occupancy.items()]
        out += [f"color_frequency {c} {x:.6f}" for c, x in self.color_frequencies.items()]
        out += [f"area_occupancy {u} {x:.6f}" for u, x in self.area_occupancy.items()]
        out += [f"settle_frequency {u} {x:.6f}" for u, x in self.settle_frequency.items()]
        return out


def _session(strategy, arena):
    """Stateful per-episode callable ``q -> Distribution`` for any strategy kind."""
    if isinstance(strategy, GluedStrategy):
        try:
            strategy = strategy.flatten()
        except DomainError:
            pass
    if isinstance(strategy, PositionalStrategy):
        return strategy.act.__getitem__
    if isinstance(strategy, FiniteMemoryStrategy):
        sk = strategy.skeleton
        amap = strategy.action_map
        color = arena.color
        mem = [sk.init]

        def step(q):
            m = mem[0] = sk.step(mem[0], color[q])
            return amap[(m, q)]

        return step
    if isinstance(strategy, ProgrammaticStrategy):
        return strategy.session()
    hist = []

    def generic(q):
        hist.append(q)
        return strategy.play(arena, tuple(hist))

    return generic


def _validated(d, q, acts, who, hist):
    if not isinstance(d, Distribution):
        try:
            d = Distribution(d)
        except (DomainError, TypeError, ValueError) as e:
            raise SimulationError(f"player {who} returned an invalid distribution ({e})", hist) from None
    bad = [a for a in d if a not in acts[q]]
    if bad:
        raise SimulationError(f"player {who} played unavailable actions {bad} at {q}", hist)
    return d


def binomial_band(p, n, k=3):
    """Half-width of the ``k`` standard deviation band of a binomial frequency."""
    p = float(p)
    return k * sqrt(p * (1 - p) / n)


def simulate(game, sA, sB, start, cfg=None, v=None, trace=None):
    """Play ``cfg.episodes`` seeded episodes of ``cfg.horizon`` steps from ``start``.

    ``v`` (optional) labels states with value areas for the occupancy and
    settle statistics.  ``trace`` (optional) is a writable text stream that
    receives one tab-separated line per step: episode, step, state, A's
    action, B's action, Nature state, next state.
    """
    cfg = cfg or SimConfig()
    arena = game.arena
    if start not in arena.color:
        raise DomainError(f"unknown start state {start}")
    states = arena.states
    color = arena.color
    terminal = arena.terminal
    delta = arena.delta
    ntab = {d: _table(Distribution(dist, check=False)) for d, dist in arena.nature.items()}
    H = cfg.horizon
    tail_from = H // 2 + 1
    tail_len = H - tail_from + 1
    area_of = dict(v) if v is not None else None

    visits = dict.fromkeys(states, 0)
    tail_visits = dict.fromkeys(states, 0)
    payoff = Fraction(0)
    absorbed = 0
    settled = {}
    acts_a, acts_b = arena.actions_a, arena.actions_b
    for e in range(cfg.episodes):
        x = episode_seed(cfg.seed, e)
        sa = _session(sA, arena)
        sb = _session(sB, arena)
        last_a, last_b = {}, {}
        hist = []
        q = start
        tail_areas = set()
        t = 1
        while t <= H:
            if q in terminal:
                if trace is not None:
                    a, b = acts_a[q][0], acts_b[q][0]
                    d = delta[(q, a, b)]
                    for t2 in range(t, H + 1):
                        trace.write(f"{e}\t{t2}\t{q}\t{a}\t{b}\t{d}\t{q}\n")
                rest = H - t + 1
                visits[q] += rest
                k = H - max(t, tail_from) + 1
                tail_visits[q] += k
                if area_of is not None:
                    tail_areas.add(area_of[q])
                break
            hist.append(q)
            da = sa(q)
            if last_a.get(q) is not da:
                da = _validated(da, q, acts_a, "A", hist)
                last_a[q] = da
            db = sb(q)
            if last_b.get(q) is not db:
                db = _validated(db, q, acts_b, "B", hist)
                last_b[q] = db
            keys, thr = da._thr or _table(da)
            if thr is None:
                a = keys[0]
            else:
                x ^= x >> 12
                x ^= (x << 25) & MASK
                x ^= x >> 27
                r = (x * MULT) & MASK
                i = 0
                while r >= thr[i]:
                    i += 1
                a = keys[i]
            keys, thr = db._thr or _table(db)
            if thr is None:
                b = keys[0]
            else:
                x ^= x >> 12
                x ^= (x << 25) & MASK
                x ^= x >> 27
                r = (x * MULT) & MASK
                i = 0
                while r >= thr[i]:
                    i += 1
                b = keys[i]
            d = delta[(q, a, b)]
            keys, thr = ntab[d]
            if thr is None:
                q2 = keys[0]
            else:
                x ^= x >> 12
                x ^= (x << 25) & MASK
                x ^= x >> 27
                r = (x * MULT) & MASK
                i = 0
                while r >= thr[i]:
                    i += 1
                q2 = keys[i]
            if trace is not None:
                trace.write(f"{e}\t{t}\t{q}\t{a}\t{b}\t{d}\t{q2}\n")
            q = q2
            visits[q] += 1
            if t >= tail_from:
                tail_visits[q] += 1
                if area_of is not None:
                    tail_areas.add(area_of[q])
            t += 1
        if q in terminal:
            absorbed += 1
            payoff += terminal[q]
        if area_of is not None and len(tail_areas) == 1:
            u = next(iter(tail_areas))
            settled[u] = settled.get(u, 0) + 1

    n = cfg.episodes
    state_occ = {q: tail_visits[q] / (n * tail_len) for q in states}
    col = {}
    for q in states:
        col[color[q]] = col.get(color[q], 0) + visits[q]
    color_freq = {c: x / (n * H) for c, x in col.items()}
    area_occ, settle = {}, {}
    if area_of is not None:
        for u in sorted(set(area_of.values())):
            area_occ[u] = sum(tail_visits[q] for q in states if area_of[q] == u) / (n * tail_len)
            settle[u] = settled.get(u, 0) / n
    return SimReport(cfg, float(payoff / n), absorbed / n, state_occ, color_freq, area_occ, settle)
