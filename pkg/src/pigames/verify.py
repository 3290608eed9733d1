"""Exact product-chain analysis, the subgame-optimality checker and the
slice-and-glue synthesis pipeline.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from .core import DomainError, Distribution, point, uniform
from .markov import absorption_probabilities, bottom_sccs, reachable, stationary_distribution
from .strategies import (
    PositionalStrategy,
    default_fallback,
    finite_choice_set,
    glue,
    history_nodes,
    is_locally_optimal,
    relevant_states,
    witness_history,
)
from .transform import build_gu, build_gu_tb, build_gw
from .valuation import check_fixpoint, mdp_best_response, value_areas

__all__ = [
    "ProductChain",
    "ChainAnalysis",
    "product_chain",
    "analyze",
    "positional_opponents",
    "describe_opponent",
    "SettlingReport",
    "check_settling",
    "check_convex_comb",
    "SubgameReport",
    "check_subgame_optimal",
    "PipelineResult",
    "UndecidedError",
    "transfer_pipeline",
    "positional_winner",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class UndecidedError(RuntimeError):
    """The search budget ran out before a decision was reached."""


@dataclass
class ProductChain:
    nodes: list
    P: dict
    initial: object


def _fm(s):
    return s.as_finite_memory() if hasattr(s, "as_finite_memory") else s


def _start(game, sa, sb, q):
    c = game.arena.color[q]
    return (q, sa.skeleton.step(sa.skeleton.init, c), sb.skeleton.step(sb.skeleton.init, c))


def _closure(game, sa, sb, starts):
    arena = game.arena
    ska, skb = sa.skeleton, sb.skeleton
    P = {}
    frontier = list(starts)
    for x in starts:
        P.setdefault(x, None)
    while frontier:
        nxt = []
        for node in frontier:
            q, ma, mb = node
            if q in arena.terminal:
                row = {node: ONE}
            else:
                row = {}
                for a, pa in sa.action(ma, q).items():
                    for b, pb in sb.action(mb, q).items():
                        w = pa * pb
                        for q2, p in arena.nature[arena.delta[(q, a, b)]].items():
                            c = arena.color[q2]
                            key = (q2, ska.step(ma, c), skb.step(mb, c))
                            row[key] = row.get(key, ZERO) + w * p
            P[node] = row
            for y in row:
                if y not in P:
                    P[y] = None
                    nxt.append(y)
        frontier = nxt
    return P


def product_chain(game, sA, sB, start, start_node=None):
    """Markov chain of the game under two finite-memory strategies.

    Nodes are ``(state, A-memory, B-memory)`` with memories already updated
    by the color of the state.  ``start_node`` overrides the fresh start.
    """
    sa, sb = _fm(sA), _fm(sB)
    init = start_node if start_node is not None else _start(game, sa, sb, start)
    P = _closure(game, sa, sb, [init])
    return ProductChain(list(P), P, init)


@dataclass
class ChainAnalysis:
    bsccs: list
    reach_prob: dict  # node -> list aligned with bsccs
    objective_in_bscc: list  # True/False, or the payoff for terminal components
    bscc_area: list  # value area of each component, None if it straddles areas
    settle_mass: dict  # u -> probability from the initial node
    value: Fraction  # expected outcome from the initial node

    def settle_total(self):
        return sum(self.settle_mass.values(), ZERO)


def _bscc_verdict(game, P, comp):
    arena = game.arena
    states = [x[0] for x in comp]
    if len(comp) == 1 and states[0] in arena.terminal:
        return arena.terminal[states[0]]
    obj = game.objective
    colors = {arena.color[q] for q in states}
    if obj.kind == "meanpayoff":
        pi = stationary_distribution(P, comp)
        mean = sum((p * Fraction(arena.color[x[0]]) for x, p in pi.items()), ZERO)
        return obj.accepts(colors, mean)
    return obj.accepts(colors)


def analyze(chain, game, v):
    """BSCCs, absorption probabilities, objective per BSCC and settling mass."""
    P = chain.P
    comps = bottom_sccs(P)
    reach = absorption_probabilities(P, comps)
    verdicts = [_bscc_verdict(game, P, c) for c in comps]
    area_of = []
    for comp in comps:
        us = {v[x[0]] for x in comp}
        area_of.append(us.pop() if len(us) == 1 else None)
    row = reach[chain.initial]
    if sum(row, ZERO) != 1:
        raise AssertionError("absorption probabilities do not sum to 1")
    settle = {}
    for i, u in enumerate(area_of):
        if u is not None and row[i]:
            settle[u] = settle.get(u, ZERO) + row[i]
    value = sum((p * Fraction(verdicts[i]) for i, p in enumerate(row)), ZERO)
    return ChainAnalysis(comps, reach, verdicts, area_of, settle, value)


def positional_opponents(game):
    """All deterministic positional B strategies, in lexicographic product order."""
    arena = game.arena
    qs = [q for q in arena.nonterminal_states]
    for choice in product(*(arena.actions_b[q] for q in qs)):
        yield PositionalStrategy({q: point(b) for q, b in zip(qs, choice)}, player="B")


def describe_opponent(game, opp):
    if not isinstance(opp, PositionalStrategy):
        return getattr(opp, "name", "finite-memory opponent")
    arena = game.arena
    multi = [q for q in arena.nonterminal_states if len(arena.actions_b[q]) > 1]
    picks = {q: next(iter(opp.act[q])) for q in multi}
    names = set(picks.values())
    if len(names) == 1:
        return "always " + names.pop()
    if not multi:
        return "no choice"
    return ",".join(f"{q}:{b}" for q, b in picks.items())


def _family(game, opponents):
    if opponents is None or opponents == "positional-exhaustive":
        opps = list(positional_opponents(game))
        return opps, f"all {len(opps)} deterministic positional opponents"
    opps = list(opponents)
    return opps, f"{len(opps)} supplied opponents"


@dataclass
class SettlingReport:
    ok: bool
    cases: int
    deficits: list = field(default_factory=list)  # (opponent, start, mass, straddling bscc)
    locally_optimal: bool = True


def check_settling(game, v, sA, opponents=None, starts=None):
    """Check that every play settles in a single value area almost surely.

    This is guaranteed for locally optimal strategies; for other strategies
    the report may list deficits, each with a component straddling areas.
    """
    lo = is_locally_optimal(game, v, sA)
    sa = _fm(sA)
    opps, _ = _family(game, opponents)
    starts = game.arena.states if starts is None else starts
    deficits = []
    cases = 0
    for opp in opps:
        for q in starts:
            an = analyze(product_chain(game, sa, opp, q), game, v)
            cases += 1
            total = an.settle_total()
            if total != 1:
                bad = next(c for c, u in zip(an.bsccs, an.bscc_area) if u is None)
                deficits.append((describe_opponent(game, opp), q, total, bad))
    return SettlingReport(not deficits, cases, deficits, lo.ok)


def check_convex_comb(game, v, sA, sB, start):
    """``v(start) <= sum_u u * P[settle in Q_u]``, decided exactly."""
    an = analyze(product_chain(game, sA, sB, start), game, v)
    bound = sum((u * p for u, p in an.settle_mass.items()), ZERO)
    return v[start] <= bound


@dataclass
class SubgameReport:
    verdict: str  # "PASS" or "FAIL"
    failed: tuple = ()  # failing conditions among 1 (local optimality) and 2 (settled areas win)
    family: str = ""
    opponent: str = None
    node: tuple = None
    history: tuple = None
    bscc: list = None
    local: object = None

    @property
    def ok(self):
        return self.verdict == "PASS"

    def lines(self):
        out = [f"verdict {self.verdict}"]
        if self.verdict == "PASS":
            out.append(f"certificate: locally optimal; every settled component wins against {self.family}")
            out.append("completeness: relative to the opponent family only")
            return out
        if 1 in self.failed:
            m, q, b, pay, val = self.local.violations[0]
            out.append(f"condition 1 violated at memory {m} state {q}: column {b} pays {pay} < {val}")
        if 2 in self.failed:
            out.append(f"condition 2 violated against opponent {self.opponent}")
            out.append("history " + " ".join(self.history))
            out.append("component " + " ".join(f"{q}/{ma}/{mb}" for q, ma, mb in self.bscc))
        return out


def _losing_component(game, v, sa, sb, nodes):
    """First BSCC inside a positive area that loses, with a history reaching it."""
    arena = game.arena
    bmem = relevant_states(sb.skeleton, arena.used_colors)
    starts = list(dict.fromkeys((q, ma, sb.skeleton.step(mb, arena.color[q])) for (ma, q) in nodes for mb in bmem))
    P = _closure(game, sa, sb, starts)
    for comp in bottom_sccs(P):
        us = {v[x[0]] for x in comp}
        if len(us) != 1 or us.pop() == 0:
            continue
        if _bscc_verdict(game, P, comp) is not False:
            # winning, or a terminal whose payoff the area already accounts for
            continue
        target = set(comp)
        fresh = [(q, ma, sb.skeleton.step(sb.skeleton.init, arena.color[q])) for (ma, q) in nodes]
        for node in fresh + starts:
            if node in P and target & set(reachable(P, node)):
                return node, witness_history(sa, arena, (node[1], node[0])), comp
    return None


def check_subgame_optimal(game, v, sA, opponents=None):
    """Local optimality plus winning in every settled area, for all histories.

    Histories are represented by product nodes, so checking every BSCC of
    the chain started from all history nodes covers every residual.  Both
    conditions are always evaluated; the first losing component found (in
    opponent order) is the condition-2 witness.
    """
    if not check_fixpoint(game, v).ok:
        raise DomainError("valuation is not an exact fixpoint")
    sa = _fm(sA)
    opps, family = _family(game, opponents)
    lo = is_locally_optimal(game, v, sa)
    failed = [] if lo.ok else [1]
    nodes = history_nodes(sa, game.arena)
    for opp in opps:
        hit = _losing_component(game, v, sa, _fm(opp), nodes)
        if hit is not None:
            node, hist, comp = hit
            return SubgameReport("FAIL", tuple(failed + [2]), family, describe_opponent(game, opp), node, hist, comp, lo)
    if failed:
        return SubgameReport("FAIL", tuple(failed), family, local=lo)
    return SubgameReport("PASS", (), family, local=lo)


def positional_winner(game, candidates=None, budget=100_000):
    """First positional strategy (over the candidate mixes) winning a.s. from everywhere.

    ``candidates`` maps each non-terminal state to a list of distributions;
    default is every pure action.  Returns None when none wins and raises
    :class:`UndecidedError` when the budget runs out first.
    """
    arena = game.arena
    qs = list(arena.nonterminal_states)
    if candidates is None:
        candidates = {q: [point(a) for a in arena.actions_a[q]] for q in qs}
    tried = 0
    for choice in product(*(candidates[q] for q in qs)):
        tried += 1
        if tried > budget:
            raise UndecidedError("undecided within budget")
        s = PositionalStrategy(dict(zip(qs, choice)))
        br = mdp_best_response(game, s)
        if all(x == 1 for x in br.values()):
            return s
    return None


def _support_mixes(names, max_support=None):
    """Uniform mixes over non-empty subsets, smallest supports first."""
    top = len(names) if max_support is None else min(max_support, len(names))
    for r in range(1, top + 1):
        for sub in combinations(names, r):
            yield uniform(sub)


@dataclass
class PipelineResult:
    strategy: object = None
    pieces: dict = field(default_factory=dict)
    slices: dict = field(default_factory=dict)
    certificate: SubgameReport = None
    failing_slice: Fraction = None
    zero_states: tuple = ()
    message: str = ""

    @property
    def ok(self):
        return self.strategy is not None


def _mix_back(vertex_mixes, dist):
    out = {}
    for name, w in dist.items():
        for a, p in vertex_mixes[int(name[1:])].items():
            out[a] = out.get(a, ZERO) + w * p
    return Distribution(out)


def transfer_pipeline(game, v, mode="concurrent", sA=None, budget=20_000, opponents=None, verify=True):
    """Build a subgame optimal strategy slice by slice and glue the pieces.

    ``mode="concurrent"`` searches uniform mixes of optimal polytope
    vertices; ``mode="turn-based"`` uses the finite choice sets of ``sA``.
    Each slice needs a positional strategy that wins almost surely from
    every state of the slice, certified by the exact best response.
    """
    if not check_fixpoint(game, v).ok:
        raise DomainError("valuation is not an exact fixpoint")
    if mode not in ("concurrent", "turn-based"):
        raise DomainError("mode must be 'concurrent' or 'turn-based'")
    if mode == "turn-based" and sA is None:
        raise DomainError("turn-based mode needs a strategy supplying choice sets")
    arena = game.arena
    areas = value_areas(v)
    gw = build_gw(game.objective.alphabet, game.objective)
    gw_win = positional_winner(gw)
    result = PipelineResult()
    spent = 0
    for u in areas.value_set:
        if u == 0:
            continue
        if all(q in arena.terminal for q in areas.areas[u]):
            result.pieces[u] = PositionalStrategy({})
            continue
        if mode == "concurrent":
            sl = build_gu(game, v, u)
            cands = {q: list(_support_mixes(sl.game.arena.actions_a[q])) for q in sl.area if q not in arena.terminal}
        else:
            colors = arena.used_colors
            choice = {q: finite_choice_set(sA, q, colors) for q in areas.areas[u] if q not in arena.terminal}
            sl = build_gu_tb(game, v, u, choice)
            cands = {q: [point(a) for a in sl.game.arena.actions_a[q]] for q in sl.area if q not in arena.terminal}
        result.slices[u] = sl
        sarena = sl.game.arena
        fixed = {}
        for w, w0 in zip(sl.gw_states, gw.arena.states):
            fixed[w] = gw_win.act[w0]
        for q in sarena.nonterminal_states:
            if q not in cands and q not in fixed:
                fixed[q] = point(sarena.actions_a[q][0])
        qs = list(cands)
        found = None
        best_vals = {q: ZERO for q in qs}
        for choice in product(*(cands[q] for q in qs)):
            spent += 1
            if spent > budget:
                result.failing_slice = u
                raise UndecidedError("undecided within budget")
            act = dict(fixed)
            act.update(zip(qs, choice))
            s = PositionalStrategy(act)
            br = mdp_best_response(sl.game, s)
            for q in qs:
                best_vals[q] = max(best_vals[q], br[("-", q)])
            if all(x == 1 for x in br.values()):
                found = s
                break
        if found is None:
            result.failing_slice = u
            result.zero_states = tuple(q for q in qs if best_vals[q] == 0)
            result.message = f"no positional almost-sure winner in slice {u}"
            return result
        piece = {}
        for q in qs:
            d = found.act[q]
            if mode == "concurrent":
                piece[q] = _mix_back(sl.vertex_actions[q], d)
            else:
                piece[q] = Distribution(sl.choice_actions[q][int(next(iter(d))[1:])])
        result.pieces[u] = PositionalStrategy(piece)
    glued = glue(result.pieces, areas, default_fallback(arena))
    result.strategy = glued.flatten()
    if verify:
        result.certificate = check_subgame_optimal(game, v, result.strategy, opponents)
        if not result.certificate.ok:
            result.message = "glued strategy failed verification"
    return result
