"""Exact analysis of finite Markov decision processes controlled by one player.

An MDP is ``{node: [(label, {successor: probability}), ...]}``.  The
controller maximizes; callers that model a minimizing opponent phrase the
problem as maximizing the opponent's gain.
"""

from fractions import Fraction

import networkx as nx

from .linalg import solve_square
from .lp import linprog

__all__ = ["maximal_end_components", "losing_region", "min_mean_payoff", "max_reach_reward"]

ZERO = Fraction(0)
ONE = Fraction(1)


def maximal_end_components(mdp, nodes=None):
    """MECs of ``mdp`` restricted to ``nodes``.

    Returns a list of ``(members, {node: [action indices]})`` pairs, where
    the indexed actions keep the play inside the component.
    """
    nodes = set(mdp if nodes is None else nodes)
    avail = {x: [i for i, (_, d) in enumerate(mdp[x]) if all(y in nodes for y in d)] for x in nodes}
    order = {x: i for i, x in enumerate(mdp)}
    while True:
        # drop nodes without actions until stable
        dead = [x for x, acts in avail.items() if not acts]
        while dead:
            for x in dead:
                del avail[x]
            alive = avail.keys()
            avail = {x: [i for i in acts if all(y in alive for y in mdp[x][i][1])] for x, acts in avail.items()}
            dead = [x for x, acts in avail.items() if not acts]
        g = nx.DiGraph()
        g.add_nodes_from(avail)
        for x, acts in avail.items():
            for i in acts:
                g.add_edges_from((x, y) for y in mdp[x][i][1])
        comp_of = {}
        comps = list(nx.strongly_connected_components(g))
        for c, comp in enumerate(comps):
            for x in comp:
                comp_of[x] = c
        new = {x: [i for i in acts if all(comp_of[y] == comp_of[x] for y in mdp[x][i][1])] for x, acts in avail.items()}
        if new == avail:
            out = []
            for comp in comps:
                members = sorted(comp, key=order.__getitem__)
                out.append((members, {x: avail[x] for x in members}))
            out.sort(key=lambda mc: order[mc[0][0]])
            return out
        avail = new


def min_mean_payoff(mdp, mec, reward):
    """Least long-run average of ``reward`` the controller can force in a MEC.

    Solves ``max g`` subject to ``g + h(s) <= reward(s) + sum_t p(t) h(t)``
    for every internal action; in a communicating MDP this is the optimal
    minimal gain, independent of the start node.
    """
    members, avail = mec
    idx = {x: i + 1 for i, x in enumerate(members)}
    nvar = len(members) + 1
    A, b = [], []
    for x in members:
        for a in avail[x]:
            row = [ZERO] * nvar
            row[0] = ONE
            row[idx[x]] += ONE
            for y, p in mdp[x][a][1].items():
                row[idx[y]] -= p
            A.append(row)
            b.append(reward[x])
    c = [ONE] + [ZERO] * len(members)
    res = linprog(c, A_ub=A, b_ub=b, maximize=True, free=range(nvar))
    return res.x[0]


def losing_region(mdp, color, objective, exclude=()):
    """Nodes of end components in which the controller falsifies ``objective`` a.s.

    ``color`` maps nodes to colors; ``exclude`` nodes (absorbing payoff
    states) never belong to an end component here.
    """
    base = [x for x in mdp if x not in exclude]
    region = set()
    kind = objective.kind
    if kind in ("parity", "buchi", "cobuchi"):
        for c in sorted(set(color[x] for x in base)):
            if c % 2 == 0:
                continue
            sub = [x for x in base if color[x] <= c]
            for members, _ in maximal_end_components(mdp, sub):
                if any(color[x] == c for x in members):
                    region.update(members)
    elif kind == "genbuchi":
        for s in objective.sets:
            sub = [x for x in base if color[x] not in s]
            for members, _ in maximal_end_components(mdp, sub):
                region.update(members)
    else:
        reward = {x: Fraction(color[x]) for x in base}
        for mec in maximal_end_components(mdp, base):
            if min_mean_payoff(mdp, mec, reward) < objective.threshold:
                region.update(mec[0])
    return region


def _can_reach(mdp, targets):
    rev = {x: set() for x in mdp}
    for x, acts in mdp.items():
        for _, d in acts:
            for y, p in d.items():
                if p:
                    rev[y].add(x)
    seen = set(targets)
    stack = list(targets)
    while stack:
        y = stack.pop()
        for x in rev[y]:
            if x not in seen:
                seen.add(x)
                stack.append(x)
    return seen


def max_reach_reward(mdp, reward):
    """Maximal expected reward collected on absorption in a target node.

    ``reward`` maps target nodes to nonnegative rewards; runs that never
    reach a target collect nothing.  Non-target end components are
    collapsed so that policy iteration only meets nonsingular systems.
    """
    values = {x: ZERO for x in mdp}
    for t, r in reward.items():
        values[t] = r
    positive = [t for t, r in reward.items() if r > 0]
    live = _can_reach(mdp, positive) - set(reward)
    if not live:
        return values
    others = [x for x in mdp if x not in reward]
    rep = {x: x for x in others}
    members_of = {x: [x] for x in others}
    for members, _ in maximal_end_components(mdp, others):
        head = members[0]
        for x in members:
            rep[x] = head
        members_of[head] = members
    heads = [x for x in mdp if x in live and rep[x] == x]
    # quotient actions: everything leaving the collapsed block
    qacts = {}
    for h in heads:
        block = set(members_of[h])
        acts = []
        for x in members_of[h]:
            for _, d in mdp[x]:
                if any(y not in block for y in d):
                    merged = {}
                    for y, p in d.items():
                        key = rep.get(y, y)
                        merged[key] = merged.get(key, ZERO) + p
                    acts.append(merged)
        qacts[h] = acts
    index = {h: i for i, h in enumerate(heads)}
    n = len(heads)

    def const(y):
        return reward.get(y, ZERO)

    policy = {h: 0 for h in heads}
    while True:
        A = [[ZERO] * n for _ in range(n)]
        B = [[ZERO] for _ in range(n)]
        for h in heads:
            i = index[h]
            A[i][i] += ONE
            for y, p in qacts[h][policy[h]].items():
                if y in index:
                    A[i][index[y]] -= p
                else:
                    B[i][0] += p * const(y)
        X = solve_square(A, B)
        val = {h: X[index[h]][0] for h in heads}

        def q_value(d):
            return sum((p * (val[y] if y in val else const(y)) for y, p in d.items()), ZERO)

        changed = False
        for h in heads:
            best = q_value(qacts[h][policy[h]])
            for j, d in enumerate(qacts[h]):
                qv = q_value(d)
                if qv > best:
                    best, policy[h] = qv, j
                    changed = True
        if not changed:
            break
    for x in others:
        h = rep[x]
        if h in val:
            values[x] = val[h]
    return values
