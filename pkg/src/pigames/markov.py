"""Exact analysis of finite Markov chains.

A chain is given as ``{node: {successor: probability}}`` over hashable
nodes; iteration order of the mapping fixes every output order.
"""

from fractions import Fraction

import networkx as nx

from .linalg import solve_square, solve_unique

__all__ = ["bottom_sccs", "absorption_probabilities", "stationary_distribution", "reachable"]

ZERO = Fraction(0)
ONE = Fraction(1)


def reachable(succ, start):
    """Nodes reachable from ``start`` in discovery (BFS) order."""
    seen = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for x in frontier:
            for y in succ[x]:
                if y not in seen:
                    seen[y] = None
                    nxt.append(y)
        frontier = nxt
    return list(seen)


def _graph(P):
    g = nx.DiGraph()
    g.add_nodes_from(P)
    for x, row in P.items():
        g.add_edges_from((x, y) for y, p in row.items() if p)
    return g


def bottom_sccs(P):
    """Bottom strongly connected components, each a list in ``P``'s order."""
    order = {x: i for i, x in enumerate(P)}
    out = []
    for comp in nx.strongly_connected_components(_graph(P)):
        if all(y in comp for x in comp for y, p in P[x].items() if p):
            out.append(sorted(comp, key=order.__getitem__))
    out.sort(key=lambda c: order[c[0]])
    return out


def absorption_probabilities(P, bsccs):
    """``{node: [prob of ending in bscc i]}`` for every node of ``P``."""
    where = {}
    for i, comp in enumerate(bsccs):
        for x in comp:
            where[x] = i
    k = len(bsccs)
    transient = [x for x in P if x not in where]
    result = {}
    for x, i in where.items():
        row = [ZERO] * k
        row[i] = ONE
        result[x] = row
    if transient:
        index = {x: t for t, x in enumerate(transient)}
        n = len(transient)
        A = [[ZERO] * n for _ in range(n)]
        B = [[ZERO] * k for _ in range(n)]
        for x in transient:
            t = index[x]
            A[t][t] += ONE
            for y, p in P[x].items():
                if y in index:
                    A[t][index[y]] -= p
                else:
                    B[t][where[y]] += p
        X = solve_square(A, B)
        for x in transient:
            result[x] = list(X[index[x]])
    return result


def stationary_distribution(P, comp):
    """Stationary distribution of the irreducible chain ``P`` restricted to ``comp``."""
    n = len(comp)
    index = {x: i for i, x in enumerate(comp)}
    # rows: balance equations pi (P - I) = 0, then normalization
    A = [[ZERO] * n for _ in range(n)]
    for x in comp:
        i = index[x]
        A[i][i] -= ONE
        for y, p in P[x].items():
            A[index[y]][i] += p
    A.append([ONE] * n)
    b = [ZERO] * n + [ONE]
    pi = solve_unique(A, b)
    if pi is None:
        raise ValueError("component is not irreducible")
    return dict(zip(comp, pi))
