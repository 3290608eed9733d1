"""Parity game where every finite-choice strategy is worth 0 yet a vanishing-deviation strategy wins.

Pass a horizon as the first argument; the default keeps the run short.
"""

import sys

from pigames import (
    PositionalStrategy,
    SimConfig,
    epsilon_strategy,
    fig2_grid,
    load_corpus_game,
    mdp_best_response,
    point,
    simulate,
    start_node,
)

horizon = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
g = load_corpus_game("fig2_parity")
worth = {mdp_best_response(g, s)[start_node(s, g.arena, "q0")] for s in fig2_grid(g)}
print(f"values of 100 positional strategies at q0: {sorted(worth)}")

for count, label in ((None, "k = visits to q0"), (("q1",), "k = rounds ended at q1")):
    eps = epsilon_strategy(g, count=count)
    for b in ("left", "right"):
        opp = PositionalStrategy({"q0": point(b), "q1": point("-"), "q2": point("-")}, g.arena, player="B")
        r = simulate(g, eps, opp, "q0", SimConfig(seed=10, episodes=200, horizon=horizon))
        occ = r.state_occupancy
        print(f"{label:24s} vs {b:5s}: tail occupancy q0 {occ['q0']:.4f} q1 {occ['q1']:.4f} q2 {occ['q2']:.4f}")
