"""Optimal but not subgame optimal: the loopy strategy on the reachability game, and its reset repair."""

from pigames import (
    check_subgame_optimal,
    load_corpus_game,
    load_corpus_strategy,
    load_corpus_values,
    reset_wrapper,
    start_values,
)

g = load_corpus_game("fig9_reach")
v = load_corpus_values("fig9_reach", g)
for name in ("fig9_uniform", "fig9_loopy", "fig9_quarter"):
    s = load_corpus_strategy(name, g)
    print(f"== {name}: guarantees {start_values(g, s)['q0']} from q0")
    print("\n".join(check_subgame_optimal(g, v, s).lines()))

fixed = reset_wrapper(g, v, load_corpus_strategy("fig9_loopy", g))
print("== loopy after the reset wrapper")
print("\n".join(check_subgame_optimal(g, v, fixed).lines()))
