"""Memory transfer: build a positional subgame optimal strategy area by area, or explain why not."""

from pigames import load_corpus_game, load_corpus_values, transfer_pipeline

for name in ("fig9_reach", "tb_buchi_ladder", "hide_or_run"):
    g = load_corpus_game(name)
    v = load_corpus_values(name, g)
    res = transfer_pipeline(g, v)
    print(f"== {name}")
    if res.ok:
        for q in g.arena.nonterminal_states:
            print(f"  {q}: " + " ".join(f"{a}:{p}" for a, p in res.strategy.act[q].items()))
        print(f"  certificate {res.certificate.verdict}")
    else:
        print(f"  no positional winner in slice {res.failing_slice}; states {', '.join(res.zero_states)}")
