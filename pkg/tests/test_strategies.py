import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from generators import fixpoint_game, late_switch, locally_optimal_fm
from pigames import (
    DomainError,
    Distribution,
    FiniteMemoryStrategy,
    GluedStrategy,
    MemorySkeleton,
    PositionalStrategy,
    ProgrammaticStrategy,
    check_fixpoint,
    default_fallback,
    finite_choice_set,
    glue,
    history_nodes,
    is_locally_optimal,
    lift_to_skeleton,
    load_corpus_game,
    load_corpus_strategy,
    load_corpus_values,
    point,
    product_skeleton,
    relevant_states,
    reset_wrapper,
    residual,
    start_values,
    uniform,
    update_star,
    value_areas,
    witness_history,
)

TOGGLE = MemorySkeleton(("even", "odd"), "even", {("even", 2): "odd", ("odd", 2): "even"})


@pytest.fixture
def fig9():
    g = load_corpus_game("fig9_reach")
    return g, load_corpus_values("fig9_reach", g)


def test_skeleton_missing_updates_are_self_loops():
    assert TOGGLE.step("even", 1) == "even"
    assert update_star(TOGGLE, [2, 1, 2, 2]) == "odd"
    assert update_star(TOGGLE, [], start="odd") == "odd"
    assert TOGGLE.colors() == (2,)


def test_skeleton_validation():
    with pytest.raises(DomainError):
        MemorySkeleton(("a",), "b")
    with pytest.raises(DomainError):
        MemorySkeleton(("a",), "a", {("a", 1): "z"})
    sk = MemorySkeleton(("a",), "a", alphabet=(1, 2))
    with pytest.raises(DomainError):
        sk.step("a", 3)


@given(st.lists(st.sampled_from([1, 2]), max_size=20), st.lists(st.sampled_from([1, 2]), max_size=20))
def test_update_star_is_a_fold(u, w):
    assert update_star(TOGGLE, u + w) == update_star(TOGGLE, w, start=update_star(TOGGLE, u))


def test_relevant_states():
    sk = MemorySkeleton(("a", "b", "c"), "a", {("a", 1): "b", ("c", 1): "a"})
    assert relevant_states(sk) == ("a", "b")
    assert relevant_states(sk, colors=(2,)) == ("a",)


def test_positional_validation(fig9):
    g, _ = fig9
    with pytest.raises(DomainError):
        PositionalStrategy({}, g.arena)
    with pytest.raises(DomainError):
        PositionalStrategy({"q0": point("b_left")}, g.arena)
    s = PositionalStrategy({"q0": point("a1")}, g.arena)
    assert s.is_deterministic()
    assert s.play(g.arena, ("q0", "t1")) == point("-")


def test_finite_memory_validation(fig9):
    g, _ = fig9
    with pytest.raises(DomainError):
        FiniteMemoryStrategy(TOGGLE, {("even", "q0"): point("a1")}, g.arena)


def test_loopy_strategy_memory(fig9):
    g, _ = fig9
    s = load_corpus_strategy("fig9_loopy", g)
    assert s.memory_after(g.arena, ("q0",)) == "m1"
    assert s.memory_after(g.arena, ("q0", "q0")) == "m2"
    assert s.play(g.arena, ("q0", "q0", "q0")) == point("a3")
    assert s.play(g.arena, ("q0",)) == uniform(["a1", "a2"])


def test_residual_shifts_memory(fig9):
    g, _ = fig9
    s = load_corpus_strategy("fig9_loopy", g)
    r = residual(s, ("q0",), g.arena)
    assert r.skeleton.init == "m1"
    assert r.play(g.arena, ("q0",)) == point("a3")
    with pytest.raises(DomainError):
        residual(s, (), g.arena)


def test_history_nodes_and_witnesses(fig9):
    g, _ = fig9
    s = load_corpus_strategy("fig9_loopy", g)
    nodes = history_nodes(s, g.arena)
    assert ("m2", "q0") in nodes and ("m1", "q0") in nodes
    for node in nodes:
        h = witness_history(s, g.arena, node)
        assert h[-1] == node[1]
        assert s.memory_after(g.arena, h) == node[0]


@pytest.mark.parametrize("seed", range(10))
def test_witness_histories_replay(seed):
    g, v = fixpoint_game(seed)
    s = late_switch(seed, g, v)
    for node in history_nodes(s, g.arena):
        h = witness_history(s, g.arena, node)
        assert s.memory_after(g.arena, h) == node[0] and h[-1] == node[1]


def test_local_optimality_fig9(fig9):
    g, v = fig9
    good = is_locally_optimal(g, v, load_corpus_strategy("fig9_uniform", g))
    assert good.ok and good.checked == 1
    bad = is_locally_optimal(g, v, load_corpus_strategy("fig9_loopy", g))
    assert not bad.ok
    m, q, b, pay, val = bad.violations[0]
    assert (m, q, b, pay, val) == ("m2", "q0", "b_right", 0, F(1, 2))


@pytest.mark.parametrize("seed", range(10))
def test_generated_fm_strategies_are_locally_optimal(seed):
    g, v = fixpoint_game(seed)
    assert is_locally_optimal(g, v, locally_optimal_fm(seed, g, v)).ok


def test_finite_choice_set(fig9):
    g, _ = fig9
    s = load_corpus_strategy("fig9_quarter", g)
    choices = finite_choice_set(s, "q0", g.arena.used_colors)
    assert choices == [Distribution({"a1": F(1, 4), "a2": F(1, 4), "a3": F(1, 2)}), point("a3")]


def test_programmatic_strategy_forms():
    count = ProgrammaticStrategy(fn=lambda h: point("a1") if len(h) % 2 else point("a2"))
    assert count.play(None, ("q",)) == point("a1")
    sess = count.session()
    assert [sess("q"), sess("q")] == [point("a1"), point("a2")]

    def observer():
        seen = [0]

        def step(q):
            seen[0] += 1
            return point("a1") if seen[0] % 2 else point("a2")

        return step

    obs = ProgrammaticStrategy(observer=observer)
    assert obs.play(None, ("q", "q", "q")) == point("a1")
    with pytest.raises(DomainError):
        ProgrammaticStrategy()
    with pytest.raises(DomainError):
        ProgrammaticStrategy(fn=len, observer=observer)


def _areas_game():
    g, v = fixpoint_game(5)
    return g, v


def test_glue_longest_suffix_semantics():
    g, v = _areas_game()
    areas = value_areas(v)
    arena = g.arena
    update = {}
    for c in g.objective.alphabet:
        update[("start", c)] = "first"
        update[("first", c)] = "later"
    seq = MemorySkeleton(("start", "first", "later"), "start", update)
    pieces = {}
    for u in areas.value_set:
        if u == 0:
            continue
        amap = {}
        for q in arena.nonterminal_states:
            acts = arena.actions_a[q]
            amap[("start", q)] = amap[("first", q)] = point(acts[0])
            amap[("later", q)] = point(acts[-1])
        pieces[u] = FiniteMemoryStrategy(seq, amap)
    fb = default_fallback(arena)
    glued = glue(pieces, areas, fb)
    value_of = {q: x for x, qs in areas.areas.items() for q in qs}
    rng = random.Random(1)
    for _ in range(200):
        h = tuple(rng.choice(arena.nonterminal_states) for _ in range(rng.randint(1, 6)))
        q = h[-1]
        u = value_of[q]
        if u == 0:
            assert glued.play(arena, h) == fb.act[q]
            continue
        k = len(h)
        while k > 0 and value_of[h[k - 1]] == u:
            k -= 1
        fresh = len(h) - k == 1
        want = arena.actions_a[q][0] if fresh else arena.actions_a[q][-1]
        assert glued.play(arena, h) == point(want)
    with pytest.raises(DomainError):
        glued.flatten()


def test_glue_requires_every_positive_area():
    g, v = _areas_game()
    areas = value_areas(v)
    with pytest.raises(DomainError):
        glue({}, areas, default_fallback(g.arena))


def test_glue_positional_flattens_to_positional():
    g, v = _areas_game()
    areas = value_areas(v)
    arena = g.arena
    rng = random.Random(3)
    pieces = {}
    for u in areas.value_set:
        if u:
            pieces[u] = PositionalStrategy({q: point(rng.choice(arena.actions_a[q]))
                                            for q in areas.areas[u] if q in arena.nonterminal_states})
    glued = glue(pieces, areas, default_fallback(arena))
    assert isinstance(glued, GluedStrategy)
    flat = glued.flatten()
    assert isinstance(flat, PositionalStrategy)
    for _ in range(100):
        h = tuple(rng.choice(arena.nonterminal_states) for _ in range(rng.randint(1, 5)))
        assert glued.play(arena, h) == flat.act[h[-1]]


def test_product_skeleton_and_lift():
    other = MemorySkeleton(("x", "y"), "x", {("x", 1): "y"})
    prod = product_skeleton(TOGGLE, other)
    assert prod.init == ("even", "x")
    word = [1, 2, 2, 1, 2]
    assert update_star(prod, word) == (update_star(TOGGLE, word), update_star(other, word))
    s = FiniteMemoryStrategy(TOGGLE, {("even", "q"): point("a"), ("odd", "q"): point("b")})
    lifted = lift_to_skeleton(s, prod, 0)
    for m in prod.memories:
        assert lifted.action(m, "q") == s.action(m[0], "q")
    pos = lift_to_skeleton(PositionalStrategy({"q": point("c")}), prod, 1)
    assert all(pos.action(m, "q") == point("c") for m in prod.memories)


def test_reset_wrapper_fig9(fig9):
    g, v = fig9
    loopy = load_corpus_strategy("fig9_loopy", g)
    w = reset_wrapper(g, v, loopy)
    assert w.action("m2", "q0") == uniform(["a1", "a2"])
    assert w.skeleton == loopy.skeleton
    assert is_locally_optimal(g, v, w).ok
    assert start_values(g, w)["q0"] == F(1, 2)


def test_reset_wrapper_needs_fixpoint(fig9):
    g, v = fig9
    with pytest.raises(DomainError):
        reset_wrapper(g, dict(v, q0=F(1, 3)), load_corpus_strategy("fig9_loopy", g))


def test_reset_wrapper_needs_optimal_base(fig9):
    g, v = fig9
    assert check_fixpoint(g, v).ok
    bad = PositionalStrategy({"q0": point("a3")}, g.arena)
    with pytest.raises(DomainError):
        reset_wrapper(g, v, bad)
