from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pigames import (
    Arena,
    DomainError,
    Distribution,
    Game,
    LassoWord,
    Objective,
    PositionalStrategy,
    lasso_in_objective,
    neutral_color,
    path_probability,
    point,
    step_distribution,
    uniform,
    validate_arena,
)


def one_state_arena():
    return Arena(("q",), {"q": 1}, {"q": ("a",)}, {"q": ("b",)}, {"n": {"q": F(1)}}, {("q", "a", "b"): "n"})


def split_arena(cells):
    """2x2 arena at q0 whose four cells go to the given Nature ids."""
    nature = {
        "to1": {"q1": F(1)},
        "to2": {"q2": F(1)},
        "half": {"q1": F(1, 2), "q2": F(1, 2)},
    }
    states = ("q0", "q1", "q2")
    acts_a = {q: ("a1", "a2") for q in states}
    acts_b = {q: ("b1", "b2") for q in states}
    delta = {}
    for q in states:
        for (a, b), d in zip(product(acts_a[q], acts_b[q]), cells):
            delta[(q, a, b)] = d
    return Arena(states, {q: 1 for q in states}, acts_a, acts_b, nature, delta)


def test_distribution_drops_zeros_and_checks_sum():
    d = Distribution({"x": F(1, 2), "y": F(1, 2), "z": 0})
    assert d.support == ("x", "y")
    assert d.get("z") == 0
    with pytest.raises(DomainError):
        Distribution({"x": F(1, 2)})
    with pytest.raises(DomainError):
        Distribution({"x": F(3, 2), "y": F(-1, 2)})
    with pytest.raises(TypeError):
        Distribution({"x": 1.0})


def test_distribution_equality_and_hash():
    assert Distribution({"a": F(1, 3), "b": F(2, 3)}) == Distribution({"b": F(2, 3), "a": F(1, 3)})
    assert hash(point("a")) == hash(Distribution({"a": 1}))
    assert uniform("abc")["b"] == F(1, 3)


def test_validate_minimal_arena():
    assert validate_arena(one_state_arena()) == []


def test_validate_unnormalized():
    a = one_state_arena()
    bad = Arena(a.states, a.color, a.actions_a, a.actions_b, {"n": {"q": F(3, 4)}}, a.delta)
    diags = validate_arena(bad)
    assert any("distribution not normalized" in d for d in diags)


def test_validate_missing_transition():
    a = split_arena(["to1", "to2", "to2", "to1"])
    delta = dict(a.delta)
    del delta[("q0", "a2", "b1")]
    bad = Arena(a.states, a.color, a.actions_a, a.actions_b, a.nature, delta)
    diags = validate_arena(bad)
    assert any("transition undefined" in d and "a2" in d and "b1" in d for d in diags)


def test_validate_terminal_must_absorb():
    a = one_state_arena()
    arena = Arena(("q", "t"), {"q": 1, "t": 1}, {"q": ("a",), "t": ("a",)}, {"q": ("b",), "t": ("b",)},
                  {"n": {"q": F(1)}}, {("q", "a", "b"): "n", ("t", "a", "b"): "n"}, {"t": F(1)})
    assert any("absorbing" in d for d in validate_arena(arena))
    assert validate_arena(a) == []


def test_step_distribution_point_mass():
    a = split_arena(["to1", "to1", "to1", "to1"])
    assert step_distribution(a, "q0", point("a1"), point("b2")) == {"q1": 1}


def test_step_distribution_cell_independent():
    a = split_arena(["half"] * 4)
    out = step_distribution(a, "q0", Distribution({"a1": F(1, 3), "a2": F(2, 3)}), uniform(["b1", "b2"]))
    assert out == {"q1": F(1, 2), "q2": F(1, 2)}


def test_step_distribution_mixed():
    a = split_arena(["to1", "to2", "to2", "to1"])
    out = step_distribution(a, "q0", Distribution({"a1": F(1, 3), "a2": F(2, 3)}), uniform(["b1", "b2"]))
    assert out == {"q1": F(1, 2), "q2": F(1, 2)}


def test_step_distribution_rejects_foreign_actions():
    a = split_arena(["to1"] * 4)
    with pytest.raises(DomainError):
        step_distribution(a, "q0", point("zz"), point("b1"))


def _split_game():
    a = split_arena(["half"] * 4)
    g = Game(a, Objective("buchi", (1, 2)))
    sa = PositionalStrategy({q: uniform(["a1", "a2"]) for q in a.states}, a)
    sb = PositionalStrategy({q: point("b1") for q in a.states}, a, player="B")
    return g, sa, sb


def test_path_probability_examples():
    g, sa, sb = _split_game()
    assert path_probability(g, sa, sb, "q0", ("q0",)) == 1
    assert path_probability(g, sa, sb, "q0", ("q1", "q2")) == 0
    assert path_probability(g, sa, sb, "q0", ("q0", "q1", "q2")) == F(1, 4)


@given(st.lists(st.sampled_from(["q0", "q1", "q2"]), min_size=1, max_size=6))
def test_path_probability_is_product_of_steps(rest):
    g, sa, sb = _split_game()
    path = ("q0",) + tuple(rest)
    expected = F(1)
    for i in range(len(path) - 1):
        expected *= step_distribution(g.arena, path[i], sa.act[path[i]], sb.act[path[i]]).get(path[i + 1])
    assert path_probability(g, sa, sb, "q0", path) == expected


def test_lasso_examples():
    assert lasso_in_objective(LassoWord((1,), (2,)), Objective("buchi", (1, 2)))
    assert not lasso_in_objective(LassoWord((), (1,)), Objective("cobuchi", (0, 1)))
    mp = Objective("meanpayoff", (F(0), F(1)), threshold=F(1, 2))
    assert lasso_in_objective(LassoWord((), (F(0), F(1))), mp)
    with pytest.raises(DomainError):
        lasso_in_objective(LassoWord((), (7,)), Objective("buchi", (1, 2)))


def test_objective_alphabets_enforced():
    with pytest.raises(DomainError):
        Objective("buchi", (0, 1))
    with pytest.raises(DomainError):
        Objective("cobuchi", (1, 2))
    with pytest.raises(DomainError):
        Objective("meanpayoff", (F(0), F(2)), threshold=F(1))


def test_game_rejects_foreign_colors():
    a = one_state_arena()
    with pytest.raises(DomainError):
        Game(Arena(a.states, {"q": 5}, a.actions_a, a.actions_b, a.nature, a.delta), Objective("buchi", (1, 2)))


def test_neutral_color_examples():
    assert neutral_color(Objective("parity", (0, 1, 2)))[0] == 0
    assert neutral_color(Objective("meanpayoff", (F(0), F(1)), threshold=F(1, 2)))[0] == F(1, 2)
    k, obj = neutral_color(Objective("genbuchi", (1, 2), sets=(frozenset({1}), frozenset({2}))))
    assert k == 3 and obj.alphabet == (1, 2, 3)


OBJECTIVES = [
    Objective("parity", (0, 1, 2, 3)),
    Objective("buchi", (1, 2)),
    Objective("cobuchi", (0, 1)),
    Objective("genbuchi", (1, 2, 3), sets=(frozenset({1, 2}), frozenset({3}))),
    Objective("meanpayoff", (F(0), F(1, 4), F(1)), threshold=F(1, 2)),
]


@st.composite
def lassos(draw, objective):
    letters = st.sampled_from(objective.alphabet)
    n = draw(st.integers(1, 8))
    k = draw(st.integers(0, n - 1))
    word = draw(st.lists(letters, min_size=n, max_size=n))
    return LassoWord(tuple(word[:k]), tuple(word[k:]))


def _interleave(seq, k):
    out = []
    for c in seq:
        out += [c, k]
    return tuple(out)


@pytest.mark.parametrize("objective", OBJECTIVES, ids=lambda o: o.kind)
@settings(max_examples=150)
@given(data=st.data())
def test_neutral_color_insertion(objective, data):
    w = data.draw(lassos(objective))
    k, ext = neutral_color(objective)
    w2 = LassoWord(_interleave(w.prefix, k), _interleave(w.cycle, k))
    assert lasso_in_objective(w, ext) == lasso_in_objective(w2, ext)


@pytest.mark.parametrize("objective", OBJECTIVES, ids=lambda o: o.kind)
@settings(max_examples=150)
@given(data=st.data())
def test_lasso_rotation_and_unrolling(objective, data):
    w = data.draw(lassos(objective))
    r = data.draw(st.integers(0, len(w.cycle) - 1))
    rotated = LassoWord(w.prefix + w.cycle[:r], w.cycle[r:] + w.cycle[:r])
    doubled = LassoWord(w.prefix, w.cycle * 2)
    base = lasso_in_objective(w, objective)
    assert lasso_in_objective(rotated, objective) == base
    assert lasso_in_objective(doubled, objective) == base
