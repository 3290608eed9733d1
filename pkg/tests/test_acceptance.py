"""The eleven acceptance criteria, each printing one PASS/FAIL line."""

import glob
import os
import random
import time
from fractions import Fraction as F

import pytest

from generators import (
    caps_value,
    family_size,
    fixpoint_game,
    late_switch,
    local_optimal_b,
    locally_optimal_fm,
    optimal_pure_b,
    rand_matrix,
    random_fm_b,
    terminal_payoff_game,
)
from oracles import value_2x2_closed_form
from pigames import (
    GluedStrategy,
    NormalFormGame,
    Objective,
    PositionalStrategy,
    SimConfig,
    analyze,
    build_gw,
    check_convex_comb,
    check_fixpoint,
    check_settling,
    check_subgame_optimal,
    epsilon_strategy,
    fig2_grid,
    glue,
    is_locally_optimal,
    load_corpus_game,
    load_corpus_strategy,
    load_corpus_values,
    load_game,
    load_valuation,
    mdp_best_response,
    optimal_polytope_vertices,
    point,
    positional_opponents,
    positional_winner,
    product_chain,
    reset_wrapper,
    simulate,
    solve,
    start_node,
    start_values,
    strategy_value,
    transfer_pipeline,
    value_areas,
    value_iteration,
)
from pigames.sim import binomial_band

HERE = os.path.dirname(os.path.abspath(__file__))
TB_FILES = sorted(glob.glob(os.path.join(HERE, "data", "tb", "*.cgame")))


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail=""):
        with capsys.disabled():
            print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'} {detail}".rstrip())
        assert ok, detail

    return emit


def _matrices():
    rng = random.Random(2024)
    out = []
    for i in range(500):
        n, k = rng.randint(1, 6), rng.randint(1, 6)
        den = rng.choice([2, 4, 8, 97])
        out.append(NormalFormGame.from_matrix(rand_matrix(rng, n, k, hi=den, den=den)))
    return out


MATRICES = _matrices()


def _row_payoffs(nf, y):
    return [sum((yj * p for yj, p in zip(y, row)), F(0)) for row in nf.payoff]


def test_criterion_01_matrix_solver_soundness(report):
    t = time.perf_counter()
    bad = []
    for idx, nf in enumerate(MATRICES):
        sol = solve(nf)
        lower = strategy_value(nf, sol.optA)
        upper = max(_row_payoffs(nf, sol.optB))
        # the dual is solved independently as A's problem in the transposed complement
        flipped = NormalFormGame.from_matrix([[1 - nf.payoff[i][j] for i in range(len(nf.rows))]
                                              for j in range(len(nf.cols))])
        dual = 1 - solve(flipped).value
        if not (lower == sol.value == upper == dual):
            bad.append(idx)
        if nf.shape == (2, 2) and value_2x2_closed_form(nf.payoff) != sol.value:
            bad.append(idx)
    elapsed = time.perf_counter() - t
    report(1, not bad and elapsed < 60, f"{len(MATRICES)} matrices, {len(bad)} violations, {elapsed:.1f}s")


def test_criterion_02_vertex_bound(report):
    rng = random.Random(25)
    violations = 0
    combos = 0
    for nf in MATRICES:
        n, k = nf.shape
        verts = optimal_polytope_vertices(nf)
        value = solve(nf).value
        if not verts or len(verts) > n + k:
            violations += 1
        violations += sum(strategy_value(nf, x) != value for x in verts)
        for _ in range(100 if len(verts) > 1 else 1):
            w = [F(rng.randint(0, 12)) for _ in verts]
            if not any(w):
                w[0] = F(1)
            total = sum(w)
            mix = [sum((wi / total * x[i] for wi, x in zip(w, verts)), F(0)) for i in range(n)]
            combos += 1
            violations += strategy_value(nf, mix) != value
    report(2, violations == 0, f"{combos} convex combinations, {violations} violations")


EXACT_CORPUS = ["fig9_reach", "fig9_variant", "fig2_parity", "hide_or_run", "gw_buchi",
                "tb_buchi_ladder", "tb_buchi_fork", "tb_buchi_quarter",
                "tb_cobuchi_pair", "tb_cobuchi_third", "tb_cobuchi_twothirds"]


def test_criterion_03_fixpoint(report):
    tol = F(1, 10**9)
    bad = []
    for seed in range(50):
        g = terminal_payoff_game(seed)
        assert len(g.arena.states) <= 6
        vi = value_iteration(g, tol=tol)
        if not (vi.converged and vi.residual <= tol and check_fixpoint(g, vi.valuation, tol=vi.residual).ok):
            bad.append(seed)
    for name in EXACT_CORPUS:
        g = load_corpus_game(name)
        if not check_fixpoint(g, load_corpus_values(name, g), tol=0).ok:
            bad.append(name)
    report(3, not bad, f"50 random games and {len(EXACT_CORPUS)} corpus games, failures {bad}")


def _sweep_games():
    out = []
    seed = 0
    while len(out) < 100:
        n = 2 + seed % 4
        g, v = fixpoint_game(seed, n=n)
        if family_size(g) <= 512:
            out.append((seed, g, v))
        seed += 1
    return out


SWEEP = _sweep_games()


def test_criterion_04_settling(report):
    bad = []
    cases = 0
    for seed, g, v in SWEEP:
        sa = locally_optimal_fm(seed, g, v)
        assert is_locally_optimal(g, v, sa).ok
        r = check_settling(g, v, sa)
        cases += r.cases
        if not r.ok:
            bad.append(seed)
    report(4, not bad, f"100 games, {cases} (opponent, start) cases, failing seeds {bad}")


def test_criterion_05_convex_bound(report):
    bad = []
    cases = 0
    for seed, g, v in SWEEP:
        sa = locally_optimal_fm(seed, g, v)
        for opp in positional_opponents(g):
            for q in g.arena.states:
                cases += 1
                if not check_convex_comb(g, v, sa, opp, q):
                    bad.append((seed, q))
    equal = 0
    for path in TB_FILES:
        g = load_game(path)
        v = load_valuation(path[:-len(".cgame")] + ".values", g)
        sa = locally_optimal_fm(7, g, v)
        sb = optimal_pure_b(g, v)
        for q in g.arena.states:
            an = analyze(product_chain(g, sa, sb, q), g, v)
            if sum((u * p for u, p in an.settle_mass.items()), F(0)) == v[q]:
                equal += 1
            else:
                bad.append((path, q))
    report(5, not bad, f"{cases} bound cases, {equal} equality cases, violations {bad[:3]}")


def test_criterion_06_fig9_checker(report):
    g = load_corpus_game("fig9_reach")
    v = load_corpus_values("fig9_reach", g)
    uniform = load_corpus_strategy("fig9_uniform", g)
    loopy = load_corpus_strategy("fig9_loopy", g)
    value = start_values(g, loopy)["q0"]
    good = check_subgame_optimal(g, v, uniform)
    bad = check_subgame_optimal(g, v, loopy)
    ok = (value == F(1, 2) and good.ok and not bad.ok and 2 in bad.failed
          and bad.opponent == "always b_left" and "all" in good.family)
    report(6, ok, f"loopy value {value}, loopy {bad.verdict} {bad.failed} vs {bad.opponent}, uniform {good.verdict}")


def _histories(rng, states, count=30, length=6):
    return [tuple(rng.choice(states) for _ in range(rng.randint(1, length))) for _ in range(count)]


def test_criterion_07_pipeline_turn_based(report):
    assert len(TB_FILES) == 20
    rng = random.Random(19)
    bad = []
    for path in TB_FILES:
        g = load_game(path)
        v = load_valuation(path[:-len(".cgame")] + ".values", g)
        assert len(g.arena.states) <= 5
        res = transfer_pipeline(g, v)
        s = res.strategy
        if not (res.ok and isinstance(s, PositionalStrategy) and res.certificate.ok):
            bad.append(os.path.basename(path))
            continue
        if not check_subgame_optimal(g, v, s).ok:
            bad.append(os.path.basename(path))
        areas = value_areas(v)
        fallback = PositionalStrategy({q: s.act[q] for q in g.arena.nonterminal_states if v[q] == 0})
        glued = glue(res.pieces, areas, fallback)
        if not isinstance(glued, GluedStrategy) or not isinstance(glued.flatten(), PositionalStrategy):
            bad.append(os.path.basename(path))
        for h in _histories(rng, g.arena.nonterminal_states):
            if glued.play(g.arena, h) != s.act[h[-1]]:
                bad.append(os.path.basename(path))
                break
    report(7, not bad, f"{len(TB_FILES)} turn-based games, failures {bad}")


def test_criterion_08_gw(report):
    cases = [
        ("buchi", Objective("buchi", (1, 2))),
        ("cobuchi", Objective("cobuchi", (0, 1))),
        ("parity", Objective("parity", (0, 1, 2))),
        ("meanpayoff", Objective("meanpayoff", (F(0), F(1)), threshold=F(1, 2))),
    ]
    details = []
    ok = True
    for name, obj in cases:
        t = time.perf_counter()
        g = build_gw(obj.alphabet, obj)
        s = positional_winner(g)
        good = s is not None and all(x == 1 for x in mdp_best_response(g, s).values())
        elapsed = time.perf_counter() - t
        ok = ok and good and elapsed < 1
        details.append(f"{name} {elapsed * 1000:.0f}ms")
    report(8, ok, ", ".join(details))


def _reset_instances():
    """Twenty games with an optimal finite-memory strategy, non-subgame-optimal ones first."""
    broken, fine = [], []
    seed = 0
    while len(broken) + len(fine) < 60 and len(broken) < 20:
        g, v = fixpoint_game(seed)
        seed += 1
        if family_size(g) > 512:
            continue
        s = late_switch(seed, g, v)
        if start_values(g, s) != v or not caps_value(g, v, local_optimal_b(g, v)):
            continue
        (fine if check_subgame_optimal(g, v, s).ok else broken).append((seed, g, v, s))
    return (broken + fine)[:20]


def test_criterion_09_reset(report):
    inst = _reset_instances()
    assert len(inst) == 20
    bad = []
    broken = 0
    for seed, g, v, s in inst:
        broken += not check_subgame_optimal(g, v, s).ok
        br = mdp_best_response(g, s)
        assert all(br[start_node(s, g.arena, q)] == v[q] for q in g.arena.states)
        if not check_subgame_optimal(g, v, reset_wrapper(g, v, s)).ok:
            bad.append(seed)
    report(9, not bad and broken > 0, f"20 games ({broken} bases not subgame optimal), failures {bad}")


def test_criterion_10_fig2(report):
    g = load_corpus_game("fig2_parity")
    grid = fig2_grid(g)
    zero = sum(mdp_best_response(g, s)[start_node(s, g.arena, "q0")] == 0 for s in grid)
    # k counts rounds ended by a visit to q1; a schedule indexed by q0 visits alone cannot win against both columns
    eps = epsilon_strategy(g, count=("q1",))
    cfg = SimConfig(seed=10, episodes=1000, horizon=10_000)
    occ = []
    for b in g.arena.actions_b["q0"]:
        act = {q: point(g.arena.actions_b[q][0]) for q in g.arena.nonterminal_states}
        act["q0"] = point(b)
        r = simulate(g, eps, PositionalStrategy(act, g.arena, player="B"), "q0", cfg)
        occ.append((b, r.state_occupancy["q2"], r.state_occupancy["q1"]))
    ok = len(grid) == 100 and zero == 100 and all(x < 0.01 and y > 0 for _, x, y in occ)
    report(10, ok, f"{zero}/100 grid strategies worth 0; tail q2/q1 occupancy "
                   + ", ".join(f"vs {b}: {x:.5f}/{y:.5f}" for b, x, y in occ))


def _sim_pairs():
    out = []
    seed = 0
    while len(out) < 10:
        g, v = fixpoint_game(seed)
        seed += 1
        if len(set(v.values())) < 2:
            continue
        sa, sb = locally_optimal_fm(seed, g, v), random_fm_b(seed, g)
        chain = product_chain(g, sa, sb, g.arena.states[0])
        an = analyze(chain, g, v)
        if sum(0 < p < 1 for p in an.settle_mass.values()) >= 2:
            out.append((seed, g, v, sa, sb, an))
    return out


def test_criterion_11_simulator(report):
    n = 10_000
    worst = 0.0
    bad = []
    for seed, g, v, sa, sb, an in _sim_pairs():
        r = simulate(g, sa, sb, g.arena.states[0], SimConfig(seed=seed, episodes=n, horizon=60), v=v)
        for u in set(v.values()):
            p = an.settle_mass.get(u, F(0))
            gap = abs(r.settle_frequency[u] - float(p))
            band = binomial_band(p, n)
            if gap > band:
                bad.append((seed, u))
            elif band:
                worst = max(worst, gap / band * 3)
    report(11, not bad, f"10 pairs, worst deviation {worst:.2f} sigma, outside band {bad}")
