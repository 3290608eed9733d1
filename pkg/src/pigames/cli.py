"""Command-line interface.

Exit codes: 0 on success or a passed check, 1 when a check fails (or a
search is undecided within its budget), 2 on usage or parse errors.
Reports go to standard output, one line per record; ``--format
json-lines`` prints the same records as JSON objects.
"""

import argparse
import json
import os
import sys
from fractions import Fraction

from .core import DomainError, Objective
from .corpus import CORPUS, corpus_path, resolve_game_path
from .formats import (
    ParseError,
    parse_game,
    parse_rational,
    parse_strategy,
    parse_valuation,
    serialize_game,
    serialize_strategy,
)
from .matgame import NormalFormGame, format_mixed, optimal_polytope_vertices, solve
from .sim import SimConfig, simulate
from .strategies import (
    PositionalStrategy,
    default_fallback,
    finite_choice_set,
    glue,
    is_locally_optimal,
    reset_wrapper,
)
from .transform import build_gu, build_gu_tb, build_gw
from .valuation import check_fixpoint, mdp_best_response, start_node, value_areas, value_iteration
from .verify import UndecidedError, check_subgame_optimal, transfer_pipeline

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


class Output:
    """Collects records; each has a text line and the same fields as a dict."""

    def __init__(self, fmt):
        self.fmt = fmt
        self.records = []

    def add(self, text, **fields):
        self.records.append((text, fields))

    def artifact(self, kind, text, out=None):
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
            self.add(f"wrote {kind} to {out}", kind=kind, path=out)
        elif self.fmt == "text":
            for line in text.rstrip("\n").split("\n"):
                self.records.append((line, None))
        else:
            self.add("", kind=kind, text=text)

    def emit(self, stream):
        for text, fields in self.records:
            if self.fmt == "text":
                stream.write(text + "\n")
            elif fields is not None:
                stream.write(json.dumps({k: _jsonable(v) for k, v in fields.items()}) + "\n")


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return x


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(str(e)) from None


def _matrix(text):
    try:
        rows = [[Fraction(x) for x in row.split(",")] for row in text.split(";")]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad matrix {text!r}; expected rows like '1,0;0,1'") from None
    return NormalFormGame.from_matrix(rows)


def _game(args):
    if not args.game:
        raise UsageError("--game is required")
    try:
        path = resolve_game_path(args.game)
    except DomainError as e:
        raise UsageError(str(e)) from None
    args._game_path = path
    return parse_game(_read(path))


def _strategy_path(arg):
    if os.path.exists(arg):
        return arg
    name = os.path.basename(arg)
    for cand in (name, name.removesuffix(".cstrat")):
        for base in (cand, f"fig9_{cand}"):
            try:
                return corpus_path(base, "cstrat")
            except DomainError:
                pass
    raise UsageError(f"no such strategy file: {arg}")


def _strategies(args, game, need=1):
    paths = args.strategy or []
    if len(paths) < need:
        raise UsageError(f"this command needs {need} --strategy argument(s)")
    return [parse_strategy(_read(_strategy_path(p)), game) for p in paths]


def _valuation(args, game):
    if args.value_file:
        return parse_valuation(_read(args.value_file), game)
    base = getattr(args, "_game_path", "")
    guess = os.path.splitext(base)[0] + ".values"
    if base and os.path.exists(guess):
        return parse_valuation(_read(guess), game)
    raise UsageError("--value-file is required")


def _u(args):
    if args.value is None:
        raise UsageError("--value is required")
    return parse_rational(args.value)


def _tol(args, default=Fraction(0)):
    return parse_rational(args.tol) if args.tol is not None else default


def cmd_solve_matrix(args, out):
    if not args.matrix:
        raise UsageError("--matrix is required")
    nf = _matrix(args.matrix)
    sol = solve(nf)
    out.add(f"value {sol.value}; optA: {format_mixed(sol.optA)}; optB: {format_mixed(sol.optB)}",
            value=sol.value, optA=list(sol.optA), optB=list(sol.optB))
    return 0


def cmd_vertices(args, out):
    if not args.matrix:
        raise UsageError("--matrix is required")
    nf = _matrix(args.matrix)
    sol = solve(nf)
    verts = optimal_polytope_vertices(nf)
    out.add(f"value {sol.value}; vertices: " + " ".join(format_mixed(x) for x in verts),
            value=sol.value, vertices=[list(x) for x in verts])
    return 0


def cmd_solve(args, out):
    game = _game(args)
    res = value_iteration(game, args.mode or "least", tol=_tol(args, Fraction(1, 10**9)))
    for q, x in res.valuation.items():
        out.add(f"{q} {x} ~ {float(x):.9f}", state=q, value=x, approx=float(x))
    out.add(f"iterations {res.iterations} residual {float(res.residual):.3e} converged {res.converged}",
            iterations=res.iterations, residual=res.residual, converged=res.converged)
    return 0 if res.converged else 1


def cmd_check_fixpoint(args, out):
    game = _game(args)
    v = _valuation(args, game)
    rep = check_fixpoint(game, v, _tol(args))
    for q, claimed, local, ok in rep.rows:
        out.add(f"{q} claimed {claimed} local {local} {'ok' if ok else 'FAIL'}",
                state=q, claimed=claimed, local=local, ok=ok)
    out.add(f"verdict {'PASS' if rep.ok else 'FAIL'}", verdict="PASS" if rep.ok else "FAIL")
    return 0 if rep.ok else 1


def cmd_slice(args, out):
    game = _game(args)
    v = _valuation(args, game)
    areas = value_areas(v)
    for u in areas.value_set:
        out.add(f"area {u}: " + " ".join(areas.areas[u]), value=u, states=list(areas.areas[u]))
    return 0


def cmd_build_gw(args, out):
    if args.game:
        obj = _game(args).objective
    elif args.objective:
        obj = _objective(args.objective)
    else:
        raise UsageError("--game or --objective is required")
    gw = build_gw(obj.alphabet, obj)
    out.artifact("game", serialize_game(gw), args.out)
    return 0


def _objective(text):
    kind, _, rest = text.partition(":")
    if kind == "buchi":
        return Objective("buchi", (1, 2))
    if kind == "cobuchi":
        return Objective("cobuchi", (0, 1))
    if kind == "parity":
        return Objective("parity", tuple(int(c) for c in rest.split(",")) if rest else (0, 1, 2))
    if kind == "meanpayoff":
        return Objective("meanpayoff", (Fraction(0), Fraction(1)), threshold=Fraction(rest or "1/2"))
    raise UsageError(f"unknown objective {text!r}")


def cmd_build_gu(args, out):
    game = _game(args)
    v = _valuation(args, game)
    sl = build_gu(game, v, _u(args))
    for q, mixes in sl.vertex_actions.items():
        rows = game.arena.actions_a[q]
        for i, m in enumerate(mixes):
            vec = tuple(m.get(a, 0) for a in rows)
            out.add(f"# {q} v{i} = {format_mixed(vec)}", state=q, action=f"v{i}", mix=list(vec))
    out.artifact("game", serialize_game(sl.game), args.out)
    return 0


def cmd_build_gu_tb(args, out):
    game = _game(args)
    v = _valuation(args, game)
    (sA,) = _strategies(args, game)[:1]
    u = _u(args)
    areas = value_areas(v)
    colors = game.arena.used_colors
    choice = {q: finite_choice_set(sA, q, colors) for q in areas.areas.get(u, ()) if q not in game.arena.terminal}
    sl = build_gu_tb(game, v, u, choice)
    for q, why in sl.filtered:
        out.add(f"# filtered non-optimal choice {why} at {q}", state=q, filtered=why)
    out.artifact("game", serialize_game(sl.game), args.out)
    return 0


def cmd_check_local_opt(args, out):
    game = _game(args)
    v = _valuation(args, game)
    (s,) = _strategies(args, game)[:1]
    rep = is_locally_optimal(game, v, s)
    for m, q, b, pay, val in rep.violations:
        out.add(f"violation memory {m} state {q}: column {b} pays {pay} < {val}",
                memory=m, state=q, column=b, payoff=pay, value=val)
    out.add(f"verdict {'PASS' if rep.ok else 'FAIL'} ({rep.checked} pairs checked)",
            verdict="PASS" if rep.ok else "FAIL", checked=rep.checked)
    return 0 if rep.ok else 1


def _opponents(args, game):
    if args.opponents in (None, "positional-exhaustive"):
        return None
    paths = args.opponents.split(",")
    opps = []
    for p in paths:
        s = parse_strategy(_read(p), game)
        if s.player != "B":
            raise UsageError(f"opponent file {p} is not a player B strategy")
        opps.append(s)
    return opps


def _report_lines(out, lines, **extra):
    for line in lines:
        out.add(line, line=line, **extra)


def cmd_check_subgame_opt(args, out):
    game = _game(args)
    v = _valuation(args, game)
    (s,) = _strategies(args, game)[:1]
    rep = check_subgame_optimal(game, v, s, _opponents(args, game))
    out.add(f"family {rep.family}", family=rep.family)
    if rep.opponent is not None:
        out.add(f"witness {rep.opponent}", witness=rep.opponent, failed=list(rep.failed))
    _report_lines(out, rep.lines())
    return 0 if rep.ok else 1


def cmd_glue(args, out):
    game = _game(args)
    v = _valuation(args, game)
    strats = _strategies(args, game)
    areas = value_areas(v)
    arena = game.arena
    pos = [u for u in areas.value_set if u != 0 and any(q not in arena.terminal for q in areas.areas[u])]
    if len(strats) != len(pos):
        raise UsageError(f"give one --strategy per positive value area with a non-terminal state ({len(pos)}), "
                         "in ascending order")
    pieces = {u: PositionalStrategy({}) for u in areas.value_set if u != 0}
    pieces.update(zip(pos, strats))
    glued = glue(pieces, areas, default_fallback(arena))
    flat = glued.flatten()
    out.add("# glued strategy is positional", kind="positional")
    out.artifact("strategy", serialize_strategy(flat, "glued"), args.out)
    return 0


def cmd_reset_wrap(args, out):
    game = _game(args)
    v = _valuation(args, game)
    (s,) = _strategies(args, game)[:1]
    w = reset_wrapper(game, v, s)
    out.artifact("strategy", serialize_strategy(w, "reset"), args.out)
    return 0


def cmd_best_response(args, out):
    game = _game(args)
    (s,) = _strategies(args, game)[:1]
    br = mdp_best_response(game, s)
    v = None
    if args.value_file:
        v = _valuation(args, game)
    ok = True
    for (m, q), x in br.items():
        fresh = start_node(s, game.arena, q) == (m, q)
        line = f"({m}, {q}) {x}" + (" start" if fresh else "")
        fields = dict(memory=m, state=q, value=x, start=fresh)
        if v is not None and fresh:
            good = x == v[q]
            ok &= good
            line += " optimal" if good else f" below {v[q]}"
            fields["optimal"] = good
        out.add(line, **fields)
    if v is not None:
        out.add(f"verdict {'PASS' if ok else 'FAIL'}", verdict="PASS" if ok else "FAIL")
    return 0 if ok else 1


def cmd_transfer(args, out):
    game = _game(args)
    v = _valuation(args, game)
    mode = args.mode or "concurrent"
    sA = None
    if mode == "turn-based":
        (sA,) = _strategies(args, game)[:1]
    try:
        res = transfer_pipeline(game, v, mode=mode, sA=sA, budget=args.budget, opponents=_opponents(args, game))
    except UndecidedError as e:
        out.add(f"verdict UNDECIDED: {e}", verdict="UNDECIDED", message=str(e))
        return 1
    for u, p in res.pieces.items():
        out.add(f"slice {u}: piece found", slice=u)
    if not res.ok:
        out.add(f"verdict FAIL: {res.message}", verdict="FAIL", message=res.message,
                failing_slice=res.failing_slice, zero_states=list(res.zero_states))
        if res.zero_states:
            out.add("zero-value states in slice: " + " ".join(res.zero_states))
        return 1
    _report_lines(out, res.certificate.lines())
    out.artifact("strategy", serialize_strategy(res.strategy, "transfer"), args.out)
    return 0 if res.certificate.ok else 1


def cmd_simulate(args, out):
    game = _game(args)
    strats = _strategies(args, game, need=2)
    sA, sB = strats[0], strats[1]
    if sA.player != "A" or sB.player != "B":
        raise UsageError("give an A strategy then a B strategy")
    start = args.start or game.arena.states[0]
    v = _valuation(args, game) if args.value_file else None
    cfg = SimConfig(args.seed or 0, args.episodes or 1000, args.horizon or 1000)
    trace = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        rep = simulate(game, sA, sB, start, cfg, v=v, trace=trace)
    finally:
        if trace:
            trace.close()
    for line in rep.lines():
        out.add(line, line=line)
    return 0


def cmd_corpus_list(args, out):
    for e in CORPUS:
        tag = "" if e.authoritative else " [illustrative]"
        out.add(f"{e.name}: {e.description}{tag}", name=e.name, description=e.description,
                authoritative=e.authoritative)
    return 0


COMMANDS = {
    "solve-matrix": cmd_solve_matrix,
    "solve": cmd_solve,
    "check-fixpoint": cmd_check_fixpoint,
    "slice": cmd_slice,
    "vertices": cmd_vertices,
    "build-gw": cmd_build_gw,
    "build-gu": cmd_build_gu,
    "build-gu-tb": cmd_build_gu_tb,
    "check-local-opt": cmd_check_local_opt,
    "check-subgame-opt": cmd_check_subgame_opt,
    "glue": cmd_glue,
    "reset-wrap": cmd_reset_wrap,
    "best-response": cmd_best_response,
    "transfer": cmd_transfer,
    "simulate": cmd_simulate,
    "corpus-list": cmd_corpus_list,
}


def build_parser():
    p = argparse.ArgumentParser(prog="pigames", description="Concurrent stochastic games toolkit")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--game", help="game file or corpus entry name")
    p.add_argument("--strategy", action="append", help="strategy file (repeatable)")
    p.add_argument("--value", help="value area u as p/q")
    p.add_argument("--value-file", help="valuation file")
    p.add_argument("--matrix", help="matrix rows like '1,0;0,1'")
    p.add_argument("--objective", help="buchi|cobuchi|parity[:c,c,...]|meanpayoff[:m] for build-gw")
    p.add_argument("--mode", help="least|greatest for solve; concurrent|turn-based for transfer")
    p.add_argument("--tol", help="tolerance as p/q")
    p.add_argument("--seed", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--start", help="start state for simulate")
    p.add_argument("--trace", help="write a tab-separated step trace to this file")
    p.add_argument("--budget", type=int, default=20_000, help="enumeration budget for transfer")
    p.add_argument("--opponents", help="positional-exhaustive or comma-separated B strategy files")
    p.add_argument("--out", help="write the produced game or strategy here")
    p.add_argument("--format", choices=("text", "json-lines"), default="text")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    out = Output(args.format)
    try:
        code = COMMANDS[args.command](args, out)
    except (UsageError, ParseError, DomainError) as e:
        out.emit(sys.stdout)
        sys.stderr.write(f"error: {e}\n")
        return 2
    out.emit(sys.stdout)
    return code

if __name__ == "__main__":
    sys.exit(main())
