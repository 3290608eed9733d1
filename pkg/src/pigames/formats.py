"""Line-oriented text formats for games, strategies and valuations.

Game files (``.cgame``)::

    game <name>
    colors <c1> <c2> ...
    objective parity|buchi|cobuchi|genbuchi <set;set;...>|meanpayoff <p/q>
    state <q> color <c> [terminal <p/q>]
    actions <q> A <a1> <a2> ... B <b1> <b2> ...
    nature <d> <q1>:<p/q> <q2>:<p/q> ...
    trans <q> <a> <b> -> <d>

Strategy files (``.cstrat``)::

    strategy <name> player A|B
    memory <m0> <m1> ... init <m0>
    update <m> <color> -> <m'>
    act <m>|- <q> <a1>:<p/q> ...

Valuation files hold one ``<state> <p/q>`` pair per line.  ``#`` starts a
comment everywhere.  Generalized Büchi sets are comma-separated colors,
sets separated by ``;``.  A terminal state declared without actions gets
the single action ``-`` for both players and a self-loop.
"""

from fractions import Fraction

from .core import Arena, DomainError, Distribution, Game, Objective, validate_arena
from .strategies import FiniteMemoryStrategy, MemorySkeleton, PositionalStrategy

__all__ = [
    "ParseError",
    "parse_game",
    "serialize_game",
    "parse_strategy",
    "serialize_strategy",
    "parse_valuation",
    "serialize_valuation",
    "parse_rational",
    "load_game",
    "load_strategy",
    "load_valuation",
]


class ParseError(ValueError):
    def __init__(self, line, col, msg):
        self.line, self.col, self.msg = line, col, msg
        where = f"line {line}" + (f", column {col}" if col else "")
        super().__init__(f"{where}: {msg}")


def _tokens(text):
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = []
        pos = 0
        for t in body.split():
            pos = body.index(t, pos)
            toks.append((t, pos + 1))
            pos += len(t)
        if toks:
            yield n, toks


def parse_rational(tok, line=0, col=0):
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(line, col, f"not a rational: {tok!r}") from None


def _color(tok, line, col, integer):
    x = parse_rational(tok, line, col)
    if integer:
        if x.denominator != 1:
            raise ParseError(line, col, f"color {tok} must be an integer")
        return int(x)
    return x


def _fmt_color(c):
    return str(c)


def parse_game(text):
    """Parse a ``.cgame`` document into a validated :class:`Game`."""
    name = "game"
    colors_tok = None
    obj = None
    states, color_tok, terminal = [], {}, {}
    actions_a, actions_b = {}, {}
    nature, nature_line, trans_line = {}, {}, {}
    delta = {}
    for n, toks in _tokens(text):
        kw = toks[0][0]
        words = [t for t, _ in toks]

        def need(k, n=n, toks=toks, kw=kw):
            if len(toks) < k:
                raise ParseError(n, toks[-1][1], f"'{kw}' needs at least {k - 1} arguments")

        if kw == "game":
            need(2)
            name = words[1]
        elif kw == "colors":
            need(2)
            colors_tok = toks[1:]
            colors_line = n
        elif kw == "objective":
            need(2)
            kind = words[1]
            if kind in ("parity", "buchi", "cobuchi"):
                obj = (kind, None, n)
            elif kind == "genbuchi":
                need(3)
                obj = (kind, toks[2], n)
            elif kind == "meanpayoff":
                need(3)
                obj = (kind, parse_rational(words[2], n, toks[2][1]), n)
            else:
                raise ParseError(n, toks[1][1], f"unknown objective {kind!r}")
        elif kw == "state":
            need(4)
            if words[2] != "color":
                raise ParseError(n, toks[2][1], "expected 'color'")
            q = words[1]
            if q in color_tok:
                raise ParseError(n, toks[1][1], f"state {q} declared twice")
            states.append(q)
            color_tok[q] = (words[3], n, toks[3][1])
            if len(words) > 4:
                if words[4] != "terminal" or len(words) != 6:
                    raise ParseError(n, toks[4][1], "expected 'terminal <p/q>'")
                terminal[q] = parse_rational(words[5], n, toks[5][1])
        elif kw == "actions":
            need(5)
            q = words[1]
            try:
                ia, ib = words.index("A"), words.index("B")
            except ValueError:
                raise ParseError(n, toks[0][1], "actions line needs 'A' and 'B' sections") from None
            if not (ia == 2 and ib > ia + 1 and ib < len(words) - 1):
                raise ParseError(n, toks[0][1], "expected 'actions <q> A <a>... B <b>...'")
            actions_a[q] = tuple(words[3:ib])
            actions_b[q] = tuple(words[ib + 1:])
        elif kw == "nature":
            need(3)
            d = words[1]
            dist = {}
            for t, c in toks[2:]:
                if ":" not in t:
                    raise ParseError(n, c, f"expected <state>:<p/q>, got {t!r}")
                q, p = t.rsplit(":", 1)
                dist[q] = dist.get(q, Fraction(0)) + parse_rational(p, n, c)
            nature[d] = dist
            nature_line[d] = n
        elif kw == "trans":
            if len(words) != 6 or words[4] != "->":
                raise ParseError(n, toks[0][1], "expected 'trans <q> <a> <b> -> <d>'")
            delta[(words[1], words[2], words[3])] = words[5]
            trans_line[(words[1], words[2], words[3])] = n
        else:
            raise ParseError(n, toks[0][1], f"unknown keyword {kw!r}")
    if obj is None:
        raise ParseError(0, 0, "missing objective line")
    kind, arg, oline = obj
    integer = kind != "meanpayoff"
    if colors_tok is None:
        raise ParseError(0, 0, "missing colors line")
    alphabet = tuple(_color(t, colors_line, c, integer) for t, c in colors_tok)
    color = {q: _color(*color_tok[q], integer) for q in states}
    sets = ()
    threshold = None
    if kind == "genbuchi":
        tok, col = arg
        sets = tuple(frozenset(_color(c, oline, col, True) for c in part.split(",") if c) for part in tok.split(";"))
    if kind == "meanpayoff":
        threshold = arg
    try:
        objective = Objective(kind, alphabet, sets, threshold)
    except DomainError as e:
        raise ParseError(oline, 0, str(e)) from None
    for q in terminal:
        if q not in actions_a and q not in actions_b:
            actions_a[q] = ("-",)
            actions_b[q] = ("-",)
            d = f"stay_{q}"
            nature.setdefault(d, {q: Fraction(1)})
            delta[(q, "-", "-")] = d
    arena = Arena(tuple(states), color, actions_a, actions_b, nature, delta, terminal)
    diags = validate_arena(arena)
    if diags:
        first = diags[0]
        line = 0
        for d, ln in nature_line.items():
            if first.startswith(f"nature {d}:"):
                line = ln
        for (q, a, b), ln in trans_line.items():
            if f"({q}, {a}, {b})" in first:
                line = ln
        raise ParseError(line, 0, "; ".join(diags))
    try:
        return Game(arena, objective, name)
    except DomainError as e:
        raise ParseError(0, 0, str(e)) from None


def serialize_game(game):
    """Canonical text: declaration order, single spaces, trailing newline."""
    a, o = game.arena, game.objective
    out = [f"game {game.name}", "colors " + " ".join(_fmt_color(c) for c in o.alphabet)]
    if o.kind == "genbuchi":
        sets = ";".join(",".join(str(c) for c in sorted(s)) for s in o.sets)
        out.append(f"objective genbuchi {sets}")
    elif o.kind == "meanpayoff":
        out.append(f"objective meanpayoff {o.threshold}")
    else:
        out.append(f"objective {o.kind}")
    for q in a.states:
        line = f"state {q} color {_fmt_color(a.color[q])}"
        if q in a.terminal:
            line += f" terminal {a.terminal[q]}"
        out.append(line)
    for q in a.states:
        out.append(f"actions {q} A " + " ".join(a.actions_a[q]) + " B " + " ".join(a.actions_b[q]))
    for d, dist in a.nature.items():
        out.append(f"nature {d} " + " ".join(f"{q}:{p}" for q, p in dist.items()))
    for q in a.states:
        for x in a.actions_a[q]:
            for b in a.actions_b[q]:
                out.append(f"trans {q} {x} {b} -> {a.delta[(q, x, b)]}")
    return "\n".join(out) + "\n"


def parse_strategy(text, game):
    """Parse a ``.cstrat`` document against ``game``."""
    arena = game.arena
    integer = game.objective.kind != "meanpayoff"
    name, player = "strategy", "A"
    memories = init = None
    update = {}
    rows = {}
    for n, toks in _tokens(text):
        kw = toks[0][0]
        words = [t for t, _ in toks]
        if kw == "strategy":
            if len(words) != 4 or words[2] != "player" or words[3] not in ("A", "B"):
                raise ParseError(n, toks[0][1], "expected 'strategy <name> player A|B'")
            name, player = words[1], words[3]
        elif kw == "memory":
            if "init" not in words or words.index("init") != len(words) - 2 or len(words) < 4:
                raise ParseError(n, toks[0][1], "expected 'memory <m>... init <m0>'")
            memories = tuple(words[1:-2])
            init = words[-1]
            if init not in memories:
                raise ParseError(n, toks[-1][1], f"initial memory {init} not declared")
        elif kw == "update":
            if len(words) != 5 or words[3] != "->":
                raise ParseError(n, toks[0][1], "expected 'update <m> <color> -> <m2>'")
            c = _color(words[2], n, toks[2][1], integer)
            if c not in game.objective.alphabet:
                raise ParseError(n, toks[2][1], f"undeclared color {words[2]}")
            update[(words[1], c)] = words[4]
            for i in (1, 4):
                if memories is None or words[i] not in memories:
                    raise ParseError(n, toks[i][1], f"undeclared memory {words[i]}")
        elif kw == "act":
            if len(words) < 4:
                raise ParseError(n, toks[0][1], "expected 'act <m>|- <q> <a>:<p/q>...'")
            m, q = words[1], words[2]
            if q not in arena.actions_a:
                raise ParseError(n, toks[2][1], f"undeclared state {q}")
            acts = arena.actions_a[q] if player == "A" else arena.actions_b[q]
            if m != "-" and (memories is None or m not in memories):
                raise ParseError(n, toks[1][1], f"undeclared memory {m}")
            dist = {}
            for t, c in toks[3:]:
                if ":" not in t:
                    raise ParseError(n, c, f"expected <action>:<p/q>, got {t!r}")
                x, p = t.rsplit(":", 1)
                if x not in acts:
                    raise ParseError(n, c, f"action {x} not available at {q}")
                dist[x] = dist.get(x, Fraction(0)) + parse_rational(p, n, c)
            try:
                rows[(m, q)] = Distribution(dist)
            except DomainError as e:
                raise ParseError(n, toks[3][1], str(e)) from None
        else:
            raise ParseError(n, toks[0][1], f"unknown keyword {kw!r}")
    try:
        if memories is None:
            if any(m != "-" for m, _ in rows):
                raise DomainError("memory names used without a memory line")
            s = PositionalStrategy({q: d for (_, q), d in rows.items()}, arena, player)
        else:
            sk = MemorySkeleton(memories, init, update)
            s = FiniteMemoryStrategy(sk, rows, arena, player)
    except DomainError as e:
        raise ParseError(0, 0, str(e)) from None
    s.name = name
    return s


def serialize_strategy(strategy, name=None):
    name = name or getattr(strategy, "name", "strategy")
    out = [f"strategy {name} player {strategy.player}"]
    if isinstance(strategy, PositionalStrategy):
        for q, d in strategy.act.items():
            out.append(f"act - {q} " + " ".join(f"{a}:{p}" for a, p in d.items()))
        return "\n".join(out) + "\n"
    sk = strategy.skeleton
    out.append("memory " + " ".join(sk.memories) + f" init {sk.init}")
    for (m, c), m2 in sk.update.items():
        out.append(f"update {m} {c} -> {m2}")
    for (m, q), d in strategy.action_map.items():
        out.append(f"act {m} {q} " + " ".join(f"{a}:{p}" for a, p in d.items()))
    return "\n".join(out) + "\n"


def parse_valuation(text, game):
    v = {}
    for n, toks in _tokens(text):
        if len(toks) != 2:
            raise ParseError(n, toks[0][1], "expected '<state> <p/q>'")
        q = toks[0][0]
        if q not in game.arena.color:
            raise ParseError(n, toks[0][1], f"undeclared state {q}")
        v[q] = parse_rational(toks[1][0], n, toks[1][1])
    missing = [q for q in game.arena.states if q not in v]
    if missing:
        raise ParseError(0, 0, f"valuation misses states {missing}")
    return {q: v[q] for q in game.arena.states}


def serialize_valuation(v):
    return "".join(f"{q} {x}\n" for q, x in v.items())


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_game(path):
    return parse_game(_read(path))


def load_strategy(path, game):
    return parse_strategy(_read(path), game)


def load_valuation(path, game):
    return parse_valuation(_read(path), game)
