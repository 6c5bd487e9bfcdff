"""Text format for schemes.

Grammar (LL(1); ``#`` starts a comment running to end of line)::

    file      := item*
    item      := decl | equation | algebra
    decl      := ("given" | "unknown") sym ("," sym)*
    sym       := IDENT ":" INT
    equation  := IDENT [ "(" [ IDENT ("," IDENT)* ] ")" ] ("=" | "≈") term
    term      := NUMBER | IDENT [ "(" [ term ("," term)* ] ")" ]
    algebra   := "algebra" IDENT [ "(" [ IDENT "=" value ("," IDENT "=" value)* ] ")" ]
    value     := NUMBER | IDENT | STRING

In an equation the identifiers in the head are the variables; every other
identifier in the body must be a declared symbol. Numbers in a body are
carrier constants of the interpreting algebra.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

from .rps import Rps
from .signature import App, Param, Signature, Var


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg, self.line, self.col = msg, line, col
        super().__init__(f"line {line}, col {col}: {msg}" if line else msg)


@dataclass(frozen=True)
class Pos:
    line: int
    col: int


# ---------------------------------------------------------------------------
# AST (positions are carried but ignored by equality)


@dataclass(frozen=True)
class Sym:
    """An identifier, applied (``args`` a tuple) or bare (``args`` None)."""

    name: str
    args: tuple | None = None
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Num:
    value: Any
    text: str
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Decl:
    kind: str  # "given" | "unknown"
    name: str
    arity: int
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Equation:
    name: str
    params: tuple
    body: Sym | Num
    pos: Pos | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AlgebraDecl:
    name: str
    params: tuple = ()  # of (key, value)
    pos: Pos | None = field(default=None, compare=False)

    def options(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class SchemeFile:
    decls: tuple
    equations: tuple
    algebra: AlgebraDecl | None = None

    def givens(self) -> list[Decl]:
        return [d for d in self.decls if d.kind == "given"]

    def unknowns(self) -> list[Decl]:
        return [d for d in self.decls if d.kind == "unknown"]


# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<str>"[^"\n]*")
  | (?P<punct>[(),:=]|≈)
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: Pos


def tokenize(text: str) -> list[Tok]:
    toks = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - start + 1)
        kind = m.lastgroup
        pos = Pos(line, i - start + 1)
        if kind == "nl":
            toks.append(Tok("nl", "\n", pos))
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), pos))
        i = m.end()
    toks.append(Tok("eof", "", Pos(line, i - start + 1)))
    return toks


# ---------------------------------------------------------------------------
# parser


KEYWORDS = {"given", "unknown", "algebra"}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.pos.line, tok.pos.col)

    def next(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        if self.tok.text != text or self.tok.kind not in ("punct",):
            self.fail(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def ident(self) -> Tok:
        if self.tok.kind != "ident":
            self.fail(f"expected an identifier, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def skip_nl(self):
        while self.tok.kind == "nl":
            self.i += 1

    def end_item(self):
        if self.tok.kind not in ("nl", "eof"):
            self.fail(f"unexpected {self.tok.text!r} at end of line")

    def file(self) -> SchemeFile:
        decls, eqs, alg = [], [], None
        self.skip_nl()
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "ident" and t.text in ("given", "unknown"):
                decls.extend(self.decl())
            elif t.kind == "ident" and t.text == "algebra":
                if alg is not None:
                    self.fail("only one algebra declaration is allowed")
                alg = self.algebra()
            elif t.kind == "ident":
                eqs.append(self.equation())
            else:
                self.fail(f"unexpected {t.text!r}")
            self.end_item()
            self.skip_nl()
        return SchemeFile(tuple(decls), tuple(eqs), alg)

    def decl(self) -> list[Decl]:
        kind = self.next().text
        out = [self.sym(kind)]
        while self.tok.text == ",":
            self.next()
            out.append(self.sym(kind))
        return out

    def sym(self, kind: str) -> Decl:
        name = self.ident()
        if name.text in KEYWORDS:
            self.fail(f"{name.text!r} is a keyword", name)
        self.expect(":")
        if self.tok.kind != "num" or not self.tok.text.isdigit():
            self.fail("expected a non-negative integer arity")
        return Decl(kind, name.text, int(self.next().text), name.pos)

    def equation(self) -> Equation:
        head = self.ident()
        params = []
        if self.tok.text == "(":
            self.next()
            if self.tok.text != ")":
                params.append(self.ident().text)
                while self.tok.text == ",":
                    self.next()
                    params.append(self.ident().text)
            self.expect(")")
        if self.tok.text not in ("=", "≈"):
            self.fail(f"expected '=' after equation head, found {self.tok.text!r}")
        self.next()
        return Equation(head.text, tuple(params), self.term(), head.pos)

    def term(self):
        t = self.tok
        if t.kind == "num":
            self.next()
            return Num(_number(t.text), t.text, t.pos)
        name = self.ident()
        if self.tok.text != "(":
            return Sym(name.text, None, name.pos)
        self.next()
        args = []
        if self.tok.text != ")":
            args.append(self.term())
            while self.tok.text == ",":
                self.next()
                args.append(self.term())
        self.expect(")")
        return Sym(name.text, tuple(args), name.pos)

    def algebra(self) -> AlgebraDecl:
        kw = self.next()
        name = self.ident()
        params = []
        if self.tok.text == "(":
            self.next()
            if self.tok.text != ")":
                params.append(self.option())
                while self.tok.text == ",":
                    self.next()
                    params.append(self.option())
            self.expect(")")
        return AlgebraDecl(name.text, tuple(params), kw.pos)

    def option(self) -> tuple:
        key = self.ident().text
        self.expect("=")
        t = self.next()
        if t.kind == "num":
            return key, _number(t.text)
        if t.kind == "str":
            return key, t.text[1:-1]
        if t.kind == "ident":
            return key, t.text
        self.fail("expected a number, identifier or string", t)


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse(text: str) -> SchemeFile:
    """Parse scheme text; raises :class:`ParseError` with line and column."""
    return _Parser(text).file()


# ---------------------------------------------------------------------------
# printer


def show_ast(t) -> str:
    if isinstance(t, Num):
        return t.text
    if t.args is None:
        return t.name
    return f"{t.name}({', '.join(show_ast(a) for a in t.args)})"


def _show_option(v) -> str:
    if isinstance(v, str):
        return v if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", v) else f'"{v}"'
    return repr(v)


def print_scheme(f: SchemeFile) -> str:
    lines = []
    for d in f.decls:
        lines.append(f"{d.kind} {d.name} : {d.arity}")
    for e in f.equations:
        head = f"{e.name}({', '.join(e.params)})" if e.params else e.name
        lines.append(f"{head} = {show_ast(e.body)}")
    if f.algebra is not None:
        a = f.algebra
        opts = ", ".join(f"{k}={_show_option(v)}" for k, v in a.params)
        lines.append(f"algebra {a.name}({opts})" if a.params else f"algebra {a.name}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# elaboration into a scheme


def _at(pos: Pos | None) -> tuple:
    return (pos.line, pos.col) if pos else (0, 0)


def to_rps(f: SchemeFile) -> Rps:
    """Resolve names and build the scheme; errors carry source locations."""
    seen: dict[str, Decl] = {}
    for d in f.decls:
        if d.name in seen:
            raise ParseError(f"symbol {d.name} declared twice", *_at(d.pos))
        seen[d.name] = d
    givens = Signature([(d.name, d.arity) for d in f.givens()], label="given")
    unknowns = Signature([(d.name, d.arity) for d in f.unknowns()], label="unknown")

    rhs, names = {}, {}
    for eq in f.equations:
        d = seen.get(eq.name)
        if d is None:
            raise ParseError(f"equation for undeclared symbol {eq.name}", *_at(eq.pos))
        if d.kind != "unknown":
            raise ParseError(f"{eq.name} is a given symbol and cannot have an equation", *_at(eq.pos))
        sym = unknowns[eq.name]
        if sym in rhs:
            raise ParseError(f"duplicate equation for {eq.name}", *_at(eq.pos))
        if len(eq.params) != d.arity:
            raise ParseError(
                f"{eq.name} has arity {d.arity} but its equation binds {len(eq.params)} variables",
                *_at(eq.pos))
        if len(set(eq.params)) != len(eq.params):
            raise ParseError(f"repeated variable in the head of {eq.name}", *_at(eq.pos))
        env = {p: i for i, p in enumerate(eq.params)}
        for p in eq.params:
            if p in seen:
                raise ParseError(f"variable {p} shadows a declared symbol", *_at(eq.pos))

        def build(t):
            if isinstance(t, Num):
                return Param(t.value)
            if t.args is None and t.name in env:
                return Var(env[t.name])
            decl = seen.get(t.name)
            if decl is None:
                raise ParseError(f"unknown symbol {t.name}", *_at(t.pos))
            args = t.args or ()
            if len(args) != decl.arity:
                raise ParseError(
                    f"{t.name} expects {decl.arity} arguments, got {len(args)}", *_at(t.pos))
            s = givens[t.name] if decl.kind == "given" else unknowns[t.name]
            return App(s, tuple(build(a) for a in args))

        rhs[sym] = build(eq.body)
        names[sym] = list(eq.params)
    for d in f.unknowns():
        if unknowns[d.name] not in rhs:
            raise ParseError(f"unknown {d.name} lacks equation", *_at(d.pos))
    return Rps(givens, unknowns, rhs, names)


def parse_rps(text: str) -> Rps:
    return to_rps(parse(text))
