"""Reader and writer for the PDE specification text format.

A specification is a sequence of ``;``-terminated statements::

    dim 1;                       # optional, inferred from x / x1..xn
    unknowns u;                  # optional, inferred from the dt(...) heads
    param nu = 0.1;              # optional default value
    time_dependent;              # right-hand sides may use the clock s
    eq: dt(u) = nu*D(u;x,x) - u*D(u;x);
    init: u = sin(x);

Expressions use ``+ - * / ^`` with the usual precedence, the calls
``sin cos exp log recip``, derivatives ``D(u; x, x)`` and the nonlocal marker
``leray_pressure(v1, ..., vm)``.  Identifiers that are neither unknowns nor
spatial variables are parameters.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .expr import (
    Add,
    Deriv,
    Expr,
    FUNCTIONS,
    Func,
    Mul,
    Num,
    Param,
    Pow,
    Pressure,
    Sym,
    Var,
    coordinate_names,
    normalize,
    symbols,
    to_text,
)
from .system import TIME_SYMBOL, PDESystem, SemanticError

__all__ = ["ParseError", "SemanticError", "parse_expr", "parse_system", "serialize"]


class ParseError(ValueError):
    """Syntax error with a 1-based source position."""

    def __init__(self, message, line, col):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.reason = message


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),;=:])
    """,
    re.VERBOSE,
)

_VAR = re.compile(r"x(?:[1-9][0-9]*)?$")


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text):
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Scope:
    """How bare identifiers resolve while parsing expressions."""

    def __init__(self, unknowns=None, params=None, variables=None, strict_unknowns=False):
        self.unknowns = None if unknowns is None else set(unknowns)
        self.params = None if params is None else set(params)
        self.variables = variables  # None: any x/x1../s/t name is a variable
        self.strict_unknowns = strict_unknowns
        self.seen_params = set()

    def is_var(self, name):
        if self.variables is not None:
            return name in self.variables
        return bool(_VAR.match(name)) or name in (TIME_SYMBOL, "t")

    def is_unknown(self, name):
        if self.unknowns is not None:
            return name in self.unknowns
        if self.params is not None:
            return name not in self.params
        return True

    def resolve(self, tok):
        name = tok.text
        if self.is_var(name):
            return Var(name)
        if self.is_unknown(name):
            return Sym(name)
        if self.variables is not None and (_VAR.match(name) or name in (TIME_SYMBOL, "t")):
            raise self.bad_variable(tok)
        self.seen_params.add(name)
        return Param(name)

    def bad_variable(self, tok):
        name = tok.text
        if name == TIME_SYMBOL:
            return SemanticError("time symbol s used in a system not declared time_dependent", name)
        if name == "t":
            return SemanticError("time t is implicit; declare time_dependent and use s", name)
        return SemanticError(f"variable {name} not valid here", name)


class _Parser:
    def __init__(self, tokens, scope):
        self.tokens = tokens
        self.i = 0
        self.scope = scope

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def accept(self, text):
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        return self.tokens[self.i - 1]

    def ident(self):
        tok = self.tok
        if tok.kind != "ident":
            raise self.error(f"expected identifier, found {tok.text or 'end of input'!r}")
        self.i += 1
        return tok

    # expr := term (('+'|'-') term)*
    def expr(self):
        terms = [self.term()]
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            t = self.term()
            terms.append(t if op == "+" else Mul((Num(-1), t)))
        return terms[0] if len(terms) == 1 else Add(terms)

    # term := unary (('*'|'/') unary)*
    def term(self):
        out = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            rhs = self.unary()
            out = Mul((out, rhs)) if op == "*" else Mul((out, Pow(rhs, Num(-1))))
        return out

    def unary(self):
        if self.accept("-"):
            inner = self.unary()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Mul((Num(-1), inner))
        if self.accept("+"):
            return self.unary()
        return self.power()

    # power := primary ('^' unary)?   (right associative through unary)
    def power(self):
        base = self.primary()
        if self.accept("^"):
            return Pow(base, self.unary())
        return base

    def primary(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(Fraction(tok.text))
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind != "ident":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}")
        self.i += 1
        name = tok.text
        if self.tok.text == "(" and self.tok.kind == "op":
            return self.call(tok)
        return self.scope.resolve(tok)

    def call(self, tok):
        name = tok.text
        self.expect("(")
        if name == "D":
            head = self.tok
            arg = self.expr()
            if isinstance(arg, (Param, Var)) or (isinstance(arg, Sym) and not self.scope.is_unknown(arg.name)):
                raise SemanticError(f"unknown {head.text} not declared", head.text)
            self.expect(";")
            alpha = []
            if self.tok.text != ")":
                alpha.append(self.variable())
                while self.accept(","):
                    alpha.append(self.variable())
            self.expect(")")
            return Deriv(arg, alpha) if alpha else arg
        if name == "leray_pressure":
            fields = [self.ident()]
            while self.accept(","):
                fields.append(self.ident())
            self.expect(")")
            for f in fields:
                if not self.scope.is_unknown(f.text) or self.scope.is_var(f.text):
                    raise SemanticError(f"unknown {f.text} not declared", f.text)
            return Pressure([f.text for f in fields])
        if name in FUNCTIONS:
            arg = self.expr()
            self.expect(")")
            return Func(name, arg)
        raise self.error(f"unknown function {name!r}", tok)

    def variable(self):
        tok = self.ident()
        if not self.scope.is_var(tok.text):
            if _VAR.match(tok.text) or tok.text in (TIME_SYMBOL, "t"):
                raise self.scope.bad_variable(tok)
            raise self.error(f"{tok.text!r} is not a variable", tok)
        return tok.text


def parse_expr(text, unknowns=None, params=None, variables=None):
    """Parse one expression into a raw (non-canonical) tree.

    Identifier resolution: ``x``, ``x1``.. and the time names ``s``/``t`` are
    variables (or exactly ``variables`` when given).  If ``unknowns`` is given
    every other name is a parameter; else if ``params`` is given every other
    name is an unknown; with neither, every other name is an unknown.
    """
    p = _Parser(tokenize(text), _Scope(unknowns, params, variables))
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r}")
    return e


# -- systems -------------------------------------------------------------------


def _statements(tokens):
    """Split the token stream at ``;`` (the final statement must be terminated)."""
    out, cur = [], []
    for tok in tokens:
        if tok.kind == "eof":
            if cur:
                raise ParseError("expected ';'", tok.line, tok.col)
            break
        if tok.kind == "op" and tok.text == ";":
            # a ';' inside D( ... ; ... ) belongs to the expression
            depth = sum(1 if t.text == "(" else -1 if t.text == ")" else 0 for t in cur if t.kind == "op")
            if depth > 0:
                cur.append(tok)
                continue
            if not cur:
                raise ParseError("empty statement", tok.line, tok.col)
            cur.append(tok)
            out.append(cur)
            cur = []
        else:
            cur.append(tok)
    return out


def _eof_after(stmt):
    last = stmt[-1]
    return stmt + [Token("eof", "", last.line, last.col + 1)]


def parse_system(text):
    """Parse and validate a specification; expressions come back canonical."""
    stmts = _statements(tokenize(text))
    dim = None
    declared = None
    params = {}
    time_dependent = False
    heads = []
    for stmt in stmts:
        kw = stmt[0]
        if kw.text == "dim" and kw.kind == "ident":
            if len(stmt) != 3 or stmt[1].kind != "num" or not stmt[1].text.isdigit():
                raise ParseError("expected 'dim INT;'", kw.line, kw.col)
            dim = int(stmt[1].text)
        elif kw.text == "unknowns" and kw.kind == "ident":
            names = [t for t in stmt[1:-1] if not (t.kind == "op" and t.text == ",")]
            if not names or any(t.kind != "ident" for t in names):
                raise ParseError("expected 'unknowns IDENT (, IDENT)*;'", kw.line, kw.col)
            declared = [t.text for t in names]
        elif kw.text == "param" and kw.kind == "ident":
            p = _Parser(_eof_after(stmt[1:-1]), _Scope())
            name = p.ident().text
            p.expect("=")
            sign = -1 if p.accept("-") else 1
            if p.tok.kind != "num":
                raise p.error("expected a number")
            params[name] = sign * float(p.tok.text)
            p.i += 1
            if p.tok.kind != "eof":
                raise p.error(f"unexpected {p.tok.text!r}")
        elif kw.text == "time_dependent" and kw.kind == "ident":
            if len(stmt) != 2:
                raise ParseError("expected 'time_dependent;'", kw.line, kw.col)
            time_dependent = True
        elif kw.text == "eq" and kw.kind == "ident":
            p = _Parser(_eof_after(stmt[:-1]), _Scope())
            p.expect("eq")
            p.expect(":")
            p.expect("dt")
            p.expect("(")
            heads.append(p.ident())
            p.expect(")")
            p.expect("=")
        elif kw.text == "init" and kw.kind == "ident":
            pass
        else:
            raise ParseError(f"unknown statement {kw.text!r}", kw.line, kw.col)

    unknowns = declared if declared is not None else []
    if declared is None:
        for h in heads:
            if h.text not in unknowns:
                unknowns.append(h.text)
    if not heads:
        tok = stmts[0][0] if stmts else Token("eof", "", 1, 1)
        raise ParseError("a system needs at least one 'eq:' statement", tok.line, tok.col)
    for h in heads:
        if h.text not in unknowns:
            raise SemanticError(f"unknown {h.text} not declared", h.text)

    if dim is None:
        dim = _infer_dim(stmts, set(unknowns) | set(params))
    variables = set(coordinate_names(dim))
    rhs_vars = variables | ({TIME_SYMBOL} if time_dependent else set())

    rhs, init = {}, {}
    seen_params = set()
    for stmt in stmts:
        kw = stmt[0]
        if kw.text == "eq":
            scope = _Scope(unknowns=unknowns, variables=rhs_vars)
            p = _Parser(_eof_after(stmt[:-1]), scope)
            for t in ("eq", ":", "dt", "("):
                p.expect(t)
            head = p.ident()
            p.expect(")")
            p.expect("=")
            e = p.expr()
            if p.tok.kind != "eof":
                raise p.error(f"unexpected {p.tok.text!r}")
            if head.text in rhs:
                raise SemanticError(f"duplicate equation for {head.text}", head.text)
            rhs[head.text] = e
            seen_params |= scope.seen_params
        elif kw.text == "init":
            scope = _Scope(unknowns=unknowns, variables=variables)
            p = _Parser(_eof_after(stmt[:-1]), scope)
            p.expect("init")
            p.expect(":")
            head = p.ident()
            p.expect("=")
            e = p.expr()
            if p.tok.kind != "eof":
                raise p.error(f"unexpected {p.tok.text!r}")
            if head.text not in unknowns:
                raise SemanticError(f"unknown {head.text} not declared", head.text)
            if head.text in init:
                raise SemanticError(f"duplicate initial data for {head.text}", head.text)
            used = symbols(e)["unknowns"]
            if used:
                u = sorted(used)[0]
                raise SemanticError(f"initial data for {head.text} mentions unknown {u}", u)
            init[head.text] = e
            seen_params |= scope.seen_params
    for name in sorted(seen_params):
        params.setdefault(name, None)
    return PDESystem(
        dim=dim,
        unknowns=tuple(unknowns),
        rhs=rhs,
        init=init,
        params=params,
        time_dependent=time_dependent,
    )


def _infer_dim(stmts, reserved):
    plain, indexed = False, 0
    for stmt in stmts:
        for tok in stmt:
            if tok.kind != "ident" or tok.text in reserved or not _VAR.match(tok.text):
                continue
            if tok.text == "x":
                plain = True
            else:
                indexed = max(indexed, int(tok.text[1:]))
    if plain and indexed:
        raise SemanticError("mixes x with x1..xn; declare dim", "x")
    return 1 if plain else indexed


# -- writing ------------------------------------------------------------------------


def _format_param(v):
    return repr(float(v))


def serialize(obj):
    """Text form of an expression or a :class:`PDESystem`.

    Expressions print in canonical form, so derivatives only ever act on
    unknowns and the text always parses back; systems print one statement
    per line in a fixed order.
    """
    if isinstance(obj, Expr):
        return to_text(normalize(obj))
    if not isinstance(obj, PDESystem):
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    lines = [f"dim {obj.dim};", f"unknowns {', '.join(obj.unknowns)};"]
    for name, v in sorted(obj.params.items()):
        if v is not None:
            lines.append(f"param {name} = {_format_param(v)};")
    if obj.time_dependent:
        lines.append("time_dependent;")
    for name in obj.unknowns:
        lines.append(f"eq: dt({name}) = {to_text(obj.rhs[name])};")
    for name in obj.unknowns:
        if name in obj.init:
            lines.append(f"init: {name} = {to_text(obj.init[name])};")
    return "\n".join(lines) + "\n"
