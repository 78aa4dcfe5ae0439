"""Immutable expression trees.

Trees are built freely (by the parser or with Python operators) and carry no
simplification.  :func:`normalize` maps any tree to its canonical form, which
is again a tree; canonical trees compare equal exactly when they denote the
same element of the differential-polynomial ring.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from . import poly as P


class Expr:
    __slots__ = ("_hash", "_poly")

    def _key(self):
        raise NotImplementedError

    def children(self):
        return ()

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other):
            return False
        return hash(self) == hash(other) and self._key() == other._key()

    def __hash__(self):
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__, self._key()))
            object.__setattr__(self, "_hash", h)
            return h

    def __setattr__(self, name, value):
        raise AttributeError("expressions are immutable")

    def __repr__(self):
        from .printer import to_text

        return f"Expr({to_text(self)!r})"

    def __str__(self):
        from .printer import to_text

        return to_text(self)

    # raw construction, no simplification
    def __add__(self, other):
        return Add((self, lift(other)))

    def __radd__(self, other):
        return Add((lift(other), self))

    def __sub__(self, other):
        return Add((self, Mul((Num(-1), lift(other)))))

    def __rsub__(self, other):
        return Add((lift(other), Mul((Num(-1), self))))

    def __neg__(self):
        return Mul((Num(-1), self))

    def __mul__(self, other):
        return Mul((self, lift(other)))

    def __rmul__(self, other):
        return Mul((lift(other), self))

    def __truediv__(self, other):
        return Mul((self, Pow(lift(other), Num(-1))))

    def __rtruediv__(self, other):
        return Mul((lift(other), Pow(self, Num(-1))))

    def __pow__(self, k):
        return Pow(self, lift(k))


def _init(obj, **fields):
    for k, v in fields.items():
        object.__setattr__(obj, k, v)


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        _init(self, value=Fraction(value))

    def _key(self):
        return self.value


class Param(Expr):
    """Named parameter such as a viscosity; numeric only at evaluation time."""

    __slots__ = ("name",)

    def __init__(self, name):
        _init(self, name=name)

    def _key(self):
        return self.name


class Var(Expr):
    """Independent variable: spatial ``x``/``x1``.., the clock ``s`` or time ``t``."""

    __slots__ = ("name",)

    def __init__(self, name):
        _init(self, name=name)

    def _key(self):
        return self.name


class Sym(Expr):
    """Unknown function symbol u_i."""

    __slots__ = ("name",)

    def __init__(self, name):
        _init(self, name=name)

    def _key(self):
        return self.name


class Deriv(Expr):
    """D^alpha applied to a subtree; ``alpha`` is a sparse ``((var, count), ...)``."""

    __slots__ = ("arg", "alpha")

    def __init__(self, arg, alpha):
        if isinstance(alpha, (list, tuple)) and alpha and isinstance(alpha[0], str):
            merged = ()
            for v in alpha:
                merged = P.add_index(merged, v)
            alpha = merged
        alpha = tuple(sorted((v, int(c)) for v, c in alpha if c))
        if any(c < 0 for _, c in alpha):
            raise P.StructuralError("negative derivative order")
        _init(self, arg=arg, alpha=alpha)

    def _key(self):
        return (self.arg, self.alpha)

    def children(self):
        return (self.arg,)


class Add(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        _init(self, args=tuple(args))

    def _key(self):
        return self.args

    def children(self):
        return self.args


class Mul(Expr):
    __slots__ = ("args",)

    def __init__(self, args):
        _init(self, args=tuple(args))

    def _key(self):
        return self.args

    def children(self):
        return self.args


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        _init(self, base=base, exponent=lift(exponent))

    def _key(self):
        return (self.base, self.exponent)

    def children(self):
        return (self.base, self.exponent)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        _init(self, name=name, arg=lift(arg))

    def _key(self):
        return (self.name, self.arg)

    def children(self):
        return (self.arg,)


class Pressure(Expr):
    """Nonlocal Leray pressure marker P[sum_ij d_i u_j d_j u_i] over ``fields``.

    Spatial coordinates pair with the fields in order: ``x`` for one field,
    ``x1..xm`` otherwise.  The interior is available as :attr:`source` but no
    rewrite rule looks inside it.
    """

    __slots__ = ("fields",)

    def __init__(self, fields):
        _init(self, fields=tuple(fields))

    def _key(self):
        return self.fields

    @property
    def coords(self):
        return coordinate_names(len(self.fields))

    @property
    def source(self):
        """Raw (un-normalized) source tree with one term per index pair."""
        terms = []
        for i, xi in enumerate(self.coords):
            for j, xj in enumerate(self.coords):
                terms.append(Mul((Deriv(Sym(self.fields[j]), [xi]), Deriv(Sym(self.fields[i]), [xj]))))
        return Add(terms)


def coordinate_names(n):
    if n == 0:
        return ()
    if n == 1:
        return ("x",)
    return tuple(f"x{k}" for k in range(1, n + 1))


def lift(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Rational)) and not isinstance(v, bool):
        return Num(v)
    if isinstance(v, str):
        return Num(Fraction(v))
    if isinstance(v, float):
        return Num(Fraction(repr(v)))
    raise TypeError(f"cannot use {type(v).__name__} in an expression")


def D(arg, *vars):
    """Convenience constructor: ``D(u, 'x', 'x')``."""
    return Deriv(lift(arg), list(vars))


# -- canonical form ---------------------------------------------------------------


def to_poly(e):
    """Canonical polynomial of a tree (cached on the node)."""
    try:
        return e._poly
    except AttributeError:
        pass
    p = _to_poly(e)
    object.__setattr__(e, "_poly", p)
    return p


def _to_poly(e):
    if isinstance(e, Num):
        return P.const(e.value)
    if isinstance(e, Param):
        return P.atom((P.PARAM, e.name))
    if isinstance(e, Var):
        return P.atom((P.VAR, e.name))
    if isinstance(e, Sym):
        return P.atom(P.jet(e.name))
    if isinstance(e, Pressure):
        return P.atom((P.PRESSURE, e.fields, ()))
    if isinstance(e, Add):
        out = {}
        for a in e.args:
            P.add_into(out, to_poly(a))
        return out
    if isinstance(e, Mul):
        out = P.const(1)
        for a in e.args:
            out = P.mul(out, to_poly(a))
        return out
    if isinstance(e, Pow):
        k = to_poly(e.exponent)
        if not P.is_const(k) or P.const_value(k).denominator != 1:
            raise P.StructuralError(f"power with non-integer exponent: {e.exponent}")
        return P.power(to_poly(e.base), int(P.const_value(k)))
    if isinstance(e, Func):
        return P.func(e.name, to_poly(e.arg))
    if isinstance(e, Deriv):
        return P.differentiate(to_poly(e.arg), e.alpha)
    raise P.StructuralError(f"not an expression node: {e!r}")


def _atom_node(a):
    kind = a[0]
    if kind == P.PARAM:
        return Param(a[1])
    if kind == P.VAR:
        return Var(a[1])
    if kind == P.UNKNOWN:
        return Sym(a[1])
    if kind == P.DERIV:
        return Deriv(Sym(a[1]), a[2])
    if kind == P.FUNC:
        return Func(a[1], from_poly(dict(a[2])))
    if kind == P.PRESSURE:
        return Deriv(Pressure(a[1]), a[2]) if a[2] else Pressure(a[1])
    raise P.StructuralError(f"bad atom {a!r}")


def from_poly(p):
    """Canonical tree for a polynomial."""
    terms = []
    for mono, c in sorted(p.items()):
        factors = [_atom_node(a) if e == 1 else Pow(_atom_node(a), Num(e)) for a, e in mono]
        if not factors:
            terms.append(Num(c))
        elif c == 1 and len(factors) == 1:
            terms.append(factors[0])
        elif c == 1:
            terms.append(Mul(factors))
        else:
            terms.append(Mul([Num(c)] + factors))
    if not terms:
        out = Num(0)
    elif len(terms) == 1:
        out = terms[0]
    else:
        out = Add(terms)
    object.__setattr__(out, "_poly", p)
    return out


def normalize(e):
    """Return the unique canonical form of ``e`` (idempotent)."""
    return from_poly(to_poly(lift(e)))


def is_canonical(e):
    return normalize(e) == e
