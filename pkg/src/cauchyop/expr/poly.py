"""Sparse Laurent polynomials over symbolic atoms with exact rational coefficients.

This is the working representation behind every canonical expression.  A
polynomial is a plain ``dict`` mapping a *monomial* to a nonzero
:class:`~fractions.Fraction`.  A monomial is a tuple of ``(atom, exponent)``
pairs sorted by atom; the empty tuple is the constant monomial.

Atoms are tuples whose first entry is a rank, so that sorting atoms gives the
fixed total order used for canonical forms::

    (PARAM, name)
    (VAR, name)
    (UNKNOWN, name, ())              # plain unknown u
    (DERIV, name, alpha)             # D^alpha u, alpha = ((var, count), ...)
    (FUNC, fname, frozen_argument)   # sin/cos/exp/log/recip of a polynomial
    (PRESSURE, fields, alpha)        # nonlocal pressure marker, inert

Frozen polynomials (used inside atoms) are sorted tuples of ``(monomial,
coefficient)`` pairs, which keeps atoms hashable and comparable.
"""

from __future__ import annotations

from fractions import Fraction

PARAM, VAR, UNKNOWN, DERIV, FUNC, PRESSURE = 1, 2, 3, 4, 5, 6

FUNCTIONS = ("sin", "cos", "exp", "log", "recip")

ONE = ()


class StructuralError(ValueError):
    """Raised for trees that have no canonical form."""


# -- atoms -------------------------------------------------------------------


def jet(name, alpha=()):
    return (DERIV if alpha else UNKNOWN, name, alpha)


def add_index(alpha, var, count=1):
    """Merge ``count`` derivatives along ``var`` into a sparse multi-index."""
    d = dict(alpha)
    d[var] = d.get(var, 0) + count
    return tuple(sorted(d.items()))


def merge_index(alpha, beta):
    d = dict(alpha)
    for var, c in beta:
        d[var] = d.get(var, 0) + c
    return tuple(sorted(d.items()))


def freeze(p):
    return tuple(sorted(p.items()))


# -- construction --------------------------------------------------------------


def const(c):
    c = Fraction(c)
    return {ONE: c} if c else {}


def atom(a, e=1):
    return {((a, e),): Fraction(1)}


def is_const(p):
    return not p or (len(p) == 1 and ONE in p)


def const_value(p):
    return p.get(ONE, Fraction(0))


# -- arithmetic -------------------------------------------------------------


def mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for a, e in m2:
        n = d.get(a, 0) + e
        if n:
            d[a] = n
        else:
            del d[a]
    return tuple(sorted(d.items()))


def add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def add_into(acc, p, scale=1):
    """In-place ``acc += scale * p``."""
    for m, c in p.items():
        v = acc.get(m, 0) + scale * c
        if v:
            acc[m] = v
        else:
            acc.pop(m, None)
    return acc


def scale(p, c):
    c = Fraction(c)
    if not c:
        return {}
    return {m: v * c for m, v in p.items()}


def neg(p):
    return {m: -v for m, v in p.items()}


def mul(a, b):
    if not a or not b:
        return {}
    if len(a) == 1 and ONE in a:
        return scale(b, a[ONE])
    if len(b) == 1 and ONE in b:
        return scale(a, b[ONE])
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = mono_mul(m1, m2)
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def invert(p):
    """Exact reciprocal: monomial inverse for single terms, else a ``recip`` atom."""
    if not p:
        raise StructuralError("division by zero")
    if len(p) == 1:
        (m, c), = p.items()
        return {tuple((a, -e) for a, e in m): 1 / c}
    return atom((FUNC, "recip", freeze(p)))


def power(p, k):
    if not isinstance(k, int):
        raise StructuralError(f"non-integer exponent {k!r}")
    if k < 0:
        return power(invert(p), -k)
    if k == 0:
        return const(1)
    if len(p) == 1:
        (m, c), = p.items()
        return {tuple((a, e * k) for a, e in m): c**k}
    result, base = const(1), p
    while k:
        if k & 1:
            result = mul(result, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return result


def func(name, arg):
    """Apply an elementary function, folding the values that are exact."""
    if name not in FUNCTIONS:
        raise StructuralError(f"unknown function {name!r}")
    if name == "recip":
        return invert(arg)
    if is_const(arg):
        c = const_value(arg)
        if c == 0 and name == "sin":
            return {}
        if c == 0 and name in ("cos", "exp"):
            return const(1)
        if c == 1 and name == "log":
            return {}
    return atom((FUNC, name, freeze(arg)))


def term_count(p):
    return len(p)


# -- homomorphisms and derivations ----------------------------------------------


class Derivation:
    """Leibniz-rule extension of a rule given on atoms.

    ``rule(atom)`` returns the image polynomial of a non-function atom.  Function
    atoms are handled by the chain rule, so a derivation is fully determined by
    what it does to parameters, variables, jets and pressure markers.
    """

    def __init__(self, rule):
        self.rule = rule
        self.cache = {}

    def of_atom(self, a):
        r = self.cache.get(a)
        if r is None:
            r = self._chain(a) if a[0] == FUNC else self.rule(a)
            self.cache[a] = r
        return r

    def _chain(self, a):
        _, name, farg = a
        arg = dict(farg)
        darg = self(arg)
        if not darg:
            return {}
        if name == "sin":
            outer = func("cos", arg)
        elif name == "cos":
            outer = neg(func("sin", arg))
        elif name == "exp":
            outer = atom(a)
        elif name == "log":
            outer = invert(arg)
        else:  # recip
            outer = {((a, 2),): Fraction(-1)}
        return mul(outer, darg)

    def __call__(self, p):
        out = {}
        for mono, c in p.items():
            for idx, (a, e) in enumerate(mono):
                da = self.of_atom(a)
                if not da:
                    continue
                if e == 1:
                    rest = mono[:idx] + mono[idx + 1:]
                else:
                    rest = mono[:idx] + ((a, e - 1),) + mono[idx + 1:]
                coef = c * e
                for m2, c2 in da.items():
                    m = mono_mul(rest, m2)
                    v = out.get(m, 0) + coef * c2
                    if v:
                        out[m] = v
                    else:
                        out.pop(m, None)
        return out


class Homomorphism:
    """Ring map defined by images of atoms; unlisted atoms map to themselves.

    ``rule(atom)`` returns a polynomial or ``None`` (keep the atom).  Function
    atoms are rebuilt around the mapped argument.
    """

    def __init__(self, rule):
        self.rule = rule
        self.cache = {}
        self.pow_cache = {}

    def of_atom(self, a):
        r = self.cache.get(a)
        if r is None:
            if a[0] == FUNC:
                r = func(a[1], self(dict(a[2])))
            else:
                r = self.rule(a)
                if r is None:
                    r = atom(a)
            self.cache[a] = r
        return r

    def _pow(self, a, e):
        key = (a, e)
        r = self.pow_cache.get(key)
        if r is None:
            r = power(self.of_atom(a), e)
            self.pow_cache[key] = r
        return r

    def __call__(self, p):
        out = {}
        for mono, c in p.items():
            term = const(c)
            for a, e in mono:
                term = mul(term, self._pow(a, e))
                if not term:
                    break
            add_into(out, term)
        return out


_spatial = {}


def spatial(var):
    """The (cached) derivation d/d``var`` on polynomials."""
    d = _spatial.get(var)
    if d is None:

        def rule(a):
            kind = a[0]
            if kind == VAR:
                return const(1) if a[1] == var else {}
            if kind in (UNKNOWN, DERIV):
                return atom(jet(a[1], add_index(a[2], var)))
            if kind == PRESSURE:
                return atom((PRESSURE, a[1], add_index(a[2], var)))
            return {}

        d = _spatial[var] = Derivation(rule)
    return d


def differentiate(p, alpha):
    for var, count in alpha:
        d = spatial(var)
        for _ in range(count):
            p = d(p)
    return p


def atoms_of(p, acc=None):
    """All atoms occurring in ``p``, including those nested in function arguments."""
    acc = set() if acc is None else acc
    for mono in p:
        for a, _ in mono:
            if a not in acc:
                acc.add(a)
                if a[0] == FUNC:
                    atoms_of(dict(a[2]), acc)
    return acc
