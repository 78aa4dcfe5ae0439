"""Truncated power series in t whose coefficients are polynomials in x, u, D^a u.

This is the independent side of the series identities: it composes a
right-hand side with given series using Cauchy products and the standard
recurrences for reciprocals and elementary functions, and never applies the
operator A.
"""

from __future__ import annotations

from fractions import Fraction

from ..expr import lift, to_poly
from ..expr import poly as P

__all__ = ["Series", "compose"]


class Series:
    """c_0 + c_1 t + ... + c_N t^N with polynomial coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = [dict(x) for x in coeffs]

    @classmethod
    def constant(cls, p, N):
        return cls([p] + [{} for _ in range(N)])

    @property
    def order(self):
        return len(self.c) - 1

    def __add__(self, other):
        return Series([P.add(a, b) for a, b in zip(self.c, other.c)])

    def scale(self, k):
        return Series([P.scale(a, Fraction(k)) for a in self.c])

    def __mul__(self, other):
        N = min(self.order, other.order)
        out = []
        for k in range(N + 1):
            acc = {}
            for j in range(k + 1):
                if self.c[j] and other.c[k - j]:
                    P.add_into(acc, P.mul(self.c[j], other.c[k - j]))
            out.append(acc)
        return Series(out)

    def diff_x(self, alpha):
        return Series([P.differentiate(a, alpha) for a in self.c])

    def dt(self):
        """Term-wise d/dt; drops one order."""
        return Series([P.scale(self.c[k], k) for k in range(1, len(self.c))])

    def truncate(self, N):
        return Series(self.c[: N + 1])

    def __eq__(self, other):
        return isinstance(other, Series) and self.c == other.c

    # -- elementary functions by recurrence -------------------------------------

    def reciprocal(self):
        r0 = P.invert(self.c[0])
        r = [r0]
        for k in range(1, len(self.c)):
            acc = {}
            for j in range(1, k + 1):
                if self.c[j] and r[k - j]:
                    P.add_into(acc, P.mul(self.c[j], r[k - j]))
            r.append(P.neg(P.mul(r0, acc)))
        return Series(r)

    def _weighted(self, other, k):
        """(1/k) sum_{j=1}^k j c_j o_{k-j}."""
        acc = {}
        for j in range(1, k + 1):
            if self.c[j] and other[k - j]:
                P.add_into(acc, P.mul(self.c[j], other[k - j]), Fraction(j, k))
        return acc

    def exp(self):
        e = [P.func("exp", self.c[0])]
        for k in range(1, len(self.c)):
            e.append(self._weighted(e, k))
        return Series(e)

    def sin_cos(self):
        s = [P.func("sin", self.c[0])]
        c = [P.func("cos", self.c[0])]
        for k in range(1, len(self.c)):
            s.append(self._weighted(c, k))
            c.append(P.neg(self._weighted(s, k)))
        return Series(s), Series(c)

    def log(self):
        inv0 = P.invert(self.c[0])
        out = [P.func("log", self.c[0])]
        for k in range(1, len(self.c)):
            acc = dict(self.c[k])
            for j in range(1, k):
                if out[j] and self.c[k - j]:
                    P.add_into(acc, P.mul(out[j], self.c[k - j]), Fraction(-j, k))
            out.append(P.mul(inv0, acc))
        return Series(out)

    def power(self, e):
        if e < 0:
            return self.reciprocal().power(-e)
        result = Series.constant(P.const(1), self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result


def compose(expr, series, N, variables=None):
    """Series of ``expr`` after substituting series for its unknowns.

    ``series`` maps unknown names to :class:`Series`; a jet D^a u becomes the
    term-wise x-derivative of the series of u.  ``variables`` maps variable
    names (such as the clock ``s``) to series.  Unknowns without a series are
    an error.
    """
    variables = variables or {}
    memo = {}

    def of_atom(a):
        got = memo.get(a)
        if got is not None:
            return got
        kind = a[0]
        if kind in (P.UNKNOWN, P.DERIV):
            if a[1] not in series:
                raise KeyError(f"no series for unknown {a[1]}")
            out = series[a[1]].truncate(N).diff_x(a[2])
        elif kind == P.VAR and a[1] in variables:
            out = variables[a[1]].truncate(N)
        elif kind in (P.PARAM, P.VAR):
            out = Series.constant(P.atom(a), N)
        elif kind == P.FUNC:
            arg = of_poly(dict(a[2]))
            name = a[1]
            if name == "exp":
                out = arg.exp()
            elif name == "log":
                out = arg.log()
            elif name == "recip":
                out = arg.reciprocal()
            else:
                s, c = arg.sin_cos()
                out = s if name == "sin" else c
        else:
            raise ValueError("the pressure marker has no series composition")
        memo[a] = out
        return out

    def of_poly(p):
        total = Series.constant({}, N)
        for mono, c in p.items():
            term = Series.constant(P.const(c), N)
            for a, e in mono:
                term = term * of_atom(a).power(e)
            total = total + term
        return total

    return of_poly(to_poly(lift(expr)))
