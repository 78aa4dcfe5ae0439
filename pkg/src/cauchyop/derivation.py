"""The operator A as a derivation on differential polynomials.

For a system dt v_i = F_i the operator acts on expressions in the unknowns by
the rules A(v_i) = F_i, A(D^a v_i) = D^a F_i, A(const) = A(x_j) = 0, extended
by linearity, the Leibniz rule and the chain rule.  Its iterates applied to the
unknowns, with the initial data substituted, are the time-Taylor coefficients
of the solution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .expr import Sym, from_poly, lift, substitution, to_poly, to_text
from .expr import poly as P
from .system import TIME_SYMBOL, PDESystem, SemanticError

__all__ = [
    "CoefficientSeries",
    "ExpressionSwellError",
    "NonlocalTermError",
    "Operator",
    "apply_A",
    "augment_time",
    "taylor_coefficients",
]


class NonlocalTermError(ValueError):
    """The pressure marker has no symbolic image under A."""


class ExpressionSwellError(RuntimeError):
    """A coefficient exceeded the configured term budget."""

    def __init__(self, order, terms, limit):
        super().__init__(f"order {order}: {terms} terms exceeds the limit of {limit}")
        self.order = order
        self.terms = terms
        self.limit = limit


class Operator:
    """A for one system, with the images D^a F_i cached across calls."""

    def __init__(self, system, max_terms=None):
        if system.time_dependent and not system.augmented:
            raise SemanticError("time-dependent system: call augment_time first")
        if system.uses_pressure():
            raise NonlocalTermError("A is not defined symbolically on leray_pressure")
        self.system = system
        self.max_terms = max_terms
        self._rhs = {k: to_poly(v) for k, v in system.rhs.items()}
        self._images = {}
        self._clock = P.const(1) if system.augmented else None
        self.derivation = P.Derivation(self._rule)

    def _rule(self, a):
        kind = a[0]
        if kind == P.PARAM:
            return None
        if kind == P.VAR:
            return self._clock if a[1] == TIME_SYMBOL else None
        if kind in (P.UNKNOWN, P.DERIV):
            key = (a[1], a[2])
            img = self._images.get(key)
            if img is None:
                if a[1] not in self._rhs:
                    raise SemanticError(f"unknown {a[1]} not declared", a[1])
                img = P.differentiate(self._rhs[a[1]], a[2])
                self._images[key] = img
            return img
        if kind == P.PRESSURE:
            raise NonlocalTermError("A is not defined symbolically on leray_pressure")
        raise TypeError(f"unexpected atom {a!r}")

    def poly(self, p, order=None):
        out = self.derivation(p)
        if self.max_terms is not None and len(out) > self.max_terms:
            raise ExpressionSwellError(order, len(out), self.max_terms)
        return out

    def __call__(self, e):
        return from_poly(self.poly(to_poly(lift(e))))


def apply_A(e, system, max_terms=None):
    """One application of A to ``e``; canonical result."""
    return Operator(system, max_terms)(e)


def augment_time(system):
    """Make the clock ``s`` a dependent quantity with A(s) = 1."""
    if not system.time_dependent:
        raise SemanticError("augment_time needs a time_dependent system")
    if system.augmented:
        raise SemanticError("system is already augmented")
    return replace(system, augmented=True)


@dataclass
class CoefficientSeries:
    """a_0..a_N per unknown.

    ``symbolic[name][n]`` is A^n v with the unknowns kept symbolic (and the
    clock at s = 0); ``coefficients[name][n]`` has the initial data substituted
    where the system provides it.
    """

    system: PDESystem
    order: int
    coefficients: dict
    symbolic: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.coefficients[name]

    @property
    def unknowns(self):
        return self.system.unknowns

    def to_dict(self, name=None):
        names = [name] if name is not None else list(self.unknowns)
        out = [
            {
                "unknown": u,
                "order": self.order,
                "coefficients": [to_text(c) for c in self.coefficients[u]],
                "symbolic": [to_text(c) for c in self.symbolic[u]],
            }
            for u in names
        ]
        return out[0] if name is not None else out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self):
        lines = []
        for u in self.unknowns:
            for n, c in enumerate(self.coefficients[u]):
                lines.append(f"a{n}[{u}] = {to_text(c)}")
        return "\n".join(lines) + "\n"

    def scaled(self, name):
        """b_n = a_n / n! for the given unknown."""
        return [from_poly(P.scale(to_poly(c), Fraction(1, math.factorial(n))))
                for n, c in enumerate(self.coefficients[name])]


def taylor_coefficients(system, N, max_terms=None):
    """Iterate A on each unknown ``N`` times.

    Time-dependent systems are augmented first.  The clock is set to zero
    only in the stored coefficient, never in the running iterate, so that
    later applications still see A(s) = 1.
    """
    if N < 0:
        raise ValueError("order must be non-negative")
    if system.time_dependent and not system.augmented:
        system = augment_time(system)
    op = Operator(system, max_terms)
    at_zero = substitution({}, variables={TIME_SYMBOL: 0}, strict=False)
    with_init = substitution(system.init, strict=False)
    symbolic, coefficients = {}, {}
    for name in system.unknowns:
        cur = to_poly(Sym(name))
        sym_list, coef_list = [], []
        for n in range(N + 1):
            if n:
                cur = op.poly(cur, order=n)
            s0 = at_zero(cur) if system.augmented else cur
            sym_list.append(from_poly(s0))
            coef_list.append(from_poly(with_init(s0)))
        symbolic[name] = sym_list
        coefficients[name] = coef_list
    return CoefficientSeries(system, N, coefficients, symbolic)

