"""Differentiation, substitution and numeric evaluation of expressions."""

from __future__ import annotations

import numpy as np

from . import poly as P
from .nodes import coordinate_names, from_poly, lift, to_poly


class UnboundSymbolError(KeyError):
    def __init__(self, name, kind="unknown"):
        super().__init__(name)
        self.name = name
        self.kind = kind

    def __str__(self):
        return f"{self.kind} {self.name!r} is not bound"


class EvaluationDomainError(ValueError):
    pass


def var_name(j, dim=None):
    """Name of spatial dimension ``j`` (0-based); strings pass through."""
    if isinstance(j, str):
        return j
    if dim is None or dim > 1:
        return f"x{j + 1}"
    if j != 0:
        raise IndexError(f"dimension index {j} out of range for dim={dim}")
    return "x"


def spatial_derivative(e, j, dim=None):
    """Total derivative d/dx_j of ``e``, canonical.

    ``j`` is a variable name (``"x"``, ``"x2"``) or a 0-based dimension index;
    with an index, ``dim`` decides between ``x`` and ``x1..xn`` naming.
    """
    var = var_name(j, dim)
    return from_poly(P.spatial(var)(to_poly(lift(e))))


def derivative_poly(p, var):
    return P.spatial(var)(p)


def substitute(e, bindings, *, variables=None, strict=True):
    """Replace unknowns (and optionally variables) by expressions.

    ``bindings`` maps unknown names to expressions; a derivative D^alpha u is
    replaced by D^alpha of the bound expression.  ``variables`` maps variable
    or parameter names to expressions (used e.g. for ``t -> 0``).  With
    ``strict`` every unknown in ``e`` must be bound.
    """
    return from_poly(substitute_poly(to_poly(lift(e)), bindings, variables=variables, strict=strict))


def substitute_poly(p, bindings, *, variables=None, strict=True):
    return substitution(bindings, variables=variables, strict=strict)(p)


def substitution(bindings, *, variables=None, strict=True):
    """Build a reusable :class:`~cauchyop.expr.poly.Homomorphism` for a binding set."""
    bound = {k: to_poly(lift(v)) for k, v in (bindings or {}).items()}
    vbound = {k: to_poly(lift(v)) for k, v in (variables or {}).items()}

    def rule(a):
        kind = a[0]
        if kind in (P.UNKNOWN, P.DERIV):
            if a[1] in bound:
                return P.differentiate(bound[a[1]], a[2])
            if strict:
                raise UnboundSymbolError(a[1])
            return None
        if kind in (P.VAR, P.PARAM):
            return vbound.get(a[1])
        return None

    return P.Homomorphism(rule)


def symbols(e):
    """Names appearing in ``e``: dict with keys unknowns, params, vars, fields."""
    p = to_poly(lift(e))
    out = {"unknowns": set(), "params": set(), "vars": set(), "pressure": set()}
    for a in P.atoms_of(p):
        kind = a[0]
        if kind in (P.UNKNOWN, P.DERIV):
            out["unknowns"].add(a[1])
            out["vars"].update(v for v, _ in a[2])
        elif kind == P.PARAM:
            out["params"].add(a[1])
        elif kind == P.VAR:
            out["vars"].add(a[1])
        elif kind == P.PRESSURE:
            out["pressure"].add(a[1])
            out["vars"].update(v for v, _ in a[2])
    return out


# -- numeric evaluation ---------------------------------------------------------------

_NUMPY = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


def _apply(name, v):
    if name == "log":
        if np.any(np.asarray(v) <= 0):
            raise EvaluationDomainError("log of a non-positive value")
        return np.log(v)
    if name == "recip":
        if np.any(np.asarray(v) == 0):
            raise EvaluationDomainError("reciprocal of zero")
        return 1.0 / v
    return _NUMPY[name](v)


class Evaluator:
    """Numeric evaluation of polynomials with per-call atom caching.

    ``env`` maps variable and parameter names to numbers or arrays; ``jets``
    maps jet atoms ``(name, alpha)`` to values (used by method-of-lines
    integration, where the unknown and its derivatives are sampled).
    """

    def __init__(self, env, jets=None):
        self.env = env
        self.jets = jets or {}
        self.cache = {}

    def atom(self, a):
        v = self.cache.get(a)
        if v is not None:
            return v
        kind = a[0]
        if kind in (P.PARAM, P.VAR):
            if a[1] not in self.env:
                raise UnboundSymbolError(a[1], "parameter" if kind == P.PARAM else "variable")
            v = self.env[a[1]]
        elif kind in (P.UNKNOWN, P.DERIV):
            key = (a[1], a[2])
            if key not in self.jets:
                raise UnboundSymbolError(a[1])
            v = self.jets[key]
        elif kind == P.FUNC:
            v = _apply(a[1], self(dict(a[2])))
        else:
            raise UnboundSymbolError("leray_pressure", "nonlocal marker")
        self.cache[a] = v
        return v

    def __call__(self, p):
        total = 0.0
        for mono, c in sorted(p.items()):
            term = float(c)
            for a, e in mono:
                base = self.atom(a)
                if e < 0 and np.any(np.asarray(base) == 0):
                    raise EvaluationDomainError("negative power of zero")
                term = term * (base**e if e != 1 else base)
            total = total + term
        return total


def evaluate(e, env=None, jets=None):
    """Evaluate ``e`` with numpy broadcasting over array-valued ``env`` entries."""
    env = {k: np.asarray(v, dtype=float) if np.ndim(v) else float(v) for k, v in (env or {}).items()}
    return Evaluator(env, jets)(to_poly(lift(e)))


def eval_pointwise(e, point, params=None):
    """IEEE double value of a closed-form expression at one point.

    ``point`` is a mapping of variable names to numbers or a sequence of
    coordinates (assigned to ``x`` or ``x1..xn``).
    """
    if not isinstance(point, dict):
        coords = list(point) if np.ndim(point) else [point]
        point = dict(zip(coordinate_names(len(coords)), coords))
    env = {k: float(v) for k, v in point.items()}
    env.update({k: float(v) for k, v in (params or {}).items()})
    try:
        return float(evaluate(e, env))
    except (OverflowError, ZeroDivisionError) as exc:
        raise EvaluationDomainError(str(exc)) from exc


