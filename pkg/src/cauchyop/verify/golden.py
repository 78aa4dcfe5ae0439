"""Built-in systems with known solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..parser import parse_expr, parse_system

__all__ = ["GOLDEN", "GoldenCase", "golden_case", "golden_names"]


@dataclass(frozen=True)
class GoldenCase:
    name: str
    spec: str
    exact: dict = field(default_factory=dict)  # unknown -> text in t and x
    order: int = 6
    omega: tuple = ()
    tol: float = 1e-8

    @property
    def system(self):
        return parse_system(self.spec)

    def exact_exprs(self):
        sys_ = self.system
        variables = set(sys_.space_vars) | {"t"}
        return {
            u: parse_expr(text, unknowns=(), variables=variables)
            for u, text in self.exact.items()
        }


_TWO_PI = (0.0, 2 * math.pi)

GOLDEN = {
    c.name: c
    for c in [
        GoldenCase(
            "transport",
            "eq: dt(u) = D(u;x);\ninit: u = exp(sin(x));\n",
            {"u": "exp(sin(x + t))"},
            omega=_TWO_PI,
        ),
        GoldenCase(
            "heat",
            "param nu = 1;\neq: dt(u) = nu*D(u;x,x);\ninit: u = sin(x);\n",
            {"u": "exp(-nu*t)*sin(x)"},
            omega=_TWO_PI,
        ),
        GoldenCase(
            "riccati",
            "param c = 0.5;\neq: dt(v) = v^2;\ninit: v = c;\n",
            {"v": "c/(1 - c*t)"},
        ),
        GoldenCase(
            "burgers",
            "param nu = 0.1;\neq: dt(v) = nu*D(v;x,x) - v*D(v;x);\ninit: v = sin(x);\n",
            order=4,
            omega=_TWO_PI,
            tol=1e-6,
        ),
        GoldenCase(
            "wave",
            "unknowns v1, v2;\neq: dt(v1) = v2;\neq: dt(v2) = D(v1;x,x);\n"
            "init: v1 = sin(x);\ninit: v2 = 0;\n",
            {"v1": "sin(x)*cos(t)", "v2": "-sin(x)*sin(t)"},
            omega=_TWO_PI,
        ),
        GoldenCase(
            "clock",
            "time_dependent;\neq: dt(v) = v + s;\ninit: v = 0;\n",
            {"v": "exp(t) - 1 - t"},
            order=8,
        ),
        GoldenCase(
            "clock0",
            "time_dependent;\neq: dt(v) = s;\ninit: v = 0;\n",
            {"v": "t^2/2"},
        ),
    ]
}


def golden_names():
    return list(GOLDEN)


def golden_case(name):
    try:
        return GOLDEN[name]
    except KeyError:
        raise KeyError(f"no built-in case {name!r}; choose from {', '.join(GOLDEN)}") from None
