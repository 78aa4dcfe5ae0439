"""Seeded random expression trees for algebraic property checks."""

from __future__ import annotations

import random

from ..expr import Add, Deriv, Func, Mul, Num, Param, Pow, Sym, Var

__all__ = ["RandomExpressions"]


class RandomExpressions:
    """Draw raw trees over given unknowns, parameters and spatial variables.

    Depth and branching are kept small so that a few applications of the
    operator stay cheap.
    """

    def __init__(self, seed, unknowns=("u",), params=("nu",), variables=("x",), max_depth=3):
        self.rng = random.Random(seed)
        self.unknowns = tuple(unknowns)
        self.params = tuple(params)
        self.variables = tuple(variables)
        self.max_depth = max_depth

    def leaf(self):
        r = self.rng.random()
        if r < 0.45 and self.unknowns:
            u = Sym(self.rng.choice(self.unknowns))
            if self.variables and self.rng.random() < 0.4:
                order = self.rng.randint(1, 2)
                return Deriv(u, [self.rng.choice(self.variables) for _ in range(order)])
            return u
        if r < 0.6 and self.params:
            return Param(self.rng.choice(self.params))
        if r < 0.75 and self.variables:
            return Var(self.rng.choice(self.variables))
        return Num(self.rng.randint(-4, 4))

    def __call__(self, depth=None):
        depth = self.max_depth if depth is None else depth
        if depth <= 0 or self.rng.random() < 0.3:
            return self.leaf()
        r = self.rng.random()
        if r < 0.35:
            return Add([self(depth - 1) for _ in range(self.rng.randint(2, 3))])
        if r < 0.7:
            return Mul([self(depth - 1) for _ in range(2)])
        if r < 0.82:
            return Pow(self(depth - 1), Num(self.rng.randint(2, 3)))
        if r < 0.92:
            return Func(self.rng.choice(("sin", "cos", "exp")), self(depth - 1))
        return Deriv(self(depth - 1), [self.rng.choice(self.variables)]) if self.variables else self.leaf()

    def sample(self, n):
        return [self() for _ in range(n)]
