"""The Cauchy problem statement: unknowns, right-hand sides, initial data."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .expr import coordinate_names, normalize, symbols

TIME_SYMBOL = "s"


class SemanticError(ValueError):
    """Semantic problem with a system (undeclared unknown, bad dimension, ...)."""

    def __init__(self, message, symbol=None):
        super().__init__(message)
        self.symbol = symbol


@dataclass(frozen=True, eq=False)
class PDESystem:
    """dt v_i = F_i(x, v, D^alpha v), v_i(0, x) = u_i(x), for i over ``unknowns``.

    ``init`` may omit unknowns; their initial data then stay symbolic.  A
    ``time_dependent`` system may mention the clock symbol ``s`` in its
    right-hand sides; ``augmented`` marks the output of
    :func:`cauchyop.derivation.augment_time`.
    """

    dim: int
    unknowns: tuple
    rhs: dict
    init: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    time_dependent: bool = False
    augmented: bool = False

    def __post_init__(self):
        object.__setattr__(self, "unknowns", tuple(self.unknowns))
        object.__setattr__(self, "rhs", {k: normalize(v) for k, v in self.rhs.items()})
        object.__setattr__(self, "init", {k: normalize(v) for k, v in self.init.items()})
        object.__setattr__(self, "params", dict(self.params))
        self.validate()

    @property
    def space_vars(self):
        return coordinate_names(self.dim)

    def validate(self):
        known = set(self.unknowns)
        allowed_vars = set(self.space_vars)
        if self.time_dependent:
            allowed_vars.add(TIME_SYMBOL)
        if len(known) != len(self.unknowns):
            raise SemanticError("duplicate unknown")
        for name in self.unknowns:
            if name not in self.rhs:
                raise SemanticError(f"no equation for unknown {name}", name)
        for name, f in self.rhs.items():
            if name not in known:
                raise SemanticError(f"unknown {name} not declared", name)
            sy = symbols(f)
            for u in sorted(sy["unknowns"] - known):
                raise SemanticError(f"unknown {u} not declared", u)
            for fields in sy["pressure"]:
                for u in fields:
                    if u not in known:
                        raise SemanticError(f"unknown {u} not declared", u)
            for v in sorted(sy["vars"] - allowed_vars):
                if v == TIME_SYMBOL:
                    raise SemanticError("time symbol s used in a system not declared time_dependent", v)
                raise SemanticError(f"variable {v} not valid for dim {self.dim}", v)
        for name, u0 in self.init.items():
            if name not in known:
                raise SemanticError(f"unknown {name} not declared", name)
            sy = symbols(u0)
            if sy["unknowns"] or sy["pressure"]:
                bad = sorted(sy["unknowns"]) or ["leray_pressure"]
                raise SemanticError(f"initial data for {name} mentions unknown {bad[0]}", bad[0])
            for v in sorted(sy["vars"] - set(self.space_vars)):
                raise SemanticError(f"variable {v} not valid in initial data", v)

    def with_params(self, **values):
        params = dict(self.params)
        params.update(values)
        return replace(self, params=params)

    def param_values(self):
        missing = [k for k, v in self.params.items() if v is None]
        if missing:
            raise SemanticError(f"parameter {missing[0]} has no value", missing[0])
        return {k: float(v) for k, v in self.params.items()}

    def uses_pressure(self):
        return any(symbols(f)["pressure"] for f in self.rhs.values())

    def __eq__(self, other):
        if not isinstance(other, PDESystem):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.unknowns == other.unknowns
            and self.rhs == other.rhs
            and self.init == other.init
            and self.params == other.params
            and self.time_dependent == other.time_dependent
            and self.augmented == other.augmented
        )

    __hash__ = None
