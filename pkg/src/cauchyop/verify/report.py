"""Check records and their JSON form."""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

__all__ = ["Check", "VerificationReport"]

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


@dataclass
class Check:
    """One measured quantity against its tolerance.

    ``status`` is PASS iff ``error <= tol``; SKIP marks checks that could not
    run (e.g. expression swell) and does not count as a failure.
    """

    name: str
    error: float
    tol: float
    status: str = ""
    detail: dict = field(default_factory=dict)
    runtime: float = 0.0

    def __post_init__(self):
        if not self.status:
            self.status = PASS if self.error <= self.tol else FAIL

    @property
    def passed(self):
        return self.status != FAIL

    def to_dict(self, with_runtime=False):
        err = self.error
        out = {
            "name": self.name,
            "error": err if math.isfinite(err) else repr(err),
            "tol": self.tol,
            "status": self.status,
            "pass": self.status == PASS,
            "detail": self.detail,
        }
        if with_runtime:
            out["runtime"] = self.runtime
        return out


class VerificationReport:
    def __init__(self, checks=None):
        self.checks = list(checks or [])

    def add(self, check):
        self.checks.append(check)
        return check

    def extend(self, other):
        self.checks.extend(other.checks)
        return self

    @contextmanager
    def timed(self):
        """Assign the elapsed wall time to every check added inside the block."""
        start, first = time.perf_counter(), len(self.checks)
        yield self
        elapsed = time.perf_counter() - start
        for c in self.checks[first:]:
            c.runtime = elapsed

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if c.status == FAIL]

    def to_list(self, with_runtime=False):
        return [c.to_dict(with_runtime) for c in self.checks]

    def to_json(self, with_runtime=False):
        """Deterministic JSON; runtimes only when asked, as they vary per run."""
        return json.dumps(self.to_list(with_runtime), indent=2, sort_keys=True) + "\n"

    def summary(self):
        lines = [f"{c.status:4s}  {c.name}  error={c.error:.3e}  tol={c.tol:.1e}" for c in self.checks]
        n_fail = len(self.failures())
        lines.append(f"{len(self.checks)} checks, {n_fail} failed")
        return "\n".join(lines)

    def __iter__(self):
        return iter(self.checks)

    def __len__(self):
        return len(self.checks)
