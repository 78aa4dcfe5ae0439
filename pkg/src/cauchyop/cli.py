"""Command-line interface: expand, sum, verify, ns.

Exit codes: 0 success, 1 a verification check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import borel
from .derivation import ExpressionSwellError, NonlocalTermError, taylor_coefficients
from .expr import StructuralError
from .navier_stokes import (
    DivergenceError,
    ns_taylor_coefficients,
    random_band_limited,
    taylor_green_2d,
    taylor_green_3d,
)
from .parser import ParseError, SemanticError, parse_system
from .spectral import PeriodicGrid, write_json
from .verify.golden import GOLDEN, golden_case
from .verify.harness import equivalence_test
from .verify.reference import ns_fd_coefficients
from .verify.report import Check, VerificationReport
from .verify.suite import case_checks, golden_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

NS_FIELDS = ("taylor-green-2d", "taylor-green-3d", "random-band-limited")
DEFAULT_MAX_TERMS = 20000


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything that determines a run's outputs (the output directory excluded)."""

    command: str
    spec: str | None = None
    case: str | None = None
    suite: str | None = None
    order: int | None = None
    omega: list = field(default_factory=list)
    grid: list = field(default_factory=list)
    nu: float | None = None
    tol: float | None = None
    seed: int = 0
    times: list | None = None

    def validate(self):
        if self.order is not None and self.order < 0:
            raise InputError("--order must be non-negative")
        if self.tol is not None and not self.tol > 0:
            raise InputError("--tol must be positive")
        for n in self.grid:
            if n < 2 or n & (n - 1):
                raise InputError(f"grid size {n} is not a power of two")
        if self.omega and (len(self.omega) != 2 or not self.omega[0] < self.omega[1]):
            raise InputError("--omega takes a,b with a < b")

    def to_dict(self):
        return asdict(self)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="cauchyop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, suite=False):
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--spec", help="path to a system specification file")
        src.add_argument("--case", help="built-in case name")
        if suite:
            src.add_argument("--suite", help="named suite (golden)")
        sp.add_argument("--order", type=int, help="series order N")
        sp.add_argument("--omega", type=_floats, default=[], help="interval a,b")
        sp.add_argument("--grid", type=_ints, default=[], help="points per axis N[,N[,N]]")
        sp.add_argument("--nu", type=float, help="viscosity / parameter nu override")
        sp.add_argument("--tol", type=float, help="tolerance override")
        sp.add_argument("--out", default="cauchyop-out", help="output directory")
        sp.add_argument("--seed", type=int, default=0, help="random seed")

    common(sub.add_parser("expand", help="Taylor coefficients a_n = A^n u"))
    s = sub.add_parser("sum", help="cutoff-damped sum, radii and tail estimates")
    common(s)
    s.add_argument("--times", type=_floats, default=None, help="t lattice (default: inside the plateau)")
    common(sub.add_parser("verify", help="run verification checks"), suite=True)
    common(sub.add_parser("ns", help="Navier-Stokes coefficients on the periodic box"))
    return p


def _config(args):
    cfg = RunConfig(
        command=args.command,
        spec=getattr(args, "spec", None),
        case=getattr(args, "case", None),
        suite=getattr(args, "suite", None),
        order=args.order,
        omega=list(args.omega),
        grid=list(args.grid),
        nu=args.nu,
        tol=args.tol,
        seed=args.seed,
        times=getattr(args, "times", None),
    )
    cfg.validate()
    return cfg


def _load_system(cfg):
    if cfg.spec:
        try:
            with open(cfg.spec) as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {cfg.spec}: {exc.strerror}") from None
        system, omega = parse_system(text), None
    elif cfg.case:
        if cfg.case not in GOLDEN:
            raise InputError(f"unknown case {cfg.case!r}; choose from {', '.join(GOLDEN)}")
        case = golden_case(cfg.case)
        system, omega = case.system, case.omega
    else:
        raise InputError("give --spec PATH or --case NAME")
    if cfg.nu is not None:
        system = system.with_params(nu=cfg.nu)
    if cfg.omega:
        omega = tuple(cfg.omega)
    elif omega is None:
        omega = (0.0, 2 * math.pi) if system.dim == 1 else ()
    if cfg.command == "sum" and system.dim > 1:
        raise InputError("series summation supports dim 0 or 1")
    return system, omega


def _write_text(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _write_report(out, cfg, report, extra=None):
    os.makedirs(out, exist_ok=True)
    payload = {"config": cfg.to_dict(), "checks": report.to_list(), "pass": report.passed}
    if extra:
        payload.update(extra)
    _write_text(os.path.join(out, "report.json"), json.dumps(payload, indent=2, sort_keys=True) + "\n")
    timings = [{"name": c.name, "runtime": c.runtime} for c in report]
    _write_text(os.path.join(out, "timings.json"), json.dumps(timings, indent=2) + "\n")


# -- commands ----------------------------------------------------------------------------------


def cmd_expand(cfg, out):
    system, _ = _load_system(cfg)
    N = 4 if cfg.order is None else cfg.order
    series = taylor_coefficients(system, N, max_terms=DEFAULT_MAX_TERMS)
    os.makedirs(out, exist_ok=True)
    payload = {"config": cfg.to_dict(), "series": series.to_dict()}
    _write_text(os.path.join(out, "coefficients.json"), json.dumps(payload, indent=2, sort_keys=True) + "\n")
    table = series.table()
    _write_text(os.path.join(out, "coefficients.txt"), table)
    sys.stdout.write(table)
    return EXIT_OK


def cmd_sum(cfg, out):
    system, omega = _load_system(cfg)
    N = 8 if cfg.order is None else cfg.order
    if N < 1:
        raise InputError("sum needs --order >= 1")
    missing = [u for u in system.unknowns if u not in system.init]
    if missing:
        raise InputError(f"sum needs initial data for {', '.join(missing)}")
    series = taylor_coefficients(system, N, max_terms=DEFAULT_MAX_TERMS)
    params = system.param_values()
    nx = cfg.grid[0] if cfg.grid else 16
    xs = np.linspace(omega[0], omega[1], nx + 1) if omega else np.zeros(1)
    os.makedirs(out, exist_ok=True)
    report = VerificationReport()
    radii = {}
    for u in system.unknowns:
        ms = borel.MollifiedSeries.from_series(series, u, omega=omega, params=params)
        if cfg.times is None:
            half = borel.plateau(ms)
            ts = np.linspace(-half, half, 11)
        else:
            ts = np.asarray(cfg.times, dtype=float)
        _write_text(os.path.join(out, f"mollified_{u}.csv"), borel.lattice_csv(ms, ts, xs))
        radii[u] = [{"n": n, "beta": ms.beta[n], "r": ms.r[n]} for n in range(1, N + 1)]
        for i in range(min(3, N - 1) + 1):
            res = borel.tail_bound_check(ms, i)
            excess = max(res["lhs"] - res["rhs"], res["derivative"]["lhs"] - res["derivative"]["rhs"], 0.0)
            report.add(Check(f"tail:{u}:i={i}", excess, 0, detail={k: res[k] for k in ("lhs", "rhs", "N")}))
    write_json(os.path.join(out, "radii.json"), radii)
    _write_report(out, cfg, report)
    sys.stdout.write(report.summary() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_verify(cfg, out):
    if cfg.suite:
        if cfg.suite != "golden":
            raise InputError(f"unknown suite {cfg.suite!r}; available: golden")
        report = golden_suite(cfg.seed)
    elif cfg.case:
        if cfg.case not in GOLDEN:
            raise InputError(f"unknown case {cfg.case!r}; choose from {', '.join(GOLDEN)}")
        report = case_checks(cfg.case, cfg.order, max_terms=DEFAULT_MAX_TERMS)
    elif cfg.spec:
        system, _ = _load_system(cfg)
        N = 4 if cfg.order is None else cfg.order
        report = VerificationReport()
        try:
            report.extend(equivalence_test(system, max(N, 1), max_terms=DEFAULT_MAX_TERMS))
        except ExpressionSwellError as exc:
            report.add(Check("equivalence", math.nan, 0, "SKIP", {"reason": str(exc)}))
    else:
        raise InputError("give --suite NAME, --case NAME or --spec PATH")
    if cfg.tol is not None:
        for c in report:
            if c.status != "SKIP" and c.tol > 0:
                c.tol = cfg.tol
                c.status = "PASS" if c.error <= c.tol else "FAIL"
    _write_report(out, cfg, report)
    sys.stdout.write(report.summary() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def _ns_field(name, grid, seed):
    if name == "taylor-green-2d":
        if grid.dim != 2:
            raise InputError("taylor-green-2d needs a 2D grid")
        return taylor_green_2d(grid)
    if name == "taylor-green-3d":
        if grid.dim != 3:
            raise InputError("taylor-green-3d needs a 3D grid")
        return taylor_green_3d(grid)
    if name == "random-band-limited":
        return random_band_limited(grid, seed)
    raise InputError(f"unknown initial field {name!r}; choose from {', '.join(NS_FIELDS)}")


def cmd_ns(cfg, out):
    name = cfg.case or "taylor-green-2d"
    default_grid = [16, 16, 16] if name.endswith("3d") or name.startswith("random") else [64, 64]
    shape = cfg.grid or default_grid
    if len(shape) == 1:
        shape = shape * (3 if name.endswith("3d") else 2)
    grid = PeriodicGrid(tuple(shape))
    if grid.dim not in (2, 3):
        raise InputError("Navier-Stokes grids are 2D or 3D")
    nu = 0.1 if cfg.nu is None else cfg.nu
    if nu < 0:
        raise InputError("--nu must be non-negative")
    N = 4 if cfg.order is None else cfg.order
    u0 = _ns_field(name, grid, cfg.seed)
    report = VerificationReport()
    try:
        co = ns_taylor_coefficients(u0, nu, N)
    except DivergenceError as exc:
        report.add(Check(f"ns:divergence a{exc.n}", exc.value, exc.bound))
        _write_report(out, cfg, report)
        sys.stdout.write(report.summary() + "\n")
        return EXIT_FAIL
    manifest = co.save(out)
    for n in range(N + 1):
        rel = co.divergence[n] / max(co.a[n].max_norm(), 1e-300)
        report.add(Check(f"ns:divergence a{n}", rel if co.a[n].max_norm() > 0 else 0.0, 1e-10))
    if name == "taylor-green-2d":
        base = co.a[0].data
        for n in range(1, N + 1):
            if nu > 0:
                err = float(np.max(np.abs(co.a[n].data / (-2 * nu) ** n - base))) / float(np.max(np.abs(base)))
                report.add(Check(f"ns:decay a{n}/(-2nu)^{n}", err, cfg.tol or 1e-8))
            else:
                err = co.a[n].max_norm() / u0.max_norm()
                report.add(Check(f"ns:euler a{n}", err, cfg.tol or 1e-10))
    if name != "taylor-green-2d" and N >= 1:
        a1, a2 = ns_fd_coefficients(u0, nu)
        for k, (fd, tol) in ((1, (a1, 1e-5)), (2, (a2, 1e-4))):
            if k > N:
                break
            ref = co.a[k].data
            err = float(np.max(np.abs(fd.data - ref))) / (float(np.max(np.abs(ref))) or 1.0)
            report.add(Check(f"ns:reference a{k}", err, cfg.tol or tol))
    _write_report(out, cfg, report, {"manifest": manifest})
    sys.stdout.write(report.summary() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {"expand": cmd_expand, "sum": cmd_sum, "verify": cmd_verify, "ns": cmd_ns}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args.out)
    except ParseError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SemanticError, InputError, StructuralError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NonlocalTermError as exc:
        print(f"input error: {exc}; use the ns command for pressure systems", file=sys.stderr)
        return EXIT_INPUT
    except ExpressionSwellError as exc:
        print(f"expression swell: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
