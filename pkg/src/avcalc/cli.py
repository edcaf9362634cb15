"""Command-line front end.

Subcommands: el, legendre, integrate, action, variation, check-gauge,
check-all.  Systems come from config files (see config.py for the
format) or from the bundled names (free, uniform, charged,
relativistic, boosted, circle).  Exit codes: 0 success, 1 check or
numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import suites
from .action import (
    VariationField,
    action_lift,
    action_quadrature,
    gauge_fixed_value,
    variation_derivative,
    variation_pairing,
)
from .affine import affine_scalar_diff
from .config import load_config, split_top_level
from .dynamics import SecondOrderPoint, euler_lagrange, integrate_trajectory, legendre
from .errors import AvcalcError
from .exprlang import evaluate, free_variables, parse
from .geometry import CurveSpec
from .systems import System, bundled_system, bundled_system_names, chi_set


def _fmt(x: float) -> str:
    return "%.17g" % x


def _fmt_vec(v) -> str:
    return " ".join(_fmt(float(c)) for c in v)


def _load_system(name_or_path: str) -> System:
    if os.path.exists(name_or_path):
        return load_config(name_or_path).system
    if name_or_path in bundled_system_names():
        return bundled_system(name_or_path)
    raise AvcalcError(
        f"'{name_or_path}' is neither a config file nor a bundled system "
        f"({', '.join(bundled_system_names())})"
    )


def _vector(text: str, dim: int, what: str) -> np.ndarray:
    parts = split_top_level(text)
    if len(parts) != dim:
        raise AvcalcError(f"{what} needs {dim} components, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise AvcalcError(f"{what} components must be numbers: {text!r}")


def _curve_from_args(args, system: System) -> CurveSpec:
    if args.curve is not None:
        exprs = split_top_level(args.curve)
        if len(exprs) != system.dim:
            raise AvcalcError(f"--curve needs {system.dim} coordinate expressions")
        curve = CurveSpec.single(
            args.chart or system.default_chart(), exprs, args.t0, args.t1,
            system.constants,
        )
    elif system.curve is not None:
        curve = system.curve
    else:
        raise AvcalcError("no curve: pass --curve or add a [curve] section to the config")
    curve.validate(system.atlas)
    return curve


def _forcing_callable(system: System):
    if system.forcing is None:
        return None
    n = system.dim
    exprs = system.forcing

    def force(x, v):
        env = {f"x{j + 1}": x[j] for j in range(n)}
        env.update({f"v{j + 1}": v[j] for j in range(n)})
        return np.array([float(evaluate(e, env)) for e in exprs])

    return force


def _print_results(results) -> int:
    ok = True
    for r in results:
        print(r.line())
        ok = ok and r.passed
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Subcommands

def cmd_el(args) -> int:
    system = _load_system(args.system)
    n = system.dim
    q = SecondOrderPoint.of(
        _vector(args.x, n, "--x"), _vector(args.v, n, "--v"), _vector(args.a, n, "--a")
    )
    cov = euler_lagrange(system.lagrangian, q, args.chart or system.default_chart(), args.backend)
    print(_fmt_vec(cov.p))
    return 0


def cmd_legendre(args) -> int:
    system = _load_system(args.system)
    n = system.dim
    cov = legendre(
        system.lagrangian,
        _vector(args.x, n, "--x"),
        _vector(args.v, n, "--v"),
        args.chart or system.default_chart(),
        args.backend,
    )
    print(_fmt_vec(cov.p))
    return 0


def cmd_integrate(args) -> int:
    system = _load_system(args.system)
    n = system.dim
    tr = integrate_trajectory(
        system.lagrangian,
        _vector(args.x0, n, "--x0"),
        _vector(args.v0, n, "--v0"),
        args.t0,
        args.t1,
        args.steps,
        forcing=_forcing_callable(system),
        chart_id=args.chart or system.default_chart(),
        backend=args.backend,
    )
    header = "t," + ",".join(f"x{j}" for j in range(1, n + 1)) + "," + ",".join(
        f"v{j}" for j in range(1, n + 1)
    )
    lines = [header]
    for k in range(tr.times.shape[0]):
        row = [tr.times[k], *tr.positions[k], *tr.velocities[k]]
        lines.append(",".join(_fmt(c) for c in row))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_action(args) -> int:
    system = _load_system(args.system)
    curve = _curve_from_args(args, system)
    quad = action_quadrature(system.lagrangian, curve, args.panels)
    lift = action_lift(system.lagrangian, curve, args.steps)
    gap = abs(affine_scalar_diff(quad, lift, system.atlas))
    print(f"action_quadrature = {_fmt(gauge_fixed_value(quad))}")
    print(f"action_lift       = {_fmt(gauge_fixed_value(lift))}")
    print(f"difference        = {_fmt(gap)}")
    return 0 if gap <= args.tol else 1


def cmd_variation(args) -> int:
    system = _load_system(args.system)
    curve = _curve_from_args(args, system)
    exprs = split_top_level(args.w)
    if len(exprs) != system.dim:
        raise AvcalcError(f"--w needs {system.dim} component expressions")
    for e in exprs:
        extra = sorted(free_variables(parse(e)) - {"t"} - set(system.constants))
        if extra:
            raise AvcalcError(f"variation field uses unknown variable '{extra[0]}'")
    w = VariationField.from_strings(exprs, system.constants)
    fd = variation_derivative(system.lagrangian, curve, w, args.eps, args.panels)
    pair = variation_pairing(system.lagrangian, curve, w, args.panels, args.backend)
    gap = abs(fd - pair)
    print(f"variation_derivative = {_fmt(fd)}")
    print(f"variation_pairing    = {_fmt(pair)}")
    print(f"gap                  = {_fmt(gap)}")
    return 0 if gap <= args.tol else 1


def cmd_check_gauge(args) -> int:
    system = _load_system(args.system)
    chis = (args.chi,) if args.chi else (system.chis or tuple(chi_set(system.dim)))
    probe = System(
        name=system.name,
        atlas=system.atlas,
        lagrangian=system.lagrangian,
        constants=system.constants,
        curve=system.curve,
        chis=tuple(chis),
        v_halfwidth=system.v_halfwidth,
    )
    results = suites.gauge_el_suite(probe, points=args.points, tol=args.tol_el)
    results += suites.legendre_suite(probe, tol=args.tol_legendre)
    results += suites.trajectory_gauge_suite(probe, tol=args.tol_trajectory, backend=args.backend)
    return _print_results(results)


def cmd_check_all(args) -> int:
    if args.system:
        system = _load_system(args.system)
        results = suites.run_system_suites(system)
    else:
        results = suites.run_all()
    return _print_results(results)


# ---------------------------------------------------------------------------
# Argument plumbing

def _add_system(p, required=True):
    p.add_argument("--system", required=required, help="config file or bundled system name")
    p.add_argument("--backend", choices=("numba", "numpy"), default=None,
                   help="kernel backend (default: AVCALC_BACKEND or numba)")
    p.add_argument("--chart", default=None, help="chart id (default: first chart)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avcalc",
        description="Affine-values variational calculus: gauge-class Lagrangians, "
        "Euler-Lagrange covectors, Legendre momenta, affine actions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("el", help="evaluate the Euler-Lagrange covector at (x, v, a)")
    _add_system(p)
    p.add_argument("--x", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--a", required=True)
    p.set_defaults(run=cmd_el)

    p = sub.add_parser("legendre", help="evaluate the momentum covector at (x, v)")
    _add_system(p)
    p.add_argument("--x", required=True)
    p.add_argument("--v", required=True)
    p.set_defaults(run=cmd_legendre)

    p = sub.add_parser("integrate", help="integrate a trajectory, write CSV")
    _add_system(p)
    p.add_argument("--x0", required=True)
    p.add_argument("--v0", required=True)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--output", default=None, help="CSV path (default: stdout)")
    p.set_defaults(run=cmd_integrate)

    p = sub.add_parser("action", help="both action constructions and their difference")
    _add_system(p)
    p.add_argument("--curve", default=None, help="per-coordinate expressions in t, ';'-separated")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--panels", type=int, default=1000)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(run=cmd_action)

    p = sub.add_parser("variation", help="FD action derivative vs the boundary+bulk pairing")
    _add_system(p)
    p.add_argument("--curve", default=None)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--w", required=True, help="variation field expressions in t, ';'-separated")
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--panels", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(run=cmd_variation)

    p = sub.add_parser("check-gauge", help="gauge-invariance suite for a gauge function")
    _add_system(p)
    p.add_argument("--chi", default=None, help="gauge function of x1..xn")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--tol-el", type=float, default=1e-9)
    p.add_argument("--tol-legendre", type=float, default=1e-12)
    p.add_argument("--tol-trajectory", type=float, default=1e-9)
    p.set_defaults(run=cmd_check_gauge)

    p = sub.add_parser("check-all", help="run every invariant suite")
    _add_system(p, required=False)
    p.set_defaults(run=cmd_check_all)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except AvcalcError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
