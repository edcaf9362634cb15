"""Invariant suites shared by `avcalc check-all` and the test battery.

Each suite function takes a System and returns CheckResults carrying
the measured worst defect and the tolerance it was held to.  Sweep
suites (many small evaluations) default to the numpy backend to avoid
JIT warm-up; trajectory suites use the configured default backend.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import (
    VariationField,
    action_lift,
    action_quadrature,
    gauge_fixed_value,
    variation_derivative,
    variation_pairing,
)
from .affine import affine_scalar_diff, box_minus
from .dynamics import (
    GaugeClassLagrangian,
    SecondOrderPoint,
    euler_lagrange,
    gauge_shift,
    integrate_trajectory,
    legendre,
    solve_accelerations,
)
from .errors import ValidationError
from .geometry import (
    ScalarFunction,
    affine_differential,
    eval_vector,
    euclidean_atlas,
    integrate_pullback,
)
from .systems import System, bundled_systems, charged_particle, exact_lagrangian, free_particle

SEED = 20240811


@dataclass
class CheckResult:
    name: str
    defect: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return np.isfinite(self.defect) and self.defect <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: defect {self.defect:.3e} (tol {self.tol:.0e}){extra}"


def _random_points(system: System, rng, count: int):
    """(x, v, a) samples in [-1,1]^{3n}, velocities capped by the
    system's sampling half-width (relativistic representatives need
    |v| < 1)."""
    n = system.dim
    for _ in range(count):
        x = rng.uniform(-1.0, 1.0, n)
        v = rng.uniform(-system.v_halfwidth, system.v_halfwidth, n)
        a = rng.uniform(-1.0, 1.0, n)
        yield x, v, a


def _shifted(system: System, chi: str) -> GaugeClassLagrangian:
    return gauge_shift(system.lagrangian, chi)


def _chi_fn(system: System, chi: str) -> ScalarFunction:
    return ScalarFunction.from_common(system.atlas, chi)


# ---------------------------------------------------------------------------
# Structure suites

def atlas_suite(system: System, samples: int = 32, tol: float = 1e-12):
    try:
        worst = system.atlas.validate(samples=samples, tol=tol)
    except ValidationError as e:
        return [CheckResult(f"{system.name}: atlas antisymmetry+cocycle", e.defect, tol, e.invariant)]
    return [CheckResult(f"{system.name}: atlas antisymmetry+cocycle", worst, tol)]


def commutation_suite(system: System, panels: int = 1000, tol: float = 1e-8):
    """Integral of the affine differential along a curve equals the
    endpoint fiber difference of the section (pull-back commutes with d)."""
    if system.section is None or system.curve is None:
        return []
    phi, curve, atlas = system.section, system.curve, system.atlas
    sigma = affine_differential(phi, atlas)
    integral = integrate_pullback(sigma, curve, atlas, panels)
    first, last = curve.segments[0], curve.segments[-1]
    x_a = eval_vector(first.exprs, {"t": first.t0})
    x_b = eval_vector(last.exprs, {"t": last.t1})
    exact = box_minus(phi.at(x_b, last.chart_id), phi.at(x_a, first.chart_id))
    defect = abs(affine_scalar_diff(integral, exact, atlas))
    return [CheckResult(f"{system.name}: pull-back/differential commutation", defect, tol)]


# ---------------------------------------------------------------------------
# Gauge suites

def gauge_el_suite(
    system: System, points: int = 100, tol: float = 1e-9, backend: str = "numpy"
):
    """E(L + <d chi, v>) = E(L) at random second-order data."""
    rng = np.random.default_rng(SEED)
    chart = system.default_chart()
    results = []
    for chi in system.chis:
        shifted = _shifted(system, chi)
        worst = 0.0
        for x, v, a in _random_points(system, rng, points):
            q = SecondOrderPoint.of(x, v, a)
            e0 = np.asarray(euler_lagrange(system.lagrangian, q, chart, backend).p)
            e1 = np.asarray(euler_lagrange(shifted, q, chart, backend).p)
            worst = max(worst, float(np.max(np.abs(e1 - e0))))
        results.append(
            CheckResult(f"{system.name}: EL gauge invariance, chi={chi}", worst, tol)
        )
    return results


def legendre_suite(
    system: System, points: int = 10, vels: int = 10, tol: float = 1e-12,
    backend: str = "numpy",
):
    """P(L + <d chi, v>) - P(L) = d chi, independently of the velocity."""
    rng = np.random.default_rng(SEED + 1)
    chart = system.default_chart()
    n = system.dim
    results = []
    for chi in system.chis:
        shifted = _shifted(system, chi)
        fn = _chi_fn(system, chi)
        worst_shift = 0.0
        worst_vdep = 0.0
        for _ in range(points):
            x = rng.uniform(-1.0, 1.0, n)
            dchi = fn.grad(x, chart)
            diffs = []
            for _ in range(vels):
                v = rng.uniform(-system.v_halfwidth, system.v_halfwidth, n)
                p0 = np.asarray(legendre(system.lagrangian, x, v, chart, backend).p)
                p1 = np.asarray(legendre(shifted, x, v, chart, backend).p)
                diffs.append(p1 - p0)
            diffs = np.asarray(diffs)
            worst_shift = max(worst_shift, float(np.max(np.abs(diffs - dchi))))
            worst_vdep = max(worst_vdep, float(np.max(np.abs(diffs - diffs[0]))))
        results.append(
            CheckResult(f"{system.name}: Legendre shift = d(chi), chi={chi}", worst_shift, tol)
        )
        results.append(
            CheckResult(f"{system.name}: Legendre shift v-independent, chi={chi}", worst_vdep, tol)
        )
    return results


def consistency_suite(
    system: System, points: int = 20, tol: float = 1e-10, backend: str = "numpy"
):
    """euler_lagrange at the solved accelerations reproduces the forcing."""
    rng = np.random.default_rng(SEED + 2)
    chart = system.default_chart()
    worst = 0.0
    for x, v, _a in _random_points(system, rng, points):
        f = rng.uniform(-1.0, 1.0, system.dim)
        a = solve_accelerations(system.lagrangian, x, v, f, chart, backend)
        e = np.asarray(
            euler_lagrange(system.lagrangian, SecondOrderPoint.of(x, v, a), chart, backend).p
        )
        worst = max(worst, float(np.max(np.abs(e - f))))
    return [CheckResult(f"{system.name}: forced EL consistency", worst, tol)]


# ---------------------------------------------------------------------------
# Action suites

def action_equality_suite(
    system: System, panels: int = 1000, steps: int = 1000, tol: float = 1e-8
):
    """Quadrature and lift constructions of the action agree."""
    if system.curve is None:
        return []
    a = action_quadrature(system.lagrangian, system.curve, panels)
    b = action_lift(system.lagrangian, system.curve, steps)
    defect = abs(affine_scalar_diff(a, b, system.atlas))
    return [CheckResult(f"{system.name}: action quadrature = lift", defect, tol)]


def exact_action_suite(system: System, panels: int = 1000, tol: float = 1e-8):
    """For the exact Lagrangian <d(phi), v>, the action is the endpoint
    fiber difference of phi."""
    if system.section is None or system.curve is None:
        return []
    lam = exact_lagrangian(system.section)
    curve, atlas = system.curve, system.atlas
    act = action_quadrature(lam, curve, panels)
    first, last = curve.segments[0], curve.segments[-1]
    x_a = eval_vector(first.exprs, {"t": first.t0})
    x_b = eval_vector(last.exprs, {"t": last.t1})
    exact = box_minus(system.section.at(x_b, last.chart_id), system.section.at(x_a, first.chart_id))
    defect = abs(affine_scalar_diff(act, exact, atlas))
    return [CheckResult(f"{system.name}: exact-Lagrangian action", defect, tol)]


def _random_variation(rng, dim: int, a: float, b: float, vanishing: bool) -> VariationField:
    exprs = []
    for _ in range(dim):
        c = rng.uniform(-0.3, 0.3, 3)
        poly = f"({c[0]}+{c[1]}*t+{c[2]}*t^2)"
        if vanishing:
            poly = f"(t-{a})*({b}-t)*{poly}"
        exprs.append(poly)
    return VariationField.from_strings(exprs)


def variation_suite(
    system: System,
    fields: int = 10,
    panels: int = 1000,
    eps: float = 1e-5,
    tol: float = 1e-4,
    backend: str = "numpy",
):
    """Finite-difference action derivative vs the boundary+bulk pairing,
    for random polynomial variation fields with and without endpoint
    vanishing."""
    if system.curve is None:
        return []
    rng = np.random.default_rng(SEED + 3)
    curve = system.curve
    a, b = curve.t_start, curve.t_end
    worst = {True: 0.0, False: 0.0}
    for k in range(fields):
        vanishing = k % 2 == 0
        w = _random_variation(rng, system.dim, a, b, vanishing)
        fd = variation_derivative(system.lagrangian, curve, w, eps, panels)
        pair = variation_pairing(system.lagrangian, curve, w, panels, backend)
        worst[vanishing] = max(worst[vanishing], abs(fd - pair))
    return [
        CheckResult(f"{system.name}: variational identity (endpoint-vanishing w)", worst[True], tol),
        CheckResult(f"{system.name}: variational identity (general w)", worst[False], tol),
    ]


def action_gauge_suite(
    system: System, panels: int = 1000, tol: float = 1e-9, backend: str = "numpy"
):
    """Gauge behavior of the action: the fixed-trivialization value
    shifts by chi(end) - chi(start); the pairing with endpoint-vanishing
    variations does not shift at all."""
    if system.curve is None or not system.chis:
        return []
    chi = system.chis[0]
    shifted = _shifted(system, chi)
    fn = _chi_fn(system, chi)
    curve = system.curve
    s0 = gauge_fixed_value(action_quadrature(system.lagrangian, curve, panels))
    s1 = gauge_fixed_value(action_quadrature(shifted, curve, panels))
    first, last = curve.segments[0], curve.segments[-1]
    x_a = eval_vector(first.exprs, {"t": first.t0})
    x_b = eval_vector(last.exprs, {"t": last.t1})
    expected = fn(x_b, last.chart_id) - fn(x_a, first.chart_id)
    out = [
        CheckResult(
            f"{system.name}: action gauge shift = chi(b)-chi(a)", abs(s1 - s0 - expected), tol
        )
    ]
    rng = np.random.default_rng(SEED + 4)
    w = _random_variation(rng, system.dim, curve.t_start, curve.t_end, vanishing=True)
    p0 = variation_pairing(system.lagrangian, curve, w, panels, backend)
    p1 = variation_pairing(shifted, curve, w, panels, backend)
    out.append(
        CheckResult(
            f"{system.name}: pairing gauge-invariant (vanishing w)", abs(p1 - p0), tol
        )
    )
    return out


# ---------------------------------------------------------------------------
# Trajectory suites

def trajectory_gauge_suite(
    system: System,
    t1: float = 1.0,
    steps: int = 1000,
    tol: float = 1e-9,
    backend: str = None,
):
    """Trajectories are unchanged by a gauge shift of the Lagrangian."""
    if not system.chis:
        return []
    rng = np.random.default_rng(SEED + 5)
    n = system.dim
    x0 = rng.uniform(-0.5, 0.5, n)
    v0 = rng.uniform(-0.5, 0.5, n) * system.v_halfwidth
    chart = system.default_chart()
    chi = system.chis[0]
    shifted = _shifted(system, chi)
    tr0 = integrate_trajectory(system.lagrangian, x0, v0, 0.0, t1, steps, chart_id=chart, backend=backend)
    tr1 = integrate_trajectory(shifted, x0, v0, 0.0, t1, steps, chart_id=chart, backend=backend)
    defect = max(
        float(np.max(np.abs(tr0.positions - tr1.positions))),
        float(np.max(np.abs(tr0.velocities - tr1.velocities))),
    )
    return [CheckResult(f"{system.name}: trajectory gauge invariance, chi={chi}", defect, tol)]


def newton_suite(points: int = 30, tol: float = 1e-12, backend: str = "numpy"):
    """For L = m|v|^2/2 - V(x), the EL covector matches Newton's
    -dV/dx - m*a by hand."""
    atlas = euclidean_atlas(2)
    m = 1.3
    lam = GaugeClassLagrangian.from_exprs(
        atlas, "0.5*m*(v1^2+v2^2) - (sin(x1) + 0.5*x2^2)", {"m": m}
    )
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for _ in range(points):
        x = rng.uniform(-1.0, 1.0, 2)
        v = rng.uniform(-1.0, 1.0, 2)
        a = rng.uniform(-1.0, 1.0, 2)
        e = np.asarray(euler_lagrange(lam, SecondOrderPoint.of(x, v, a), "0", backend).p)
        hand = np.array([-np.cos(x[0]) - m * a[0], -x[1] - m * a[1]])
        worst = max(worst, float(np.max(np.abs(e - hand))))
    return [CheckResult("newton: EL matches hand formula", worst, tol)]


def uniform_field_regression(tol: float = 1e-10, backend: str = None):
    """Closed form x(t) = x0 + v0*t - t^2/2 for L = v^2/2 - x."""
    atlas = euclidean_atlas(1)
    lam = GaugeClassLagrangian.from_exprs(atlas, "0.5*v1^2 - x1")
    x0, v0 = 0.2, 0.8
    tr = integrate_trajectory(lam, [x0], [v0], 0.0, 1.0, 100, backend=backend)
    exact = x0 + v0 * tr.times - 0.5 * tr.times**2
    defect = float(np.max(np.abs(tr.positions[:, 0] - exact)))
    return [CheckResult("uniform field: closed-form trajectory (h=1e-2)", defect, tol)]


def lorentz_suite(step: float = 1e-4, tol: float = 1e-6, gauge_tol: float = 1e-9,
                  backend: str = None):
    """Charged particle in |B| = 1: unit-radius circle with period 2*pi,
    reproduced identically after the gauge change A -> A + d(chi)."""
    system = charged_particle(b=1.0)
    period = 2.0 * np.pi
    steps = round(period / step)
    x0 = np.array([0.0, 0.0, 0.0])
    v0 = np.array([1.0, 0.0, 0.0])
    center = np.array([0.0, -1.0, 0.0])  # x0 + (v0 x B)/|...|, radius 1
    tr = integrate_trajectory(system.lagrangian, x0, v0, 0.0, period, steps, backend=backend)
    radii = np.linalg.norm(tr.positions - center, axis=1)
    radius_defect = float(np.max(np.abs(radii - 1.0)))
    period_defect = max(
        float(np.max(np.abs(tr.positions[-1] - x0))),
        float(np.max(np.abs(tr.velocities[-1] - v0))),
    )
    shifted = gauge_shift(system.lagrangian, "sin(x1)*cos(x2)")
    tr2 = integrate_trajectory(shifted, x0, v0, 0.0, period, steps, backend=backend)
    gauge_defect = max(
        float(np.max(np.abs(tr.positions - tr2.positions))),
        float(np.max(np.abs(tr.velocities - tr2.velocities))),
    )
    return [
        CheckResult("lorentz: orbit radius = 1", radius_defect, tol),
        CheckResult("lorentz: period = 2*pi", period_defect, tol),
        CheckResult("lorentz: gauge-shifted trajectory identical", gauge_defect, gauge_tol),
    ]


def galilean_suite(points: int = 50, el_tol: float = 1e-12, traj_tol: float = 1e-9,
                   backend: str = None):
    """Free particle vs its boosted representative: identical EL outputs
    and identical trajectories."""
    from .systems import boosted_free

    free = free_particle()
    boosted = boosted_free()
    rng = np.random.default_rng(SEED + 7)
    worst = 0.0
    for x, v, a in _random_points(free, rng, points):
        q = SecondOrderPoint.of(x, v, a)
        e0 = np.asarray(euler_lagrange(free.lagrangian, q, "0", "numpy").p)
        e1 = np.asarray(euler_lagrange(boosted.lagrangian, q, "0", "numpy").p)
        worst = max(worst, float(np.max(np.abs(e1 - e0))))
    x0, v0 = np.array([0.1, -0.2]), np.array([0.4, 0.3])
    tr0 = integrate_trajectory(free.lagrangian, x0, v0, 0.0, 1.0, 1000, backend=backend)
    tr1 = integrate_trajectory(boosted.lagrangian, x0, v0, 0.0, 1.0, 1000, backend=backend)
    traj = max(
        float(np.max(np.abs(tr0.positions - tr1.positions))),
        float(np.max(np.abs(tr0.velocities - tr1.velocities))),
    )
    return [
        CheckResult("galilean: identical EL outputs", worst, el_tol),
        CheckResult("galilean: identical trajectories", traj, traj_tol),
    ]


# ---------------------------------------------------------------------------
# Batteries

PER_SYSTEM_SUITES = (
    atlas_suite,
    commutation_suite,
    gauge_el_suite,
    legendre_suite,
    consistency_suite,
    action_equality_suite,
    exact_action_suite,
    variation_suite,
    action_gauge_suite,
    trajectory_gauge_suite,
)

GLOBAL_SUITES = (
    newton_suite,
    uniform_field_regression,
    galilean_suite,
    lorentz_suite,
)


def run_system_suites(system: System):
    results = []
    for suite in PER_SYSTEM_SUITES:
        results.extend(suite(system))
    return results


def run_all(systems=None):
    """The full battery, in fixed declaration order."""
    results = []
    for system in systems if systems is not None else bundled_systems():
        results.extend(run_system_suites(system))
    for suite in GLOBAL_SUITES:
        results.extend(suite())
    return results
