"""Affine action functionals and the variational pairing.

Two constructions of the action along a curve are provided: direct
quadrature of the chart representative, and the lift construction
that integrates the fiber ODE s' = L(gamma, dgamma/dt).  Both return
AffineScalars anchored at fiber points over the curve endpoints; their
affine difference vanishes (up to discretization), which is exactly the
curve-independence statement for the lifted integral.

`gauge_fixed_value` reads an AffineScalar in its own anchoring
trivialization; it is the number a fixed gauge observer reports, and
shifts by chi(end) - chi(start) under a gauge change of the Lagrangian.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import exprlang
from .affine import AffineScalar, FiberPoint
from .dynamics import GaugeClassLagrangian, euler_lagrange, legendre, SecondOrderPoint
from .errors import ChartScheduleError
from .exprlang import Binary, Number
from .geometry import (
    CurveSegment,
    CurveSpec,
    eval_vector,
    schedule_integral,
    simpson_panels,
)


@dataclass
class VariationField:
    """Variation vector field along a curve: per-coordinate expressions
    of the parameter t (components in the scheduled chart)."""

    exprs: tuple

    @classmethod
    def from_strings(cls, exprs, constants=None):
        parsed = []
        for e in exprs:
            ast = exprlang.parse(e) if isinstance(e, str) else e
            if constants:
                ast = exprlang.substitute_constants(ast, constants)
            parsed.append(ast)
        return cls(tuple(parsed))

    def __call__(self, t: float) -> np.ndarray:
        return eval_vector(self.exprs, {"t": t})


def gauge_fixed_value(s: AffineScalar) -> float:
    """Trivialization-dependent readout: plus minus minus fiber values,
    each in its own anchoring chart."""
    return s.plus.value - s.minus.value


def _lagrangian_integrand(lam: GaugeClassLagrangian, curve: CurveSpec):
    def integrand(seg: CurveSegment, t: float) -> float:
        x = eval_vector(seg.exprs, {"t": t})
        return lam.value(x, curve.velocity(t), seg.chart_id)

    return integrand


def action_quadrature(
    lam: GaugeClassLagrangian, curve: CurveSpec, panels: int = 1000
) -> AffineScalar:
    """Composite-Simpson action along the curve, with gauge offsets
    applied at chart junctions."""
    if panels < 1:
        raise ValueError("panels must be >= 1")
    return schedule_integral(curve, lam.atlas, panels, _lagrangian_integrand(lam, curve))


def action_lift(
    lam: GaugeClassLagrangian, curve: CurveSpec, steps: int = 1000
) -> AffineScalar:
    """Action via the lifted fiber ODE s'(t) = L(gamma(t), dgamma/dt),
    integrated by RK4 segment by segment.

    Shifting the initial fiber value translates the whole integral
    curve; the endpoint AffineScalar class is unchanged (the lift field
    is invariant under the structural group action).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    atlas = lam.atlas
    span = curve.t_end - curve.t_start
    s = 0.0
    for idx, seg in enumerate(curve.segments):
        seg_steps = max(1, round(steps * (seg.t1 - seg.t0) / span))
        h = (seg.t1 - seg.t0) / seg_steps

        def rate(t, seg=seg):
            x = eval_vector(seg.exprs, {"t": t})
            if not atlas.contains(seg.chart_id, x):
                raise ChartScheduleError(
                    f"curve leaves chart {seg.chart_id} at t={t} (x={x})"
                )
            return lam.value(x, curve.velocity(t), seg.chart_id)

        for k in range(seg_steps):
            t = seg.t0 + k * h
            t_next = seg.t1 if k == seg_steps - 1 else t + h
            k1 = rate(t)
            k23 = rate(0.5 * (t + t_next))
            k4 = rate(t_next)
            s += (h / 6.0) * (k1 + 4.0 * k23 + k4)
        nxt = curve.segments[idx + 1] if idx + 1 < len(curve.segments) else None
        if nxt is not None and nxt.chart_id != seg.chart_id:
            x_end = eval_vector(seg.exprs, {"t": seg.t1})
            s -= atlas.gauge_offset(x_end, seg.chart_id, nxt.chart_id)
    first, last = curve.segments[0], curve.segments[-1]
    x_a = eval_vector(first.exprs, {"t": first.t0})
    x_b = eval_vector(last.exprs, {"t": last.t1})
    return AffineScalar(
        plus=FiberPoint(last.chart_id, tuple(x_b), s),
        minus=FiberPoint(first.chart_id, tuple(x_a), 0.0),
    )


def perturbed_curve(curve: CurveSpec, w: VariationField, s: float) -> CurveSpec:
    """gamma_s(t) = gamma(t) + s * w(t), chart by chart."""
    shift = Number(float(s))
    segments = []
    for seg in curve.segments:
        exprs = tuple(
            Binary("+", e, Binary("*", shift, we)) for e, we in zip(seg.exprs, w.exprs)
        )
        segments.append(CurveSegment(seg.t0, seg.t1, seg.chart_id, exprs))
    return CurveSpec(tuple(segments))


def variation_derivative(
    lam: GaugeClassLagrangian,
    curve: CurveSpec,
    w: VariationField,
    eps: float = 1e-5,
    panels: int = 1000,
) -> float:
    """Central finite difference of the gauge-fixed action along the
    one-parameter family gamma + s*w."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    s_plus = gauge_fixed_value(action_quadrature(lam, perturbed_curve(curve, w, eps), panels))
    s_minus = gauge_fixed_value(action_quadrature(lam, perturbed_curve(curve, w, -eps), panels))
    return (s_plus - s_minus) / (2.0 * eps)


def variation_pairing(
    lam: GaugeClassLagrangian,
    curve: CurveSpec,
    w: VariationField,
    panels: int = 1000,
    backend: str = None,
) -> float:
    """Boundary-plus-bulk representation of the action differential:

        <p(b), w(b)> - <p(a), w(a)> + integral of <E(x, v, a), w>,

    with momenta and the Euler-Lagrange covector evaluated in the
    schedule's trivializations (the same anchors the finite-difference
    route uses).  The bulk term enters with the sign that matches the
    chart formula E_i = dL/dx_i - d/dt(dL/dv_i); on solutions of
    E = 0 with endpoint-vanishing variations the whole expression
    vanishes.  Curve accelerations come from differentiating the curve
    expressions, not from any trajectory discretization.
    """
    atlas = lam.atlas
    span = curve.t_end - curve.t_start
    bulk = 0.0
    for seg in curve.segments:
        seg_panels = max(1, round(panels * (seg.t1 - seg.t0) / span))

        def f(t, seg=seg):
            x = eval_vector(seg.exprs, {"t": t})
            if not atlas.contains(seg.chart_id, x):
                raise ChartScheduleError(f"curve leaves chart {seg.chart_id} at t={t}")
            e = euler_lagrange(
                lam,
                SecondOrderPoint.of(x, curve.velocity(t), curve.acceleration(t)),
                seg.chart_id,
                backend,
            )
            return float(np.dot(e.p, w(t)))

        bulk += simpson_panels(f, seg.t0, seg.t1, seg_panels)

    first, last = curve.segments[0], curve.segments[-1]
    a, b = first.t0, last.t1
    p_b = legendre(lam, curve.position(b), curve.velocity(b), last.chart_id, backend)
    p_a = legendre(lam, curve.position(a), curve.velocity(a), first.chart_id, backend)
    boundary = float(np.dot(p_b.p, w(b))) - float(np.dot(p_a.p, w(a)))
    return boundary + bulk
