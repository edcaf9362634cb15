"""Charted manifolds, value-bundle trivializations, sections, affine
1-forms and curves.

An Atlas stores, for every ordered pair of overlapping charts, the
coordinate change and the gauge cochain g_ij.  Overlaps may have
several connected components (the two-chart circle needs two), each
carrying its own coordinate box and expressions.

Sign convention (see also affine.py): g_ij is a function of chart-i
coordinates and

    section representative in chart i  =  representative in chart j  +  g_ij,
    theta_i - J^T theta_j              =  d g_ij        (affine 1-forms),
    L_i - L_j                          =  <d g_ij, v>   (Lagrangians).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import exprlang
from .affine import AffineScalar, FiberPoint
from .autodiff import Hyperdual, gradient
from .errors import ChartDisjointError, ChartScheduleError, ValidationError
from .exprlang import Binary, ExprAst, Number, Unary, Var

_BOX_TOL = 1e-9


def coord_names(dim: int):
    return [f"x{j}" for j in range(1, dim + 1)]


def coord_env(x) -> dict:
    return {f"x{j + 1}": x[j] for j in range(len(x))}


def eval_vector(exprs, env) -> np.ndarray:
    return np.array([exprlang.evaluate(e, env) for e in exprs], dtype=float)


# ---------------------------------------------------------------------------
# Sampling

_ALPHAS = [math.sqrt(p) % 1.0 for p in (2, 3, 5, 7, 11, 13)]


def low_discrepancy_points(box, count: int) -> np.ndarray:
    """Deterministic quasi-random points in the interior of a box
    (additive-recurrence sequence, 5% margin off the faces)."""
    box = np.asarray(box, dtype=float)
    dim = box.shape[0]
    lo = box[:, 0] + 0.05 * (box[:, 1] - box[:, 0])
    width = 0.9 * (box[:, 1] - box[:, 0])
    pts = np.empty((count, dim))
    for d in range(dim):
        a = _ALPHAS[d % len(_ALPHAS)]
        pts[:, d] = lo[d] + width[d] * ((0.5 + a * np.arange(1, count + 1)) % 1.0)
    return pts


# ---------------------------------------------------------------------------
# Atlas

@dataclass(frozen=True)
class Chart:
    id: str
    box: tuple  # ((lo, hi), ...) per coordinate


@dataclass(frozen=True)
class OverlapComponent:
    """One connected component of a chart overlap, in source-chart
    coordinates."""

    box: tuple
    coord_map: tuple  # target coordinates as ExprAst over x1..xn
    gauge: ExprAst  # g_ij over source coordinates


@dataclass
class Atlas:
    dim: int
    charts: list
    # (source_id, target_id) -> tuple of OverlapComponent
    transitions: dict = field(default_factory=dict)

    def chart(self, chart_id: str) -> Chart:
        for c in self.charts:
            if c.id == chart_id:
                return c
        raise ChartDisjointError(f"no chart '{chart_id}' in atlas")

    def contains(self, chart_id: str, x, tol: float = _BOX_TOL) -> bool:
        box = self.chart(chart_id).box
        return all(lo - tol <= xi <= hi + tol for xi, (lo, hi) in zip(x, box))

    def _component(self, x, src: str, dst: str) -> OverlapComponent:
        key = (src, dst)
        if key not in self.transitions:
            raise ChartDisjointError(f"no transition {src} -> {dst}")
        for comp in self.transitions[key]:
            if all(lo - _BOX_TOL <= xi <= hi + _BOX_TOL for xi, (lo, hi) in zip(x, comp.box)):
                return comp
        raise ChartDisjointError(
            f"point {np.asarray(x)} outside every overlap component of {src} -> {dst}"
        )

    def convert_point(self, x, src: str, dst: str) -> np.ndarray:
        if src == dst:
            return np.asarray(x, dtype=float)
        comp = self._component(x, src, dst)
        return eval_vector(comp.coord_map, coord_env(x))

    def gauge_offset(self, x, src: str, dst: str) -> float:
        """g_{src,dst} evaluated at x (source coordinates)."""
        if src == dst:
            return 0.0
        comp = self._component(x, src, dst)
        return float(exprlang.evaluate(comp.gauge, coord_env(x)))

    def convert_fiber(self, x, value: float, src: str, dst: str):
        """Re-chart a fiber coordinate: value_dst = value_src - g_{src,dst}(x)."""
        if src == dst:
            return np.asarray(x, dtype=float), value
        comp = self._component(x, src, dst)
        x_dst = eval_vector(comp.coord_map, coord_env(x))
        return x_dst, value - float(exprlang.evaluate(comp.gauge, coord_env(x)))

    def gauge_gradient(self, x, src: str, dst: str) -> np.ndarray:
        """d g_{src,dst} at x (source coordinates), by autodiff."""
        if src == dst:
            return np.zeros(self.dim)
        comp = self._component(x, src, dst)
        return gradient(
            lambda args, e=comp.gauge: exprlang.evaluate(
                e, {f"x{j + 1}": args[j] for j in range(self.dim)}
            ),
            x,
        )

    def jacobian(self, x, src: str, dst: str) -> np.ndarray:
        """J[k, j] = d x'_k / d x_j of the coordinate change at x."""
        comp = self._component(x, src, dst)
        jac = np.empty((self.dim, self.dim))
        for k, expr in enumerate(comp.coord_map):
            jac[k] = gradient(
                lambda args, e=expr: exprlang.evaluate(e, {f"x{j + 1}": args[j] for j in range(self.dim)}),
                x,
            )
        return jac

    # -- structural invariants ---------------------------------------------

    def validate(self, samples: int = 32, tol: float = 1e-12) -> float:
        """Check antisymmetry and the cocycle identity at sampled overlap
        points.  Returns the worst defect; raises ValidationError above tol."""
        worst = 0.0
        for (i, j), comps in self.transitions.items():
            if (j, i) not in self.transitions:
                raise ValidationError("transition antisymmetry", f"missing {j} -> {i}", math.inf)
            for comp in comps:
                for x in low_discrepancy_points(comp.box, samples):
                    g_ij = float(exprlang.evaluate(comp.gauge, coord_env(x)))
                    x_j = eval_vector(comp.coord_map, coord_env(x))
                    g_ji = self.gauge_offset(x_j, j, i)
                    defect = abs(g_ij + g_ji)
                    worst = max(worst, defect)
                    if defect > tol:
                        raise ValidationError(
                            "gauge antisymmetry g_ij + g_ji = 0",
                            f"charts ({i},{j}) at {x}",
                            defect,
                        )
        # cocycle g_ij + g_jk + g_ki = 0 on triple overlaps
        ids = [c.id for c in self.charts]
        for i in ids:
            for j in ids:
                for k in ids:
                    if len({i, j, k}) < 3:
                        continue
                    if (i, j) not in self.transitions or (i, k) not in self.transitions:
                        continue
                    for comp in self.transitions[(i, j)]:
                        for x in low_discrepancy_points(comp.box, samples):
                            try:
                                x_j = self.convert_point(x, i, j)
                                g_jk = self.gauge_offset(x_j, j, k)
                                g_ki = self.gauge_offset(self.convert_point(x_j, j, k), k, i)
                            except ChartDisjointError:
                                continue  # not in the triple overlap
                            g_ij = float(exprlang.evaluate(comp.gauge, coord_env(x)))
                            defect = abs(g_ij + g_jk + g_ki)
                            worst = max(worst, defect)
                            if defect > tol:
                                raise ValidationError(
                                    "gauge cocycle g_ij + g_jk + g_ki = 0",
                                    f"charts ({i},{j},{k}) at {x}",
                                    defect,
                                )
        return worst


def euclidean_atlas(dim: int, half_width: float = 1e6) -> Atlas:
    """Single global chart on R^n."""
    box = tuple((-half_width, half_width) for _ in range(dim))
    return Atlas(dim=dim, charts=[Chart("0", box)], transitions={})


_TWO_PI = 2.0 * math.pi


def circle_atlas(
    gauge: str = "0",
    winding: float = 0.0,
    gauge_reverse_a: Optional[str] = None,
    validate: bool = True,
) -> Atlas:
    """Two angle charts on the circle.

    Chart "0" covers (-pi, pi), chart "1" covers (0, 2*pi).  The overlap
    has two components; on the primary one (angles in (0, pi), where the
    two coordinates agree) the cochain g_01 is the given expression, on
    the secondary one it is the same expression shifted by -2*pi*winding.
    A nonzero winding makes 1-forms like "d angle" exact in the affine
    sense while no global section exists chart-wise.

    `gauge_reverse_a` overrides g_10 on the primary component; it exists
    so configuration files can build deliberately inconsistent atlases
    and exercise validation.
    """
    g = exprlang.parse(gauge)
    shift = _TWO_PI * winding
    g_b = g if shift == 0.0 else Binary("-", g, Number(shift))

    x = Var("x1")
    plus2pi = (Binary("+", x, Number(_TWO_PI)),)
    minus2pi = (Binary("-", x, Number(_TWO_PI)),)
    identity = (x,)

    neg_g_a = exprlang.parse(gauge_reverse_a) if gauge_reverse_a is not None else Unary("-", g)
    # g_10 on the secondary component lives on angles in (pi, 2*pi);
    # rewrite g_b in those coordinates and negate
    g_b_in_chart1 = exprlang.substitute(g_b, {"x1": minus2pi[0]})

    atlas = Atlas(
        dim=1,
        charts=[
            Chart("0", ((-math.pi, math.pi),)),
            Chart("1", ((0.0, _TWO_PI),)),
        ],
        transitions={
            ("0", "1"): (
                OverlapComponent(((0.0, math.pi),), identity, g),
                OverlapComponent(((-math.pi, 0.0),), plus2pi, g_b),
            ),
            ("1", "0"): (
                OverlapComponent(((0.0, math.pi),), identity, neg_g_a),
                OverlapComponent(((math.pi, _TWO_PI),), minus2pi, Unary("-", g_b_in_chart1)),
            ),
        },
    )
    if validate:
        atlas.validate()
    return atlas


# ---------------------------------------------------------------------------
# Sections and scalar functions

def _overlap_sample_pairs(atlas: Atlas, samples: int):
    """Yield (i, j, x_i, x_j, g_ij(x_i)) over sampled overlap points."""
    for (i, j), comps in atlas.transitions.items():
        for comp in comps:
            for x in low_discrepancy_points(comp.box, samples):
                env = coord_env(x)
                x_j = eval_vector(comp.coord_map, env)
                yield i, j, x, x_j, float(exprlang.evaluate(comp.gauge, env))


@dataclass
class ScalarFunction:
    """A global real function, one representative expression per chart
    (representatives must agree on overlaps)."""

    atlas: Atlas
    chart_exprs: dict  # chart_id -> ExprAst

    @classmethod
    def from_common(cls, atlas: Atlas, expr, constants=None):
        ast = exprlang.parse(expr) if isinstance(expr, str) else expr
        if constants:
            ast = exprlang.substitute_constants(ast, constants)
        return cls(atlas, {c.id: ast for c in atlas.charts})

    def __call__(self, x, chart_id: str) -> float:
        return float(exprlang.evaluate(self.chart_exprs[chart_id], coord_env(x)))

    def grad(self, x, chart_id: str) -> np.ndarray:
        expr = self.chart_exprs[chart_id]
        return gradient(
            lambda args: exprlang.evaluate(expr, {f"x{j + 1}": args[j] for j in range(len(x))}),
            x,
        )

    def validate(self, samples: int = 32, tol: float = 1e-12):
        for i, j, x_i, x_j, _g in _overlap_sample_pairs(self.atlas, samples):
            defect = abs(self(x_i, i) - self(x_j, j))
            if defect > tol:
                raise ValidationError(
                    "scalar function chart agreement", f"charts ({i},{j}) at {x_i}", defect
                )


@dataclass
class AVSection:
    """Section of the value bundle: per-chart representative expressions
    satisfying phi_i - phi_j = g_ij on overlaps."""

    atlas: Atlas
    chart_exprs: dict  # chart_id -> ExprAst

    def value(self, x, chart_id: str) -> float:
        return float(exprlang.evaluate(self.chart_exprs[chart_id], coord_env(x)))

    def at(self, x, chart_id: str) -> FiberPoint:
        return FiberPoint(chart_id, tuple(np.asarray(x, dtype=float)), self.value(x, chart_id))

    def validate(self, samples: int = 32, tol: float = 1e-12):
        for i, j, x_i, x_j, g in _overlap_sample_pairs(self.atlas, samples):
            defect = abs(self.value(x_i, i) - self.value(x_j, j) - g)
            if defect > tol:
                raise ValidationError(
                    "section compatibility phi_i - phi_j = g_ij",
                    f"charts ({i},{j}) at {x_i}",
                    defect,
                )


def gauge_transform_section(phi: AVSection, f) -> AVSection:
    """Shift a section by a real function: every representative gains f."""
    if isinstance(f, ScalarFunction):
        exprs = {cid: Binary("+", e, f.chart_exprs[cid]) for cid, e in phi.chart_exprs.items()}
    else:
        exprs = {cid: Binary("+", e, f) for cid, e in phi.chart_exprs.items()}
    return AVSection(phi.atlas, exprs)


# ---------------------------------------------------------------------------
# Affine 1-forms

@dataclass
class AffineOneForm:
    """Per-chart ordinary 1-form components with the affine compatibility
    rule theta_i - J^T theta_j = d g_ij on overlaps.

    Components are stored as evaluators x -> R^n; use from_expressions
    for the expression-backed form.
    """

    atlas: Atlas
    chart_components: dict  # chart_id -> Callable[[ndarray], ndarray]

    @classmethod
    def from_expressions(cls, atlas: Atlas, chart_exprs: dict):
        comps = {}
        for cid, exprs in chart_exprs.items():
            parsed = tuple(exprlang.parse(e) if isinstance(e, str) else e for e in exprs)
            comps[cid] = (lambda x, ps=parsed: eval_vector(ps, coord_env(x)))
        return cls(atlas, comps)

    def components(self, x, chart_id: str) -> np.ndarray:
        return self.chart_components[chart_id](np.asarray(x, dtype=float))

    def compatibility_defect(self, samples: int = 16) -> float:
        """Worst |theta_i - J^T theta_j - grad g_ij| over sampled overlaps."""
        worst = 0.0
        atlas = self.atlas
        for (i, j), comps in atlas.transitions.items():
            if i not in self.chart_components or j not in self.chart_components:
                continue
            for comp in comps:
                for x in low_discrepancy_points(comp.box, samples):
                    env = coord_env(x)
                    x_j = eval_vector(comp.coord_map, env)
                    jac = atlas.jacobian(x, i, j)
                    dg = gradient(
                        lambda args, e=comp.gauge: exprlang.evaluate(
                            e, {f"x{d + 1}": args[d] for d in range(atlas.dim)}
                        ),
                        x,
                    )
                    defect = self.components(x, i) - jac.T @ self.components(x_j, j) - dg
                    worst = max(worst, float(np.max(np.abs(defect))))
        return worst


def affine_differential(phi: AVSection, atlas: Atlas) -> AffineOneForm:
    """The affine differential d(phi): per chart, the ordinary gradient of
    the representative (computed by autodiff at evaluation points)."""
    comps = {}
    for cid, expr in phi.chart_exprs.items():
        def comp(x, e=expr, dim=atlas.dim):
            return gradient(
                lambda args: exprlang.evaluate(e, {f"x{j + 1}": args[j] for j in range(dim)}),
                x,
            )
        comps[cid] = comp
    return AffineOneForm(atlas, comps)


# ---------------------------------------------------------------------------
# Curves

@dataclass(frozen=True)
class CurveSegment:
    t0: float
    t1: float
    chart_id: str
    exprs: tuple  # per-coordinate ExprAst in the parameter "t"


@dataclass
class CurveSpec:
    """Parameterized curve with an explicit chart schedule."""

    segments: tuple

    @classmethod
    def single(cls, chart_id: str, exprs, t0: float, t1: float, constants=None):
        parsed = []
        for e in exprs:
            ast = exprlang.parse(e) if isinstance(e, str) else e
            if constants:
                ast = exprlang.substitute_constants(ast, constants)
            parsed.append(ast)
        return cls((CurveSegment(float(t0), float(t1), chart_id, tuple(parsed)),))

    @property
    def t_start(self) -> float:
        return self.segments[0].t0

    @property
    def t_end(self) -> float:
        return self.segments[-1].t1

    def segment_at(self, t: float, tol: float = 1e-9) -> CurveSegment:
        for seg in self.segments:
            if seg.t0 - tol <= t <= seg.t1 + tol:
                return seg
        raise ChartScheduleError(f"parameter {t} outside [{self.t_start}, {self.t_end}]")

    def chart_at(self, t: float) -> str:
        return self.segment_at(t).chart_id

    def position(self, t: float) -> np.ndarray:
        seg = self.segment_at(t)
        return eval_vector(seg.exprs, {"t": t})

    def velocity(self, t: float) -> np.ndarray:
        seg = self.segment_at(t)
        td = Hyperdual(t, 1.0, 0.0)
        out = np.empty(len(seg.exprs))
        for k, e in enumerate(seg.exprs):
            r = exprlang.evaluate(e, {"t": td})
            out[k] = r.d1 if isinstance(r, Hyperdual) else 0.0
        return out

    def acceleration(self, t: float) -> np.ndarray:
        seg = self.segment_at(t)
        td = Hyperdual(t, 1.0, 1.0)
        out = np.empty(len(seg.exprs))
        for k, e in enumerate(seg.exprs):
            r = exprlang.evaluate(e, {"t": td})
            out[k] = r.d12 if isinstance(r, Hyperdual) else 0.0
        return out

    def state(self, t: float):
        """(chart_id, x, v) at parameter t."""
        seg = self.segment_at(t)
        x = eval_vector(seg.exprs, {"t": t})
        return seg.chart_id, x, self.velocity(t)

    def validate(self, atlas: Atlas, tol: float = 1e-12):
        for seg in self.segments:
            if len(seg.exprs) != atlas.dim:
                raise ChartScheduleError(
                    f"segment in chart {seg.chart_id} has {len(seg.exprs)} coordinates, "
                    f"atlas dimension is {atlas.dim}"
                )
            if seg.t1 <= seg.t0:
                raise ChartScheduleError("segment with non-increasing parameter interval")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.t1 - b.t0) > 1e-14:
                raise ChartScheduleError("chart schedule has a parameter gap")
            x_end = eval_vector(a.exprs, {"t": a.t1})
            x_next = eval_vector(b.exprs, {"t": b.t0})
            if a.chart_id != b.chart_id:
                x_end = atlas.convert_point(x_end, a.chart_id, b.chart_id)
            defect = float(np.max(np.abs(x_end - x_next)))
            if defect > tol:
                raise ChartScheduleError(
                    f"junction mismatch between charts {a.chart_id} and {b.chart_id}: {defect:.3g}"
                )


# ---------------------------------------------------------------------------
# Integrals along curves

def simpson_panels(f, t0: float, t1: float, panels: int) -> float:
    """Composite Simpson rule with `panels` panels (midpoint refinement)."""
    h = (t1 - t0) / panels
    total = 0.0
    for k in range(panels):
        a = t0 + k * h
        total += f(a) + 4.0 * f(a + 0.5 * h) + f(a + h)
    return total * h / 6.0


def schedule_integral(curve: CurveSpec, atlas: Atlas, panels: int, integrand) -> AffineScalar:
    """Integrate `integrand(segment, t)` along the schedule, converting the
    accumulated fiber value across chart junctions.

    The result is an AffineScalar anchored at the curve endpoints: the
    minus anchor is the zero of the first chart's trivialization over
    gamma(a), the plus anchor carries the accumulated value over
    gamma(b) in the last chart's trivialization.
    """
    span = curve.t_end - curve.t_start
    total = 0.0
    for idx, seg in enumerate(curve.segments):
        seg_panels = max(1, round(panels * (seg.t1 - seg.t0) / span))

        def f(t, seg=seg):
            x = eval_vector(seg.exprs, {"t": t})
            if not atlas.contains(seg.chart_id, x):
                raise ChartScheduleError(
                    f"curve leaves chart {seg.chart_id} at t={t} (x={x})"
                )
            return integrand(seg, t)

        total += simpson_panels(f, seg.t0, seg.t1, seg_panels)
        nxt = curve.segments[idx + 1] if idx + 1 < len(curve.segments) else None
        if nxt is not None and nxt.chart_id != seg.chart_id:
            x_end = eval_vector(seg.exprs, {"t": seg.t1})
            total -= atlas.gauge_offset(x_end, seg.chart_id, nxt.chart_id)
    first, last = curve.segments[0], curve.segments[-1]
    x_a = eval_vector(first.exprs, {"t": first.t0})
    x_b = eval_vector(last.exprs, {"t": last.t1})
    return AffineScalar(
        plus=FiberPoint(last.chart_id, tuple(x_b), total),
        minus=FiberPoint(first.chart_id, tuple(x_a), 0.0),
    )


def curve_pullback(sigma: AffineOneForm, curve: CurveSpec, atlas: Atlas) -> Callable:
    """The integrand t -> <theta_chart(t)(gamma(t)), dgamma/dt> of the
    affine integral of sigma along the curve."""

    def integrand(t: float) -> float:
        seg = curve.segment_at(t)
        x = eval_vector(seg.exprs, {"t": t})
        if not atlas.contains(seg.chart_id, x):
            raise ChartScheduleError(f"curve leaves chart {seg.chart_id} at t={t}")
        return float(np.dot(sigma.components(x, seg.chart_id), curve.velocity(t)))

    return integrand


def integrate_pullback(
    sigma: AffineOneForm, curve: CurveSpec, atlas: Atlas, panels: int = 1000
) -> AffineScalar:
    """Affine integral of sigma along the curve (Simpson quadrature with
    junction offsets); schedule-independent as an affine scalar."""

    def integrand(seg, t):
        x = eval_vector(seg.exprs, {"t": t})
        return float(np.dot(sigma.components(x, seg.chart_id), curve.velocity(t)))

    return schedule_integral(curve, atlas, panels, integrand)
