import numpy as np
import pytest

from avcalc.action import (
    VariationField,
    action_lift,
    action_quadrature,
    gauge_fixed_value,
    perturbed_curve,
    variation_derivative,
    variation_pairing,
)
from avcalc.affine import affine_scalar_diff
from avcalc.dynamics import GaugeClassLagrangian
from avcalc.geometry import CurveSpec, euclidean_atlas

BACKEND = "numpy"


@pytest.fixture(scope="module")
def free():
    atlas = euclidean_atlas(1)
    lam = GaugeClassLagrangian.from_exprs(atlas, "0.5*v1^2")
    curve = CurveSpec.single("0", ["t"], 0.0, 1.0)
    return atlas, lam, curve


class TestActionValues:
    def test_unit_speed_line(self, free):
        _atlas, lam, curve = free
        s = action_quadrature(lam, curve, panels=1000)
        assert gauge_fixed_value(s) == pytest.approx(0.5, abs=1e-10)
        s2 = action_lift(lam, curve, steps=1000)
        assert gauge_fixed_value(s2) == pytest.approx(0.5, abs=1e-10)

    def test_zero_lagrangian(self, free):
        atlas, _lam, curve = free
        zero = GaugeClassLagrangian.from_exprs(atlas, "0")
        a = action_quadrature(zero, curve, panels=10)
        b = action_lift(zero, curve, steps=10)
        assert gauge_fixed_value(a) == 0.0
        assert abs(affine_scalar_diff(a, b, atlas)) == 0.0

    def test_lift_shift_leaves_class_unchanged(self, free):
        atlas, lam, curve = free
        s = action_lift(lam, curve, steps=200)
        shifted = s.shift(3.0).shift(-3.0)
        assert abs(affine_scalar_diff(s, shifted, atlas)) < 1e-14

    def test_anchors(self, free):
        _atlas, lam, curve = free
        s = action_quadrature(lam, curve, panels=100)
        assert s.minus.base == (0.0,)
        assert s.plus.base == (1.0,)
        assert s.minus.value == 0.0

    def test_panel_validation(self, free):
        _atlas, lam, curve = free
        with pytest.raises(ValueError):
            action_quadrature(lam, curve, panels=0)
        with pytest.raises(ValueError):
            action_lift(lam, curve, steps=0)


class TestPerturbation:
    def test_perturbed_curve_positions(self, free):
        _atlas, _lam, curve = free
        w = VariationField.from_strings(["t*(1-t)"])
        moved = perturbed_curve(curve, w, 0.1)
        t = 0.5
        assert moved.position(t)[0] == pytest.approx(t + 0.1 * t * (1 - t))
        assert curve.position(t)[0] == pytest.approx(t)

    def test_zero_variation(self, free):
        _atlas, lam, curve = free
        w = VariationField.from_strings(["0"])
        assert variation_derivative(lam, curve, w) == pytest.approx(0.0, abs=1e-12)
        assert variation_pairing(lam, curve, w, backend=BACKEND) == pytest.approx(0.0, abs=1e-12)


class TestStationarity:
    def test_el_solution_is_stationary(self, free):
        # straight line solves the free EL equation; endpoint-vanishing
        # variations see a critical point
        _atlas, lam, curve = free
        w = VariationField.from_strings(["t*(1-t)"])
        assert abs(variation_derivative(lam, curve, w)) < 1e-6
        assert abs(variation_pairing(lam, curve, w, backend=BACKEND)) < 1e-8

    def test_identity_for_non_solution_curve(self):
        atlas = euclidean_atlas(1)
        lam = GaugeClassLagrangian.from_exprs(atlas, "0.5*v1^2 - sin(x1)")
        curve = CurveSpec.single("0", ["0.3*t + 0.2*t^2"], 0.0, 1.0)
        w = VariationField.from_strings(["0.1 + 0.2*t"])  # not endpoint-vanishing
        fd = variation_derivative(lam, curve, w, eps=1e-5, panels=1000)
        pair = variation_pairing(lam, curve, w, panels=1000, backend=BACKEND)
        assert fd == pytest.approx(pair, abs=1e-8)

    def test_forced_uniform_field_boundary_term(self):
        # L = v^2/2 - x along the EL solution: only boundary terms remain
        atlas = euclidean_atlas(1)
        lam = GaugeClassLagrangian.from_exprs(atlas, "0.5*v1^2 - x1")
        curve = CurveSpec.single("0", ["0.2 + 0.8*t - 0.5*t^2"], 0.0, 1.0)
        w = VariationField.from_strings(["1"])
        pair = variation_pairing(lam, curve, w, panels=500, backend=BACKEND)
        # <p(1), 1> - <p(0), 1> = (0.8 - 1.0) - 0.8 = -1.0
        assert pair == pytest.approx(-1.0, abs=1e-10)
        fd = variation_derivative(lam, curve, w, panels=500)
        assert fd == pytest.approx(-1.0, abs=1e-8)
