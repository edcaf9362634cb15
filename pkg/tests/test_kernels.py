import numpy as np
import pytest

from avcalc import exprlang
from avcalc.autodiff import Hyperdual
from avcalc.kernels import (
    BACKENDS,
    compile_field,
    default_backend,
    eval_batch,
    generate_source,
)

from helpers_reference import random_cases

VARNAMES = ["x1", "x2", "x3"]


def hyperdual_reference(ast, vals, d1, d2):
    """Row-by-row evaluation through the Hyperdual scalar type."""
    out = np.empty((vals.shape[0], 4))
    for p in range(vals.shape[0]):
        env = {
            name: Hyperdual(vals[p, j], d1[p, j], d2[p, j])
            for j, name in enumerate(VARNAMES)
        }
        r = exprlang.evaluate(ast, env)
        if isinstance(r, Hyperdual):
            out[p] = (r.val, r.d1, r.d2, r.d12)
        else:
            out[p] = (r, 0.0, 0.0, 0.0)
    return out


def probe_batch(rng, k):
    return (
        rng.uniform(0.2, 1.8, (k, 3)),  # positive, clear of kinks and poles
        rng.uniform(-1.0, 1.0, (k, 3)),
        rng.uniform(-1.0, 1.0, (k, 3)),
    )


class TestBackendEquivalence:
    @pytest.mark.parametrize("backend", BACKENDS)
    def test_matches_hyperdual_reference(self, backend):
        rng = np.random.default_rng(42)
        checked = 0
        for ast, _env in random_cases(60, varnames=VARNAMES, depth=4, seed=11):
            vals, d1, d2 = probe_batch(rng, 6)
            try:
                expected = hyperdual_reference(ast, vals, d1, d2)
            except Exception:
                continue
            if not np.all(np.isfinite(expected)) or np.max(np.abs(expected)) > 1e8:
                continue
            kernel = compile_field(ast, VARNAMES, backend)
            got = eval_batch(kernel, vals, d1, d2)
            scale = np.maximum(1.0, np.abs(expected))
            assert np.max(np.abs(got - expected) / scale) < 1e-12
            checked += 1
            if checked >= 25:
                break
        assert checked >= 25

    def test_backends_agree_with_each_other(self):
        ast = exprlang.parse("sin(x1)*cos(x2) + exp(-x3^2)*x1 + sqrt(x2)/x3")
        rng = np.random.default_rng(3)
        vals, d1, d2 = probe_batch(rng, 40)
        outs = [
            eval_batch(compile_field(ast, VARNAMES, b), vals, d1, d2) for b in BACKENDS
        ]
        assert np.allclose(outs[0], outs[1], rtol=1e-14, atol=1e-14)


class TestCompilation:
    def test_cache_returns_same_kernel(self):
        ast = exprlang.parse("x1^2 + x2")
        k1 = compile_field(ast, VARNAMES, "numpy")
        k2 = compile_field(exprlang.parse("x1^2 + x2"), VARNAMES, "numpy")
        assert k1 is k2

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            compile_field(exprlang.parse("x1"), VARNAMES, "fortran")

    def test_source_shapes(self):
        ast = exprlang.parse("sin(x1) + x2*x3")
        numba_src = generate_source(ast, VARNAMES, "numba")
        numpy_src = generate_source(ast, VARNAMES, "numpy")
        assert "for p_ in range" in numba_src
        assert "for p_ in range" not in numpy_src

    def test_constant_expression(self):
        kernel = compile_field(exprlang.parse("2.5"), VARNAMES, "numpy")
        out = eval_batch(kernel, np.zeros((3, 3)), np.ones((3, 3)), np.ones((3, 3)))
        assert np.allclose(out[:, 0], 2.5)
        assert np.allclose(out[:, 1:], 0.0)


class TestDefaultBackend:
    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("AVCALC_BACKEND", "numpy")
        assert default_backend() == "numpy"

    def test_default_prefers_numba_when_available(self, monkeypatch):
        monkeypatch.delenv("AVCALC_BACKEND", raising=False)
        assert default_backend() in BACKENDS
