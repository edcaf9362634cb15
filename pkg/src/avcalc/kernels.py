"""Compiled evaluation kernels for expression fields.

An expression over named variables is compiled once into straight-line
code that propagates second-order forward-mode components
(val, d1, d2, d12) for a batch of seed "probes".  Two backends share the
same generated arithmetic:

  * "numba": a scalar loop over probes, @njit compiled -- the hot path
    for trajectory integration;
  * "numpy": the same body vectorized over the probe axis -- the
    dependency-free fallback, and the fast choice for large batches.

Select globally with the AVCALC_BACKEND environment variable ("numba"
or "numpy"); the default is numba when it imports, numpy otherwise.

Kernel signature: kernel(vals, d1, d2, out) with vals/d1/d2 of shape
(probes, nvars) and out of shape (probes, 4).  Row p evaluates the
expression at point vals[p] with first-order seeds d1[p], d2[p];
out[p] = (value, directional derivative 1, directional derivative 2,
mixed second derivative).
"""
from __future__ import annotations

import math
import os

import numpy as np

from .exprlang import Binary, Call, ExprAst, Number, Unary, Var, free_variables, to_text

try:  # pragma: no cover - exercised indirectly via backend selection
    import numba

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

BACKENDS = ("numba", "numpy")


def default_backend() -> str:
    env = os.environ.get("AVCALC_BACKEND", "").strip().lower()
    if env in BACKENDS:
        if env == "numba" and not _HAVE_NUMBA:
            raise RuntimeError("AVCALC_BACKEND=numba but numba is not importable")
        return env
    return "numba" if _HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Code generation

def _lit(atom):
    try:
        return float(atom)
    except ValueError:
        return None


_ZERO = "0.0"
_ONE = "1.0"


class _Emitter:
    def __init__(self, backend):
        self.lines = []
        self.count = 0
        self.backend = backend

    def tmp(self, expr: str) -> str:
        name = f"t{self.count}"
        self.count += 1
        self.lines.append(f"{name} = {expr}")
        return name

    def fn(self, name: str) -> str:
        if self.backend == "numpy":
            return {"abs": "np.abs"}.get(name, f"np.{name}")
        return {"abs": "abs"}.get(name, f"math.{name}")

    def sign(self, atom: str) -> str:
        if self.backend == "numpy":
            return self.tmp(f"np.sign({atom})")
        return self.tmp(f"(1.0 if {atom} > 0.0 else (-1.0 if {atom} < 0.0 else 0.0))")

    # folding arithmetic on atoms (literals or temp names)

    def neg(self, x):
        lx = _lit(x)
        if lx is not None:
            return repr(-lx)
        return self.tmp(f"-{x}")

    def add(self, x, y):
        lx, ly = _lit(x), _lit(y)
        if lx == 0.0:
            return y
        if ly == 0.0:
            return x
        if lx is not None and ly is not None:
            return repr(lx + ly)
        return self.tmp(f"{x} + {y}")

    def sub(self, x, y):
        lx, ly = _lit(x), _lit(y)
        if ly == 0.0:
            return x
        if lx == 0.0:
            return self.neg(y)
        if lx is not None and ly is not None:
            return repr(lx - ly)
        return self.tmp(f"{x} - {y}")

    def mul(self, x, y):
        lx, ly = _lit(x), _lit(y)
        if lx == 0.0 or ly == 0.0:
            return _ZERO
        if lx == 1.0:
            return y
        if ly == 1.0:
            return x
        if lx is not None and ly is not None:
            return repr(lx * ly)
        return self.tmp(f"{x} * {y}")

    def div(self, x, y):
        lx, ly = _lit(x), _lit(y)
        if lx == 0.0:
            return _ZERO
        if ly == 1.0:
            return x
        if lx is not None and ly is not None and ly != 0.0:
            return repr(lx / ly)
        return self.tmp(f"{x} / {y}")

    def powc(self, x, p: float):
        """x**p for a compile-time real exponent."""
        if p == 0.0:
            return _ONE
        if p == 1.0:
            return x
        lx = _lit(x)
        if lx is not None:
            return repr(lx ** p)
        if p == 2.0:
            return self.tmp(f"{x} * {x}")
        return self.tmp(f"{x} ** ({p!r})")


def _quad_is_const(q):
    return q[1] == _ZERO and q[2] == _ZERO and q[3] == _ZERO


_FOLD = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "log": math.log, "sqrt": math.sqrt, "abs": abs,
}


def _apply_unary(name, u, em: _Emitter):
    uv, ua, ub, uc = u
    lv = _lit(uv)
    if lv is not None and _quad_is_const(u):
        try:
            return (repr(float(_FOLD[name](lv))), _ZERO, _ZERO, _ZERO)
        except ValueError:
            pass  # leave the domain error to runtime
    v = em.tmp(f"{em.fn(name)}({uv})")
    if _quad_is_const(u):
        return (v, _ZERO, _ZERO, _ZERO)
    need_dd = ua != _ZERO and ub != _ZERO
    if name == "sin":
        d = em.tmp(f"{em.fn('cos')}({uv})")
        dd = em.neg(v) if need_dd else _ZERO
    elif name == "cos":
        d = em.neg(em.tmp(f"{em.fn('sin')}({uv})"))
        dd = em.neg(v) if need_dd else _ZERO
    elif name == "tan":
        d = em.add(_ONE, em.mul(v, v))
        dd = em.mul("2.0", em.mul(v, d)) if need_dd else _ZERO
    elif name == "exp":
        d = v
        dd = v
    elif name == "log":
        d = em.div(_ONE, uv)
        dd = em.neg(em.mul(d, d)) if need_dd else _ZERO
    elif name == "sqrt":
        d = em.div("0.5", v)
        dd = em.neg(em.div(em.mul("0.5", d), uv)) if need_dd else _ZERO
    elif name == "abs":
        d = em.sign(uv)
        dd = _ZERO
    else:  # pragma: no cover
        raise ValueError(f"no kernel rule for '{name}'")
    a = em.mul(d, ua)
    b = em.mul(d, ub)
    c = em.add(em.mul(d, uc), em.mul(em.mul(dd, ua), ub))
    return (v, a, b, c)


def _apply_pow_const(u, p: float, em: _Emitter):
    uv, ua, ub, uc = u
    v = em.powc(uv, p)
    if _quad_is_const(u):
        return (v, _ZERO, _ZERO, _ZERO)
    d = em.mul(repr(p), em.powc(uv, p - 1.0))
    a = em.mul(d, ua)
    b = em.mul(d, ub)
    if ua != _ZERO and ub != _ZERO:
        dd = em.mul(repr(p * (p - 1.0)), em.powc(uv, p - 2.0))
        c = em.add(em.mul(d, uc), em.mul(em.mul(dd, ua), ub))
    else:
        c = em.mul(d, uc)
    return (v, a, b, c)


def _combine_mul(u, w, em: _Emitter):
    uv, ua, ub, uc = u
    wv, wa, wb, wc = w
    v = em.mul(uv, wv)
    a = em.add(em.mul(uv, wa), em.mul(ua, wv))
    b = em.add(em.mul(uv, wb), em.mul(ub, wv))
    c = em.add(
        em.add(em.mul(uv, wc), em.mul(ua, wb)),
        em.add(em.mul(ub, wa), em.mul(uc, wv)),
    )
    return (v, a, b, c)


def _combine_div(u, w, em: _Emitter):
    uv, ua, ub, uc = u
    wv, wa, wb, wc = w
    qv = em.div(uv, wv)
    qa = em.div(em.sub(ua, em.mul(qv, wa)), wv)
    qb = em.div(em.sub(ub, em.mul(qv, wb)), wv)
    qc = em.div(
        em.sub(em.sub(em.sub(uc, em.mul(qa, wb)), em.mul(qb, wa)), em.mul(qv, wc)),
        wv,
    )
    return (qv, qa, qb, qc)


def _walk(ast: ExprAst, em: _Emitter, slots: dict):
    if isinstance(ast, Number):
        return (repr(float(ast.value)), _ZERO, _ZERO, _ZERO)
    if isinstance(ast, Var):
        return slots[ast.name]
    if isinstance(ast, Unary):
        u = _walk(ast.child, em, slots)
        return tuple(em.neg(c) if c != _ZERO else _ZERO for c in u)
    if isinstance(ast, Binary):
        if ast.op == "^":
            u = _walk(ast.left, em, slots)
            if isinstance(ast.right, Number):
                return _apply_pow_const(u, float(ast.right.value), em)
            w = _walk(ast.right, em, slots)
            if _quad_is_const(w) and _lit(w[0]) is not None:
                return _apply_pow_const(u, _lit(w[0]), em)
            # general exponent: exp(w * log(u))
            lg = _apply_unary("log", u, em)
            return _apply_unary("exp", _combine_mul(w, lg, em), em)
        u = _walk(ast.left, em, slots)
        w = _walk(ast.right, em, slots)
        if ast.op == "+":
            return tuple(em.add(a, b) for a, b in zip(u, w))
        if ast.op == "-":
            return tuple(em.sub(a, b) for a, b in zip(u, w))
        if ast.op == "*":
            return _combine_mul(u, w, em)
        return _combine_div(u, w, em)
    # Call
    if ast.func == "pow":
        return _walk(Binary("^", ast.args[0], ast.args[1]), em, slots)
    return _apply_unary(ast.func, _walk(ast.args[0], em, slots), em)


def generate_source(ast: ExprAst, varnames, backend: str) -> str:
    """Render kernel source text for one backend."""
    em = _Emitter(backend)
    used = free_variables(ast)
    slots = {}
    preamble = []
    for j, name in enumerate(varnames):
        if name not in used:
            continue
        if backend == "numba":
            vv, aa, bb = f"vals[p_,{j}]", f"d1[p_,{j}]", f"d2[p_,{j}]"
        else:
            vv, aa, bb = f"vals[:,{j}]", f"d1[:,{j}]", f"d2[:,{j}]"
        v = f"w{j}"
        a = f"w{j}a"
        b = f"w{j}b"
        preamble += [f"{v} = {vv}", f"{a} = {aa}", f"{b} = {bb}"]
        slots[name] = (v, a, b, _ZERO)
    missing = used - set(varnames)
    if missing:
        raise ValueError(f"expression uses undeclared variables {sorted(missing)}")
    result = _walk(ast, em, slots)
    body = preamble + em.lines
    if backend == "numba":
        body += [f"out[p_,{k}] = {result[k]}" for k in range(4)]
        inner = "\n".join("        " + ln for ln in body)
        return (
            "def _kernel(vals, d1, d2, out):\n"
            "    for p_ in range(vals.shape[0]):\n" + inner + "\n"
        )
    body += [f"out[:,{k}] = {result[k]}" for k in range(4)]
    inner = "\n".join("    " + ln for ln in body)
    return "def _kernel(vals, d1, d2, out):\n" + inner + "\n"


_CACHE = {}


def compile_field(ast: ExprAst, varnames, backend: str = None):
    """Compile an expression into a batched second-order evaluator.

    Returns kernel(vals, d1, d2, out); see the module docstring for the
    array contract.  Compiled kernels are cached per (expression,
    variable layout, backend).
    """
    if backend is None:
        backend = default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend '{backend}'")
    key = (to_text(ast), tuple(varnames), backend)
    fn = _CACHE.get(key)
    if fn is not None:
        return fn
    src = generate_source(ast, varnames, backend)
    ns = {"math": math, "np": np}
    exec(compile(src, f"<avcalc kernel {backend}>", "exec"), ns)
    fn = ns["_kernel"]
    if backend == "numba":
        fn = numba.njit(cache=False)(fn)
    _CACHE[key] = fn
    return fn


def eval_batch(kernel, vals, d1, d2) -> np.ndarray:
    """Convenience wrapper allocating the output array."""
    vals = np.ascontiguousarray(vals, dtype=float)
    d1 = np.ascontiguousarray(d1, dtype=float)
    d2 = np.ascontiguousarray(d2, dtype=float)
    out = np.empty((vals.shape[0], 4))
    kernel(vals, d1, d2, out)
    return out
