"""Independent oracles for the test battery.

The reference evaluator here deliberately shares no code with
avcalc.exprlang.evaluate: it dispatches through tables of lambdas over
math-module functions, so agreement between the two is a real check.
"""
import math
import random

from avcalc.exprlang import Binary, Call, Number, Unary, Var

_UNARY_FNS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}

_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": lambda a, b: a ** b,
}


def reference_eval(ast, env):
    """Plain-float recursive evaluation; raises on any domain trouble."""
    if isinstance(ast, Number):
        return ast.value
    if isinstance(ast, Var):
        return env[ast.name]
    if isinstance(ast, Unary):
        assert ast.op == "-"
        return -reference_eval(ast.child, env)
    if isinstance(ast, Binary):
        return _BINOPS[ast.op](
            reference_eval(ast.left, env), reference_eval(ast.right, env)
        )
    if isinstance(ast, Call):
        if ast.func == "pow":
            return reference_eval(ast.args[0], env) ** reference_eval(ast.args[1], env)
        return _UNARY_FNS[ast.func](reference_eval(ast.args[0], env))
    raise TypeError(f"unknown node {ast!r}")


_FUNCS = ["sin", "cos", "tan", "exp", "log", "sqrt", "abs"]


def _random_ast(rng, varnames, depth):
    if depth <= 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return Number(round(rng.uniform(-3.0, 3.0), 3))
        return Var(rng.choice(varnames))
    roll = rng.random()
    if roll < 0.15:
        child = _random_ast(rng, varnames, depth - 1)
        # parser canonicalizes a negated literal into the literal
        if isinstance(child, Number):
            return Number(-child.value)
        return Unary("-", child)
    if roll < 0.40:
        return Call(rng.choice(_FUNCS), (_random_ast(rng, varnames, depth - 1),))
    if roll < 0.50:
        # constant integer exponent keeps powers single-valued
        return Binary("^", _random_ast(rng, varnames, depth - 1), Number(float(rng.randint(0, 3))))
    op = rng.choice(["+", "-", "*", "/"])
    return Binary(
        op, _random_ast(rng, varnames, depth - 1), _random_ast(rng, varnames, depth - 1)
    )


def random_cases(count, varnames=("x1", "x2", "x3"), depth=6, seed=12345):
    """Yield (ast, env) pairs whose reference value is finite and tame.

    Rejection sampling keeps the corpus away from singularities so the
    comparison tolerances are meaningful.
    """
    rng = random.Random(seed)
    produced = 0
    while produced < count:
        ast = _random_ast(rng, list(varnames), depth)
        env = {name: rng.uniform(-2.0, 2.0) for name in varnames}
        try:
            value = reference_eval(ast, env)
        except (ValueError, ZeroDivisionError, OverflowError):
            continue
        if not math.isfinite(value) or abs(value) > 1e6:
            continue
        produced += 1
        yield ast, env


def fd_gradient(f, p, step=1e-6):
    """Central finite-difference gradient of f at point list p."""
    out = []
    for i in range(len(p)):
        hi = list(p)
        lo = list(p)
        hi[i] += step
        lo[i] -= step
        out.append((f(hi) - f(lo)) / (2.0 * step))
    return out
