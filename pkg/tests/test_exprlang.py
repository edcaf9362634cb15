import math

import pytest

from avcalc import exprlang
from avcalc.errors import (
    DomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownFunctionError,
)
from avcalc.exprlang import Binary, Call, Number, Unary, Var

from helpers_reference import random_cases, reference_eval


def ev(text, **env):
    return exprlang.evaluate(exprlang.parse(text), env)


class TestParsing:
    def test_precedence(self):
        assert ev("1+2*3") == 7.0
        assert ev("1+2*3^2") == 19.0
        assert ev("(1+2)*3") == 9.0
        assert ev("6/3/2") == 1.0  # left associative
        assert ev("2-3-4") == -5.0

    def test_power_right_associative(self):
        assert ev("2^3^2") == 512.0
        assert ev("2^-3") == 0.125
        # unary minus binds looser than the power
        assert ev("-2^2") == -4.0

    def test_unary_minus(self):
        assert ev("--3") == 3.0
        assert ev("2*-3") == -6.0

    def test_functions(self):
        assert ev("sin(0)") == 0.0
        assert ev("pow(2, 10)") == 1024.0
        assert abs(ev("exp(log(5))") - 5.0) < 1e-14
        assert ev("abs(-3)") == 3.0

    def test_variables(self):
        assert ev("x1 + 2*v1", x1=1.0, v1=2.5) == 6.0

    def test_number_formats(self):
        assert ev("1e-3") == 1e-3
        assert ev("2.5E2") == 250.0
        assert ev(".5") == 0.5


class TestErrors:
    @pytest.mark.parametrize("bad", ["", "1 +", "(1", "1)", "sin(1,2)", "pow(1)", "1 2", "@"])
    def test_syntax_error(self, bad):
        with pytest.raises(ExprSyntaxError) as exc:
            exprlang.parse(bad)
        assert exc.value.offset >= 0

    def test_syntax_error_offset_points_at_problem(self):
        with pytest.raises(ExprSyntaxError) as exc:
            exprlang.parse("1 + @")
        assert exc.value.offset == 4

    def test_unknown_function(self):
        with pytest.raises(UnknownFunctionError):
            exprlang.parse("sinh(1)")

    def test_unbound_variable(self):
        with pytest.raises(UnboundVariableError):
            ev("x1 + y")

    @pytest.mark.parametrize("expr", ["log(-1)", "log(0)", "sqrt(-2)", "1/0", "0^-1", "(-2)^0.5"])
    def test_domain_errors(self, expr):
        with pytest.raises(DomainError):
            ev(expr)


class TestIntrospection:
    def test_free_variables(self):
        ast = exprlang.parse("sin(x1)*v2 + pow(q, 2)")
        assert exprlang.free_variables(ast) == {"x1", "v2", "q"}

    def test_substitute_constants(self):
        ast = exprlang.parse("m*v1^2 + g")
        folded = exprlang.substitute_constants(ast, {"m": 2.0, "g": 9.8})
        assert exprlang.free_variables(folded) == {"v1"}
        assert exprlang.evaluate(folded, {"v1": 3.0}) == pytest.approx(2.0 * 9.0 + 9.8)

    def test_substitute_expressions(self):
        ast = exprlang.parse("x1 + x1^2")
        swapped = exprlang.substitute(ast, {"x1": exprlang.parse("t-1")})
        assert exprlang.evaluate(swapped, {"t": 3.0}) == pytest.approx(2.0 + 4.0)


class TestRoundTrip:
    def test_canonical_text_parses_back_to_same_tree(self):
        for ast, _env in random_cases(200, seed=999):
            text = exprlang.to_text(ast)
            assert exprlang.parse(text) == ast

    def test_to_text_is_fully_parenthesized(self):
        ast = Binary("*", Binary("+", Var("x1"), Number(1.0)), Var("x2"))
        text = exprlang.to_text(ast)
        reparsed = exprlang.parse(text)
        assert reparsed == ast


class TestReferenceAgreement:
    def test_matches_independent_evaluator(self):
        for ast, env in random_cases(500, seed=777):
            expected = reference_eval(ast, env)
            got = exprlang.evaluate(ast, env)
            assert got == pytest.approx(expected, rel=1e-14, abs=1e-300)

    def test_specific_values(self):
        assert ev("sin(x1)^2 + cos(x1)^2", x1=0.37) == pytest.approx(1.0, rel=1e-15)
        assert ev("pow(x1, 0.5)", x1=9.0) == pytest.approx(3.0)
        assert ev("tan(0.3)") == pytest.approx(math.tan(0.3), rel=1e-15)
