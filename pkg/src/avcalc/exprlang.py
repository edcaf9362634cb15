"""Scalar expression language: parser, evaluator, canonical printer.

Grammar, loosest binding first:

    expr   :=  term  (("+" | "-") term)*          left associative
    term   :=  unary (("*" | "/") unary)*         left associative
    unary  :=  "-" unary | power
    power  :=  atom ("^" unary)?                  right associative
    atom   :=  NUMBER | NAME | NAME "(" expr ("," expr)* ")" | "(" expr ")"

Numbers are decimal literals with optional fraction and exponent.
Identifiers match [A-Za-z_][A-Za-z0-9_]*.  Builtins are sin, cos, tan,
exp, log, sqrt, abs (unary) and pow (binary).

Evaluation is generic over the scalar type: plain floats use math.*,
any other scalar is expected to provide sin/cos/tan/exp/log/sqrt
methods plus the usual arithmetic dunders (see autodiff.Hyperdual).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import (
    DomainError,
    ExprSyntaxError,
    UnboundVariableError,
    UnknownFunctionError,
)

BUILTIN_ARITY = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "pow": 2,
}


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # only "-"
    child: "ExprAst"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "ExprAst"
    right: "ExprAst"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple


ExprAst = Union[Number, Var, Unary, Binary, Call]


# ---------------------------------------------------------------------------
# Lexing / parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            # skip pure whitespace tail
            if src[pos:].strip() == "":
                break
            bad = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {src[bad]!r}", bad)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected '{op}', found {text or 'end of input'!r}", off)
        self.next()

    def parse(self):
        ast = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"expected end of input, found {text!r}", off)
        return ast

    def expr(self):
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.next()
                node = Binary(text, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.next()
                node = Binary(text, node, self.unary())
            else:
                return node

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.next()
            node = self.unary()
            # fold a negated literal so "-1.5" round-trips as Number(-1.5)
            if isinstance(node, Number):
                return Number(-node.value)
            return Unary("-", node)
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.next()
            # right associative; exponent may carry a unary minus
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, text, off = self.next()
        if kind == "num":
            return Number(float(text))
        if kind == "name":
            k2, t2, _ = self.peek()
            if k2 == "op" and t2 == "(":
                if text not in BUILTIN_ARITY:
                    raise UnknownFunctionError(text, off)
                self.next()
                args = [self.expr()]
                while True:
                    k3, t3, o3 = self.peek()
                    if k3 == "op" and t3 == ",":
                        self.next()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != BUILTIN_ARITY[text]:
                    raise ExprSyntaxError(
                        f"'{text}' expects {BUILTIN_ARITY[text]} argument(s), got {len(args)}",
                        off,
                    )
                return Call(text, tuple(args))
            return Var(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"expected a number, name or '(', found {text or 'end of input'!r}", off
        )


def parse(src: str) -> ExprAst:
    """Parse expression text into an AST."""
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# Evaluation

_REAL_UNARY = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


def _is_real(x):
    return isinstance(x, (int, float))


def _pow(base, exponent):
    if _is_real(base) and _is_real(exponent):
        if base == 0.0 and exponent < 0:
            raise DomainError("zero raised to a negative power")
        if base < 0 and not float(exponent).is_integer():
            raise DomainError("fractional power of a negative base")
        try:
            return math.pow(base, exponent)
        except (ValueError, OverflowError) as exc:
            raise DomainError(str(exc)) from exc
    # autodiff (or mixed) scalars implement their own domain checks
    return base ** exponent


def _apply(name, args):
    if name == "pow":
        return _pow(args[0], args[1])
    x = args[0]
    if _is_real(x):
        try:
            return _REAL_UNARY[name](x)
        except ValueError as exc:
            raise DomainError(f"{name}: {exc}") from exc
    if name == "abs":
        return abs(x)
    return getattr(x, name)()


def evaluate(ast: ExprAst, env: dict):
    """Evaluate `ast` in `env` (name -> scalar).

    The scalar type is whatever the environment holds; plain reals and
    autodiff scalars are both fine.
    """
    if isinstance(ast, Number):
        return ast.value
    if isinstance(ast, Var):
        try:
            return env[ast.name]
        except KeyError:
            raise UnboundVariableError(ast.name) from None
    if isinstance(ast, Unary):
        return -evaluate(ast.child, env)
    if isinstance(ast, Binary):
        a = evaluate(ast.left, env)
        b = evaluate(ast.right, env)
        op = ast.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if _is_real(a) and _is_real(b):
                if b == 0.0:
                    raise DomainError("division by zero")
                return a / b
            return a / b
        return _pow(a, b)
    return _apply(ast.func, [evaluate(arg, env) for arg in ast.args])


def free_variables(ast: ExprAst) -> set:
    """Names of all Var nodes in the tree."""
    if isinstance(ast, Number):
        return set()
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Unary):
        return free_variables(ast.child)
    if isinstance(ast, Binary):
        return free_variables(ast.left) | free_variables(ast.right)
    out = set()
    for arg in ast.args:
        out |= free_variables(arg)
    return out


def to_text(ast: ExprAst) -> str:
    """Canonical, fully parenthesized rendering; re-parsing it yields a
    structurally identical AST."""
    if isinstance(ast, Number):
        text = repr(ast.value)
        # parenthesize so a negative base binds correctly under '^'
        return f"({text})" if ast.value < 0 else text
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Unary):
        return f"(-{to_text(ast.child)})"
    if isinstance(ast, Binary):
        return f"({to_text(ast.left)}{ast.op}{to_text(ast.right)})"
    return f"{ast.func}({','.join(to_text(a) for a in ast.args)})"


def substitute(ast: ExprAst, mapping: dict) -> ExprAst:
    """Replace Var nodes by expression trees (name -> ExprAst)."""
    if isinstance(ast, Var):
        return mapping.get(ast.name, ast)
    if isinstance(ast, Unary):
        return Unary(ast.op, substitute(ast.child, mapping))
    if isinstance(ast, Binary):
        return Binary(ast.op, substitute(ast.left, mapping), substitute(ast.right, mapping))
    if isinstance(ast, Call):
        return Call(ast.func, tuple(substitute(a, mapping) for a in ast.args))
    return ast


def substitute_constants(ast: ExprAst, constants: dict) -> ExprAst:
    """Replace named constants with Number nodes, leaving other Vars."""
    if isinstance(ast, Var) and ast.name in constants:
        return Number(float(constants[ast.name]))
    if isinstance(ast, Unary):
        return Unary(ast.op, substitute_constants(ast.child, constants))
    if isinstance(ast, Binary):
        return Binary(
            ast.op,
            substitute_constants(ast.left, constants),
            substitute_constants(ast.right, constants),
        )
    if isinstance(ast, Call):
        return Call(ast.func, tuple(substitute_constants(a, constants) for a in ast.args))
    return ast
