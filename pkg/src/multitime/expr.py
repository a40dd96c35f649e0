"""Small arithmetic expression language used for Hamiltonians, vector fields
and Hamilton-Jacobi functions.

Grammar (standard precedence, ``^`` right-associative and tighter than
``* /``, which are tighter than ``+ -``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := number | name | name '(' expr ')' | '(' expr ')'

Known functions: sin, cos, exp, log, sqrt, abs, tanh.

Variable naming convention used throughout the package: time variables
``t1..tn``; position components ``xJ_D`` and momentum components ``pJ_D``
for particle ``J`` in 1..n and dimension ``D`` in 1..d.  The single-time
forms additionally use the bare variable ``t``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

__all__ = [
    "Expression",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExpressionError",
    "ExpressionSyntaxError",
    "UnknownFunctionError",
    "UnboundVariableError",
    "DomainError",
    "parse_expression",
    "evaluate",
    "free_variables",
    "to_string",
]


class ExpressionError(Exception):
    """Base class for expression language errors."""


class ExpressionSyntaxError(ExpressionError):
    """Malformed source text; ``column`` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class UnknownFunctionError(ExpressionSyntaxError):
    """A call to a function that is not in the supported set."""


class UnboundVariableError(ExpressionError):
    """Evaluation hit a variable with no binding."""


class DomainError(ExpressionError):
    """Evaluation left the real domain (log of non-positive, sqrt of
    negative, division by zero, overflow)."""


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expression"


Expression = Num | Var | Neg | BinOp | Call

FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "tanh": math.tanh,
}

_TOKEN_RE = re.compile(
    r"""
    (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
    """,
    re.VERBOSE,
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {source[pos]!r}", pos + 1
            )
        if m.lastgroup != "ws":
            kind = m.lastgroup
            tokens.append((kind, m.group(), m.start() + 1))
        pos = m.end()
    tokens.append(("end", "", len(source) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, value, col = self.peek()
        if kind != "op" or value != op:
            shown = value if value else "end of input"
            raise ExpressionSyntaxError(f"expected {op!r}, found {shown!r}", col)
        self.advance()

    def parse_expr(self) -> Expression:
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                node = BinOp(value, node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Expression:
        node = self.parse_unary()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                node = BinOp(value, node, self.parse_unary())
            else:
                return node

    def parse_unary(self) -> Expression:
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expression:
        base = self.parse_atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> Expression:
        kind, value, col = self.advance()
        if kind == "num":
            return Num(float(value))
        if kind == "name":
            nkind, nvalue, _ = self.peek()
            if nkind == "op" and nvalue == "(":
                if value not in FUNCTIONS:
                    raise UnknownFunctionError(f"unknown function {value!r}", col)
                self.advance()
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(value, arg)
            return Var(value)
        if kind == "op" and value == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        shown = value if value else "end of input"
        raise ExpressionSyntaxError(f"unexpected {shown!r}", col)


def parse_expression(source: str) -> Expression:
    """Parse ``source`` into an immutable AST.

    Raises ExpressionSyntaxError (with 1-based column) on malformed input
    and UnknownFunctionError on calls outside the supported function set.
    """
    if not source or not source.strip():
        raise ExpressionSyntaxError("empty expression", 1)
    parser = _Parser(_tokenize(source))
    node = parser.parse_expr()
    kind, value, col = parser.peek()
    if kind != "end":
        raise ExpressionSyntaxError(f"unexpected {value!r}", col)
    return node


def free_variables(expr: Expression) -> frozenset[str]:
    match expr:
        case Num():
            return frozenset()
        case Var(name):
            return frozenset((name,))
        case Neg(arg):
            return free_variables(arg)
        case BinOp(_, left, right):
            return free_variables(left) | free_variables(right)
        case Call(_, arg):
            return free_variables(arg)
    raise TypeError(f"not an Expression: {expr!r}")


def evaluate(expr: Expression, bindings: Mapping[str, float]) -> float:
    """Evaluate ``expr`` with the given variable bindings (IEEE doubles).

    Unbound variables and real-domain violations raise instead of silently
    producing NaN.  Extra bindings are allowed.
    """
    match expr:
        case Num(value):
            return value
        case Var(name):
            try:
                return float(bindings[name])
            except KeyError:
                raise UnboundVariableError(f"variable {name!r} is not bound") from None
        case Neg(arg):
            return -evaluate(arg, bindings)
        case BinOp(op, left, right):
            a = evaluate(left, bindings)
            b = evaluate(right, bindings)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if op == "/":
                if b == 0.0:
                    raise DomainError("division by zero")
                return a / b
            try:
                r = a**b
            except (ValueError, ZeroDivisionError, OverflowError) as exc:
                raise DomainError(f"invalid power {a}^{b}: {exc}") from None
            if isinstance(r, complex):
                raise DomainError(f"power {a}^{b} leaves the real domain")
            return r
        case Call(func, arg):
            x = evaluate(arg, bindings)
            if func == "log" and x <= 0.0:
                raise DomainError(f"log of non-positive value {x}")
            if func == "sqrt" and x < 0.0:
                raise DomainError(f"sqrt of negative value {x}")
            try:
                return FUNCTIONS[func](x)
            except (ValueError, OverflowError) as exc:
                raise DomainError(f"{func}({x}): {exc}") from None
    raise TypeError(f"not an Expression: {expr!r}")


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}
_PREC_NEG = 3


def _prec(expr: Expression) -> int:
    match expr:
        case BinOp(op, _, _):
            return _PREC[op]
        case Neg(_):
            return _PREC_NEG
        case _:
            return 10


def to_string(expr: Expression) -> str:
    """Pretty-print so that re-parsing yields a structurally identical tree."""
    match expr:
        case Num(value):
            if value == int(value) and abs(value) < 1e16:
                return str(int(value))
            return repr(value)
        case Var(name):
            return name
        case Neg(arg):
            inner = to_string(arg)
            if _prec(arg) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        case BinOp(op, left, right):
            ls = to_string(left)
            rs = to_string(right)
            # conservative parenthesization: equal precedence on the wrong
            # side is always wrapped, which keeps round-trips structural
            if op == "^":
                if _prec(left) <= _PREC[op]:
                    ls = f"({ls})"
                if _prec(right) < _PREC[op]:
                    rs = f"({rs})"
            else:
                if _prec(left) < _PREC[op]:
                    ls = f"({ls})"
                if _prec(right) <= _PREC[op]:
                    rs = f"({rs})"
            return f"{ls} {op} {rs}"
        case Call(func, arg):
            return f"{func}({to_string(arg)})"
    raise TypeError(f"not an Expression: {expr!r}")
