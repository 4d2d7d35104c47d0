"""Closed-form expression trees over chart coordinates.

Expressions are immutable trees of constants, coordinate variables, unary
functions (neg sin cos tan exp log sqrt sinh cosh) and binary arithmetic
(add sub mul div pow).  They are built through the constructor helpers
below, which apply light simplification (constant folding plus the 0/1
identities) so that symbolic derivatives stay compact.  Everything here is
exact symbolic manipulation; finite differences appear only in the tests
as an independent oracle.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import (EvalDomainError, ExprSyntaxError, UnboundVariableError,
                     UnknownFunctionError)

UNARY_FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")

_BINARY_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


@dataclass(frozen=True)
class Expr:
    """Base node; concrete nodes are Const, Var, Unary, Binary."""

    def __call__(self, **point):
        return evaluate(self, point)


@dataclass(frozen=True)
class Const(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # 'neg' or one of UNARY_FUNCTIONS
    arg: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # one of BINARY_OPS
    left: Expr
    right: Expr


ZERO = Const(0.0)
ONE = Const(1.0)


def const(value) -> Const:
    return Const(float(value))


def var(name) -> Var:
    return Var(name)


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return Const(a.value / b.value)
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    return Binary("div", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if _is_const(a) and _is_const(b):
        try:
            return Const(math.pow(a.value, b.value))
        except (ValueError, OverflowError):
            pass  # fold only when defined; eval reports the domain error
    if _is_const(b, 1.0):
        return a
    if _is_const(b, 0.0):
        return ONE
    return Binary("pow", a, b)


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def fn(name: str, arg: Expr) -> Expr:
    if name not in UNARY_FUNCTIONS:
        raise ValueError(f"not a recognized function: {name}")
    if _is_const(arg):
        try:
            return Const(getattr(math, name)(arg.value))
        except (ValueError, OverflowError):
            pass
    return Unary(name, arg)


def variables(e: Expr) -> set:
    """Names of all coordinate variables occurring in e."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    return set()


def substitute(e: Expr, bindings: dict) -> Expr:
    """Replace variables by expressions (values accepted, coerced to Const)."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Var):
        rep = bindings.get(e.name)
        if rep is None:
            return e
        return rep if isinstance(rep, Expr) else const(rep)
    if isinstance(e, Unary):
        arg = substitute(e.arg, bindings)
        return neg(arg) if e.op == "neg" else fn(e.op, arg)
    ctor = {"add": add, "sub": sub, "mul": mul, "div": div, "pow": power}[e.op]
    return ctor(substitute(e.left, bindings), substitute(e.right, bindings))


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def evaluate(e: Expr, point) -> float:
    """Evaluate at a point (mapping coordinate name -> value).

    Raises UnboundVariableError for missing coordinates and EvalDomainError
    for math domain failures; never returns NaN silently.
    """
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(point[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Unary):
        x = evaluate(e.arg, point)
        if e.op == "neg":
            return -x
        try:
            return getattr(math, e.op)(x)
        except ValueError:
            raise EvalDomainError(f"{e.op}({x}) is undefined") from None
        except OverflowError:
            raise EvalDomainError(f"{e.op}({x}) overflows") from None
    l = evaluate(e.left, point)
    r = evaluate(e.right, point)
    op = e.op
    try:
        if op == "add":
            return l + r
        if op == "sub":
            return l - r
        if op == "mul":
            return l * r
        if op == "div":
            if r == 0.0:
                raise EvalDomainError(f"division by zero ({l}/{r})")
            return l / r
        return math.pow(l, r)
    except OverflowError:
        raise EvalDomainError(f"{op}({l}, {r}) overflows") from None
    except ValueError:
        raise EvalDomainError(f"pow({l}, {r}) is undefined over the reals") from None


def eval_grid(e: Expr, arrays: dict) -> np.ndarray:
    """Vectorized evaluation over coordinate arrays (broadcast together).

    Domain failures surface as non-finite entries rather than exceptions;
    quadrature and lattice-sampling callers check finiteness afterwards.
    """
    shape = np.broadcast_shapes(*(np.shape(a) for a in arrays.values())) if arrays else ()
    with np.errstate(all="ignore"):
        out = _eval_grid(e, arrays)
    return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()


_GRID_UNARY = {
    "neg": np.negative, "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "sinh": np.sinh, "cosh": np.cosh,
}


def _eval_grid(e, arrays):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return np.asarray(arrays[e.name], dtype=float)
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Unary):
        return _GRID_UNARY[e.op](_eval_grid(e.arg, arrays))
    l = _eval_grid(e.left, arrays)
    r = _eval_grid(e.right, arrays)
    if e.op == "add":
        return l + r
    if e.op == "sub":
        return l - r
    if e.op == "mul":
        return l * r
    if e.op == "div":
        return np.divide(l, r)
    return np.power(l, r)


# ---------------------------------------------------------------------------
# symbolic differentiation
# ---------------------------------------------------------------------------

def diff(e: Expr, name: str) -> Expr:
    """Exact symbolic partial derivative with respect to a coordinate."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Unary):
        du = diff(e.arg, name)
        u = e.arg
        if e.op == "neg":
            return neg(du)
        if e.op == "sin":
            return mul(fn("cos", u), du)
        if e.op == "cos":
            return neg(mul(fn("sin", u), du))
        if e.op == "tan":
            return div(du, power(fn("cos", u), const(2)))
        if e.op == "exp":
            return mul(e, du)
        if e.op == "log":
            return div(du, u)
        if e.op == "sqrt":
            return div(du, mul(const(2), e))
        if e.op == "sinh":
            return mul(fn("cosh", u), du)
        if e.op == "cosh":
            return mul(fn("sinh", u), du)
        raise ValueError(f"unhandled unary op {e.op}")
    u, v = e.left, e.right
    du, dv = diff(u, name), diff(v, name)
    if e.op == "add":
        return add(du, dv)
    if e.op == "sub":
        return sub(du, dv)
    if e.op == "mul":
        return add(mul(du, v), mul(u, dv))
    if e.op == "div":
        return div(sub(mul(du, v), mul(u, dv)), power(v, const(2)))
    # pow: power rule for constant exponents, else u^v (v' log u + v u'/u)
    if isinstance(v, Const):
        return mul(mul(v, power(u, const(v.value - 1.0))), du)
    return mul(e, add(mul(dv, fn("log", u)), mul(v, div(du, u))))


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def to_text(e: Expr) -> str:
    """Fully parenthesized rendering; parse(to_text(e)) == e."""
    if isinstance(e, Const):
        return repr(e.value) if e.value >= 0 else f"(-{repr(-e.value)})"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{to_text(e.arg)})"
        return f"{e.op}({to_text(e.arg)})"
    return f"({to_text(e.left)} {_BINARY_SYMBOL[e.op]} {to_text(e.right)})"


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
  | (?P<bad>.)
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind == "ws":
            continue
        if kind == "bad":
            raise ExprSyntaxError(f"unexpected character {m.group()!r}", m.start(),
                                  {"NUMBER", "IDENT", "operator"})
        tokens.append((kind, m.group(), m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser for the expression grammar.

    Precedence, loosest to tightest: +/- (left), */ (left), unary minus,
    ^ (right-associative).  '-x^2' is -(x^2); '2^-3' is 2^(-3).
    """

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        kind, value, offset = self.peek()
        got = repr(value) if value else "end of input"
        raise ExprSyntaxError(f"unexpected {got}", offset, expected)

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "eof":
            self.fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.advance()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.advance()[1]
            rhs = self.factor()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def factor(self):
        if self.peek()[1] == "-":
            self.advance()
            return neg(self.factor())
        base = self.atom()
        if self.peek()[1] == "^":
            self.advance()
            return power(base, self.factor())
        return base

    def atom(self):
        kind, value, offset = self.peek()
        if kind == "num":
            self.advance()
            return const(float(value))
        if kind == "ident":
            self.advance()
            if self.peek()[1] == "(":
                if value not in UNARY_FUNCTIONS:
                    raise UnknownFunctionError(value, offset)
                self.advance()
                arg = self.expr()
                if self.peek()[1] != ")":
                    self.fail({"')'"})
                self.advance()
                return fn(value, arg)
            return var(value)
        if value == "(":
            self.advance()
            e = self.expr()
            if self.peek()[1] != ")":
                self.fail({"')'"})
            self.advance()
            return e
        self.fail({"NUMBER", "IDENT", "'('", "'-'"})


def parse(text: str) -> Expr:
    """Parse expression text; constructor simplifications are applied, so
    the result is in the same normal form diff() and friends produce."""
    return _Parser(text).parse()
