"""A small expression language for structure functions.

Grammar (EBNF)::

    expr   = term , { ("+" | "-") , term } ;
    term   = unary , { ("*" | "/") , unary } ;
    unary  = "-" , unary | power ;
    power  = atom , [ "^" , expo ] ;
    expo   = "-" , expo | power ;             (* right-associative *)
    atom   = number | "pi" | variable | func , "(" , expr , ")" | "(" , expr , ")" ;
    func   = "sin" | "cos" | "tan" | "atan" | "exp" | "sqrt" ;
    variable = "x" | "y" | "alpha" | "p" ;

There is no implicit multiplication.  Error offsets are byte offsets into the
UTF-8 encoding of the source.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jets
from .grid import PERIODS, GridSpec, PeriodicScalarField

VARIABLES = ("x", "y", "alpha", "p")
CHARTS = {
    "alpha": frozenset({"x", "y", "alpha"}),
    "p": frozenset({"x", "y", "p"}),
    None: frozenset(VARIABLES),
}
FUNCTIONS = ("sin", "cos", "tan", "atan", "exp", "sqrt")
CONSTANTS = {"pi": math.pi}


class ExprError(ValueError):
    def __init__(self, message: str, offset: int | None = None):
        self.message = message
        self.offset = offset
        where = f" at offset {offset}" if offset is not None else ""
        super().__init__(message + where)


class ExprSyntaxError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class ChartError(ExprError):
    pass


class EvaluationError(ExprError, ArithmeticError):
    pass


class PeriodicityWarning(UserWarning):
    pass


class PeriodicityError(ExprError):
    pass


# AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Const, Var, Neg, BinOp, Call]


def depth(node: Node) -> int:
    if isinstance(node, (Num, Const, Var)):
        return 1
    if isinstance(node, Neg):
        return 1 + depth(node.operand)
    if isinstance(node, Call):
        return 1 + depth(node.arg)
    return 1 + max(depth(node.left), depth(node.right))


def variables(node: Node) -> frozenset:
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, (Num, Const)):
        return frozenset()
    if isinstance(node, Neg):
        return variables(node.operand)
    if isinstance(node, Call):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


# Tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, name, op, end
    text: str
    pos: int  # character index


def _tokenize(src: str) -> list:
    toks = []
    i = 0
    while True:
        while i < len(src) and src[i].isspace():
            i += 1
        if i >= len(src):
            toks.append(_Tok("end", "", len(src)))
            return toks
        m = _TOKEN.match(src, i)
        if m is None or m.end() == i:
            raise ExprSyntaxError(f"unexpected character {src[i]!r}", _byte(src, i))
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        i = m.end()


def _byte(src: str, i: int) -> int:
    return len(src[:i].encode("utf-8"))


class _Parser:
    def __init__(self, src: str, chart):
        self.src = src
        self.allowed = CHARTS[chart]
        self.chart = chart
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg, tok: _Tok, cls=ExprSyntaxError):
        return cls(msg, _byte(self.src, tok.pos))

    def expect(self, text):
        t = self.next()
        if t.text != text or t.kind != "op":
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise self.error(f"expected {text!r}, found {found}", t)
        return t

    def parse(self) -> Node:
        node = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise self.error(f"unexpected {t.text!r}", t)
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.next()
            return BinOp("^", base, self.exponent())
        return base

    def exponent(self):
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.next()
            return Neg(self.exponent())
        return self.power()

    def atom(self):
        t = self.next()
        if t.kind == "num":
            value = float(t.text)
            if not math.isfinite(value):
                raise self.error(f"number {t.text!r} out of range", t)
            return Num(value)
        if t.kind == "name":
            name = t.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if self.peek().kind == "op" and self.peek().text == "(":
                if name in VARIABLES or name in CONSTANTS:
                    raise self.error(f"{name!r} is not a function", self.peek())
                raise self.error(f"unknown function {name!r}", t, UnknownIdentifierError)
            if name in CONSTANTS:
                return Const(name)
            if name in VARIABLES:
                if name not in self.allowed:
                    raise self.error(
                        f"variable {name!r} is not allowed in the {self.chart} chart", t, ChartError
                    )
                return Var(name)
            raise self.error(f"unknown identifier {name!r}", t, UnknownIdentifierError)
        if t.kind == "op" and t.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise self.error(f"unexpected {found}", t)


def parse(src, chart: str | None = None) -> Node:
    """Parse ``src`` (str or UTF-8 bytes); ``chart`` restricts the variables."""
    if isinstance(src, bytes):
        src = src.decode("utf-8")
    if chart not in CHARTS:
        raise ValueError(f"unknown chart {chart!r}")
    return _Parser(src, chart).parse()


# Printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _fmt(node: Node):
    if isinstance(node, Num):
        return repr(node.value), 5
    if isinstance(node, (Const, Var)):
        return node.name, 5
    if isinstance(node, Call):
        return f"{node.func}({_fmt(node.arg)[0]})", 5
    if isinstance(node, Neg):
        s, p = _fmt(node.operand)
        return "-" + (s if p >= 3 else f"({s})"), 3
    prec = _PREC[node.op]
    ls, lp = _fmt(node.left)
    rs, rp = _fmt(node.right)
    if node.op == "^":
        ls = ls if lp > 4 else f"({ls})"
        rs = rs if rp >= 4 else f"({rs})"
        return f"{ls}^{rs}", 4
    ls = ls if lp >= prec else f"({ls})"
    rs = rs if rp > prec else f"({rs})"
    return f"{ls} {node.op} {rs}", prec


def to_string(node: Node) -> str:
    return _fmt(node)[0]


# Evaluation

def _is_zero(v) -> bool:
    if isinstance(v, jets.Jet):
        v = v.value
    return bool(np.any(np.asarray(v) == 0))


def evaluate(node: Node, env: dict):
    """Evaluate with ``env`` mapping variable names to numbers, arrays or jets."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise EvaluationError(f"no value bound for variable {node.name!r}") from None
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Call):
        arg = evaluate(node.arg, env)
        with np.errstate(all="ignore"):
            return jets.FUNCTIONS[node.func](arg)
    a = evaluate(node.left, env)
    b = evaluate(node.right, env)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if _is_zero(b):
            raise EvaluationError("division by zero")
        if isinstance(b, jets.Jet) or isinstance(a, jets.Jet):
            return a / b
        return np.asarray(a, dtype=float) / b
    try:
        if isinstance(a, jets.Jet) or isinstance(b, jets.Jet):
            return jets.power(a, b)
        with np.errstate(all="ignore"):
            return np.power(np.asarray(a, dtype=float), b)
    except (ValueError, ZeroDivisionError) as exc:
        raise EvaluationError(str(exc)) from None


def _check_finite(values, what="expression"):
    v = np.asarray(values)
    if not np.all(np.isfinite(v)):
        raise EvaluationError(f"{what} is not finite at some sample points")


def evaluate_on_grid(node: Node, spec: GridSpec, strict: bool = False) -> PeriodicScalarField:
    """Sample an alpha-chart expression at the grid nodes.

    Periodicity is checked by comparing the expression on opposite faces of the
    fundamental domain; a mismatch warns (or raises when ``strict``).
    """
    bad = variables(node) - CHARTS["alpha"]
    if bad:
        raise ChartError(f"variables {sorted(bad)} are not allowed on the alpha torus")
    x, y, a = spec.mesh()
    values = np.broadcast_to(evaluate(node, {"x": x, "y": y, "alpha": a}), spec.shape)
    _check_finite(values)
    values = np.array(values, dtype=float)
    scale = max(1.0, float(np.max(np.abs(values))))
    xs, ys, als = spec.axes()
    for axis, name in enumerate(("x", "y", "alpha")):
        coords = [xs, ys, als]
        lo = list(coords)
        hi = list(coords)
        lo[axis] = np.array([0.0])
        hi[axis] = np.array([PERIODS[axis]])
        f_lo = evaluate(node, dict(zip(("x", "y", "alpha"), np.meshgrid(*lo, indexing="ij"))))
        f_hi = evaluate(node, dict(zip(("x", "y", "alpha"), np.meshgrid(*hi, indexing="ij"))))
        gap = float(np.max(np.abs(np.asarray(f_lo, dtype=float) - np.asarray(f_hi, dtype=float))))
        if gap > 1e-9 * scale:
            msg = f"expression is not periodic in {name} (wrap-around jump {gap:.3g})"
            if strict:
                raise PeriodicityError(msg)
            warnings.warn(msg, PeriodicityWarning, stacklevel=2)
    return PeriodicScalarField(spec, values)


def compile_function(node: Node, names=("x", "y", "alpha")):
    """A callable ``f(*coords)`` evaluating ``node``."""

    def fn(*args):
        return evaluate(node, dict(zip(names, args)))

    return fn
