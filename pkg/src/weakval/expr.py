"""A small expression language for analytic detector wavefunctions.

Grammar (``^`` binds tightest and is right-associative; unary minus sits
below ``^`` so ``-Q^2`` is ``-(Q^2)``)::

    sum     := unary (("+" | "-") unary)*
    unary   := "-" unary | product
    product := factor (("*" | "/") factor)*
    factor  := "-" factor | power
    power   := atom ("^" factor)?
    atom    := NUMBER | NAME | FUNC "(" sum ")" | "(" sum ")"

``NAME`` is any identifier; ``i`` and ``pi`` are constants and ``exp``,
``ln``, ``sin``, ``cos``, ``tan``, ``sqrt`` are functions.  One tree can be
evaluated over complex numbers, numpy arrays or the ``DualBi`` algebra.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import numerics
from .errors import DomainError, ExpressionSyntaxError, UnboundVariable
from .numerics import DualBi

__all__ = [
    "Num",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "WaveExpr",
    "parse",
    "evaluate",
    "to_source",
    "FUNCTIONS",
    "CONSTANTS",
]

FUNCTIONS = {
    "exp": numerics.exp,
    "ln": numerics.ln,
    "sin": numerics.sin,
    "cos": numerics.cos,
    "tan": numerics.tan,
    "sqrt": numerics.sqrt,
}
CONSTANTS = {"i": 1j, "pi": math.pi}


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


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int  # character index


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {source[pos]!r}", _byte_offset(source, pos)
            )
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, expected: str):
        found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
        raise ExpressionSyntaxError(
            f"expected {expected}, found {found}", _byte_offset(self.source, self.tok.pos)
        )

    def accept(self, *texts: str) -> str | None:
        if self.tok.kind == "op" and self.tok.text in texts:
            self.i += 1
            return self.tokens[self.i - 1].text
        return None

    def expect(self, text: str):
        if not self.accept(text):
            self.error(repr(text))

    def parse(self) -> Node:
        node = self.sum()
        if self.tok.kind != "end":
            self.error("operator or end of input")
        return node

    def sum(self) -> Node:
        node = self.unary()
        while op := self.accept("+", "-"):
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Neg(self.unary())
        return self.product()

    def product(self) -> Node:
        node = self.factor()
        while op := self.accept("*", "/"):
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.accept("-"):
            return Neg(self.factor())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.factor())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "number":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "name":
            self.i += 1
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.sum()
                self.expect(")")
                return Call(tok.text, arg)
            if tok.text in CONSTANTS:
                return Const(tok.text)
            return Var(tok.text)
        if self.accept("("):
            node = self.sum()
            self.expect(")")
            return node
        self.error("number, name or '('")


def to_source(node: Node) -> str:
    """Fully parenthesized text that parses back to ``node``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)}{node.op}{to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _free_vars(node: Node, out: set):
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, Neg):
        _free_vars(node.operand, out)
    elif isinstance(node, BinOp):
        _free_vars(node.left, out)
        _free_vars(node.right, out)
    elif isinstance(node, Call):
        _free_vars(node.arg, out)


@dataclass(frozen=True)
class WaveExpr:
    ast: Node
    source: str = ""

    @property
    def free_vars(self) -> frozenset:
        out: set = set()
        _free_vars(self.ast, out)
        return frozenset(out)

    def __str__(self):
        return to_source(self.ast)

    def evaluate(self, bindings, algebra="complex"):
        return evaluate(self, bindings, algebra)

    def as_wave(self, pointer_var="Q", width_var="beta", params=None):
        """Callable ``(Q, beta) -> value`` with ``params`` bound."""
        params = dict(params or {})
        missing = self.free_vars - set(params) - {pointer_var, width_var}
        if missing:
            raise UnboundVariable(sorted(missing)[0])

        def wave(q, beta=0.0):
            bindings = dict(params)
            bindings[pointer_var] = q
            bindings[width_var] = beta
            dual = isinstance(q, DualBi) or isinstance(beta, DualBi)
            return evaluate(self, bindings, "dual" if dual else "complex")

        return wave


def parse(source: str) -> WaveExpr:
    return WaveExpr(_Parser(source).parse(), source)


def _div(a, b):
    if not isinstance(b, (DualBi, np.ndarray)) and b == 0:
        raise DomainError("division by zero")
    return a / b


_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": numerics.power,
}


def _eval(node: Node, env, lift):
    if isinstance(node, Num):
        return lift(node.value)
    if isinstance(node, Const):
        return lift(CONSTANTS[node.name])
    if isinstance(node, Var):
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariable(node.name) from None
    if isinstance(node, Neg):
        return -_eval(node.operand, env, lift)
    if isinstance(node, BinOp):
        return _BINARY[node.op](_eval(node.left, env, lift), _eval(node.right, env, lift))
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, env, lift))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(expr, bindings, algebra: str = "complex"):
    """Evaluate ``expr`` with variables taken from ``bindings``.

    ``algebra`` is ``"complex"`` (scalars or numpy arrays) or ``"dual"``, in
    which case every binding and literal is lifted into ``DualBi``.
    """
    node = expr.ast if isinstance(expr, WaveExpr) else expr
    if algebra == "dual":
        lift = DualBi.lift
        env = {k: DualBi.lift(v) for k, v in bindings.items()}
    elif algebra == "complex":
        def lift(x):
            return x
        env = dict(bindings)
    else:
        raise ValueError(f"unknown algebra {algebra!r}")
    return _eval(node, env, lift)
