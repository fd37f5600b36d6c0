"""Demand expressions over finite fields.

Demands are ultimately stored as full truth tables; expressions are the
human-readable front end for writing them down.  The grammar, lowest to
highest precedence, all binary operators left-associative:

    or_expr   :=  xor_expr ( "|" xor_expr )*
    xor_expr  :=  and_expr ( ("+" | "-" | "^") and_expr )*
    and_expr  :=  unary ( ("&" | "*") unary )*
    unary     :=  ("~" | "-") unary | atom
    atom      :=  VAR | CONST | "(" or_expr ")"

``+``, ``-``, ``*`` are modulo-q arithmetic and work for any field order.
``&``, ``|``, ``~``, ``^`` are Boolean AND/OR/NOT/XOR and are rejected
unless q = 2.  Variables are written ``X1`` .. ``XN`` (case-insensitive),
constants are decimal digits below q.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Tuple, Union

from .errors import DemandParseError

BOOLEAN_OPS = {"&", "|", "~", "^"}


@dataclass(frozen=True)
class Var:
    index: int  # 1-based dataset index


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Unary:
    op: str  # "~" or "-"
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * & | ^
    left: "Node"
    right: "Node"


Node = Union[Var, Const, Unary, BinOp]

_TOKEN_RE = re.compile(r"\s*(?:(?P<var>[xX]\d+)|(?P<num>\d+)|(?P<op>[-+*&|^~()]))")

# precedence level of each binary operator; unary binds tighter than all
_LEVEL = {"|": 0, "+": 1, "-": 1, "^": 1, "&": 2, "*": 2}


def _tokenize(text: str) -> Iterator[Tuple[str, str, int]]:
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise DemandParseError(
                f"unexpected character {stripped[0]!r}", pos + (len(text[pos:]) - len(stripped))
            )
        if m.group("var"):
            yield ("var", m.group("var"), m.start("var"))
        elif m.group("num"):
            yield ("num", m.group("num"), m.start("num"))
        else:
            yield ("op", m.group("op"), m.start("op"))
        pos = m.end()
    yield ("end", "", len(text))


class _Parser:
    def __init__(self, text: str, q: int, n: int):
        self.tokens = list(_tokenize(text))
        self.q = q
        self.n = n
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def check_boolean(self, op: str, pos: int):
        if op in BOOLEAN_OPS and self.q != 2:
            raise DemandParseError(f"Boolean operator {op!r} requires q = 2, got q = {self.q}", pos)

    def parse(self) -> Node:
        node = self.parse_level(0)
        kind, val, pos = self.peek()
        if kind != "end":
            raise DemandParseError(f"unexpected token {val!r}", pos)
        return node

    def parse_level(self, level: int) -> Node:
        if level > 2:
            return self.parse_unary()
        node = self.parse_level(level + 1)
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and _LEVEL.get(val) == level:
                self.advance()
                self.check_boolean(val, pos)
                rhs = self.parse_level(level + 1)
                node = BinOp(val, node, rhs)
            else:
                return node

    def parse_unary(self) -> Node:
        kind, val, pos = self.peek()
        if kind == "op" and val in ("~", "-"):
            self.advance()
            self.check_boolean(val, pos)
            return Unary(val, self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Node:
        kind, val, pos = self.advance()
        if kind == "var":
            index = int(val[1:])
            if not 1 <= index <= self.n:
                raise DemandParseError(f"variable {val} out of range [1, {self.n}]", pos)
            return Var(index)
        if kind == "num":
            value = int(val)
            if value >= self.q:
                raise DemandParseError(f"constant {value} not below field order {self.q}", pos)
            return Const(value)
        if kind == "op" and val == "(":
            node = self.parse_level(0)
            kind2, val2, pos2 = self.advance()
            if val2 != ")":
                raise DemandParseError("expected ')'", pos2)
            return node
        raise DemandParseError(f"expected a variable, constant or '(', got {val!r}", pos)


def parse_demand(text: str, q: int, n: int) -> Node:
    """Parse an expression string into an AST, validating ranges against
    field order ``q`` and dataset count ``n``."""
    if not text or not text.strip():
        raise DemandParseError("empty expression", 0)
    if q < 2:
        raise ValueError(f"field order must be >= 2, got {q}")
    return _Parser(text, q, n).parse()


def eval_expr(node: Node, x: Tuple[int, ...], q: int) -> int:
    """Evaluate ``node`` at the source tuple ``x`` modulo ``q``."""
    if isinstance(node, Var):
        return x[node.index - 1]
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Unary):
        v = eval_expr(node.arg, x, q)
        return (1 + v) % 2 if node.op == "~" else (-v) % q
    a = eval_expr(node.left, x, q)
    b = eval_expr(node.right, x, q)
    if node.op == "+" or node.op == "^":
        return (a + b) % q
    if node.op == "-":
        return (a - b) % q
    if node.op == "*" or node.op == "&":
        return (a * b) % q
    if node.op == "|":
        return (a + b + a * b) % 2
    raise AssertionError(f"unknown operator {node.op!r}")


def pretty(node: Node, parent_level: int = -1) -> str:
    """Render an AST back to a parseable string with minimal parentheses."""
    if isinstance(node, Var):
        return f"X{node.index}"
    if isinstance(node, Const):
        return str(node.value)
    if isinstance(node, Unary):
        return node.op + pretty(node.arg, 3)
    level = _LEVEL[node.op]
    # right child is parenthesized at equal level to preserve left-associativity
    text = f"{pretty(node.left, level)} {node.op} {pretty(node.right, level + 1)}"
    if level < parent_level:
        return f"({text})"
    return text
