"""Expression DSL for metric components, warping functions and vector fields.

Expressions are parsed by a small recursive-descent parser and evaluated as
order-2 jets (value, gradient, Hessian) by forward propagation through the
tree.  Evaluation is vectorised over a batch of points: a jet carries arrays
of shape ``(N,)``, ``(N, n)`` and ``(N, n, n)``.

Grammar::

    expr    := term (("+" | "-") term)*
    term    := factor (("*" | "/") factor)*
    factor  := unary
    unary   := "-"? power
    power   := primary ("^" unary)?
    primary := number | ident | ident "(" expr ")" | "(" expr ")"

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)`` and ``2^-x`` is ``2^(-x)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt")


class ExpressionError(ValueError):
    pass


class ParseError(ExpressionError):
    """Syntax error.  ``position`` is a 0-based character offset."""

    def __init__(self, message: str, position: int, expected: Sequence[str] = ()):
        self.position = position
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if expected else ""
        super().__init__(f"{message} at offset {position}{detail}")


class UnknownIdentifierError(ParseError):
    def __init__(self, name: str, position: int):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", position)


class ArityError(ParseError):
    def __init__(self, name: str, nargs: int, position: int):
        self.name = name
        self.nargs = nargs
        super().__init__(f"function {name!r} takes 1 argument, got {nargs}", position)


class DomainError(ExpressionError, ArithmeticError):
    def __init__(self, reason: str, subexpression: str, point=None):
        self.reason = reason
        self.subexpression = subexpression
        self.point = point
        where = "" if point is None else f" at point {[float(v) for v in point]}"
        super().__init__(f"{reason} in {subexpression!r}{where}")


# --------------------------------------------------------------------------
# Tree
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


def node_vars(node: Node) -> frozenset:
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Num):
        return frozenset()
    if isinstance(node, (Neg, Call)):
        return node_vars(node.arg)
    return node_vars(node.left) | node_vars(node.right)


def to_source(node: Node) -> str:
    """Fully parenthesised source text; re-parses to an identical tree."""
    if isinstance(node, Num):
        if node.value < 0 or not math.isfinite(node.value):
            raise ExpressionError(f"literal {node.value!r} has no source form")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    return f"({to_source(node.left)} {node.op} {to_source(node.right)})"


@dataclass(frozen=True)
class Expression:
    """A parsed formula bound to an ordered tuple of coordinate names."""

    root: Node
    coords: tuple

    def __post_init__(self):
        unknown = node_vars(self.root) - set(self.coords)
        if unknown:
            raise ExpressionError(f"unbound variables {sorted(unknown)} for coordinates {list(self.coords)}")

    @property
    def free_vars(self) -> tuple:
        used = node_vars(self.root)
        return tuple(c for c in self.coords if c in used)

    @property
    def is_constant(self) -> bool:
        return not node_vars(self.root)

    def bind(self, coords: Sequence[str]) -> "Expression":
        """Same tree, evaluated against a different coordinate list."""
        return Expression(self.root, tuple(coords))

    def __str__(self) -> str:
        return to_source(self.root)


def constant(value: float, coords: Sequence[str] = ()) -> Expression:
    value = float(value)
    root: Node = Num(value) if value >= 0 else Neg(Num(-value))
    return Expression(root, tuple(coords))


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)
_PRIMARY_START = ("number", "identifier", "'('")


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | op | end
    text: str
    pos: int


def _tokenize(source: str) -> list:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {source[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), start))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, coords: Sequence[str]):
        self.tokens = _tokenize(source)
        self.i = 0
        self.coords = set(coords)

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def _accept(self, *texts: str):
        if self.tok.kind == "op" and self.tok.text in texts:
            t = self.tok
            self.i += 1
            return t
        return None

    def _expect(self, text: str, expected=None):
        t = self._accept(text)
        if t is None:
            raise ParseError(self._describe(), self.tok.pos, expected or (f"'{text}'",))
        return t

    def _describe(self) -> str:
        if self.tok.kind == "end":
            return "unexpected end of input"
        return f"unexpected token {self.tok.text!r}"

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise ParseError(self._describe(), self.tok.pos, ("'+'", "'-'", "'*'", "'/'", "'^'", "end of input"))
        return node

    def expr(self) -> Node:
        node = self.term()
        while (t := self._accept("+", "-")) is not None:
            node = BinOp(t.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while (t := self._accept("*", "/")) is not None:
            node = BinOp(t.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if self._accept("-") is not None:
            return Neg(self.power())
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self._accept("^") is not None:
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "ident":
            self.i += 1
            if self._accept("(") is not None:
                if t.text not in FUNCTIONS:
                    raise UnknownIdentifierError(t.text, t.pos)
                if self.tok.text == ")":
                    raise ArityError(t.text, 0, t.pos)
                args = [self.expr()]
                while self._accept(",") is not None:
                    args.append(self.expr())
                self._expect(")", ("')'", "'+'", "'-'", "'*'", "'/'", "'^'"))
                if len(args) != 1:
                    raise ArityError(t.text, len(args), t.pos)
                return Call(t.text, args[0])
            if t.text in FUNCTIONS and t.text not in self.coords:
                raise ArityError(t.text, 0, t.pos)
            if t.text not in self.coords:
                raise UnknownIdentifierError(t.text, t.pos)
            return Var(t.text)
        if self._accept("(") is not None:
            node = self.expr()
            self._expect(")", ("')'", "'+'", "'-'", "'*'", "'/'", "'^'"))
            return node
        raise ParseError(self._describe(), t.pos, _PRIMARY_START + ("'-'",) if t.text != "-" else _PRIMARY_START)


def parse(source: str, coordinates: Sequence[str] = ()) -> Expression:
    """Parse ``source`` into an :class:`Expression` over ``coordinates``."""
    coordinates = tuple(coordinates)
    if len(set(coordinates)) != len(coordinates):
        raise ExpressionError(f"duplicate coordinate names in {list(coordinates)}")
    for c in coordinates:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", c):
            raise ExpressionError(f"invalid coordinate name {c!r}")
    return Expression(_Parser(source, coordinates).parse(), coordinates)


# --------------------------------------------------------------------------
# Jets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar at a point (or a batch of points).

    The Hessian is held as a full matrix but every propagation rule builds it
    from symmetric pieces, so it is exactly symmetric.
    """

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.gradient + other.gradient, self.hessian + other.hessian)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.gradient - other.gradient, self.hessian - other.hessian)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __mul__(self, other: "Jet2") -> "Jet2":
        a, b = self, other
        ga, gb = a.gradient, b.gradient
        cross = ga[..., :, None] * gb[..., None, :]
        hess = a.value[..., None, None] * b.hessian + b.value[..., None, None] * a.hessian + (cross + np.swapaxes(cross, -1, -2))
        return Jet2(a.value * b.value, a.value[..., None] * gb + b.value[..., None] * ga, hess)

    def compose(self, d0, d1, d2) -> "Jet2":
        """Chain rule for phi(self) given phi, phi', phi'' at self.value."""
        g = self.gradient
        outer = g[..., :, None] * g[..., None, :]
        return Jet2(d0, d1[..., None] * g, d1[..., None, None] * self.hessian + d2[..., None, None] * outer)


def _const_jet(value: float, npts: int, dim: int) -> Jet2:
    return Jet2(np.full(npts, float(value)), np.zeros((npts, dim)), np.zeros((npts, dim, dim)))


def _var_jet(index: int, points: np.ndarray) -> Jet2:
    npts, dim = points.shape
    grad = np.zeros((npts, dim))
    grad[:, index] = 1.0
    return Jet2(points[:, index].copy(), grad, np.zeros((npts, dim, dim)))


def _domain_check(ok: np.ndarray, reason: str, node: Node, points: np.ndarray):
    if not np.all(ok):
        bad = int(np.argmin(ok))
        raise DomainError(reason, to_source(node), points[bad])


def _function_derivs(name: str, u: np.ndarray, node: Node, points: np.ndarray):
    if name == "sin":
        s, c = np.sin(u), np.cos(u)
        return s, c, -s
    if name == "cos":
        s, c = np.sin(u), np.cos(u)
        return c, -s, -c
    if name == "tan":
        _domain_check(np.abs(np.cos(u)) > 1e-300, "tan at a pole", node, points)
        t = np.tan(u)
        sec2 = 1.0 + t * t
        return t, sec2, 2.0 * t * sec2
    if name == "sinh":
        s, c = np.sinh(u), np.cosh(u)
        return s, c, s
    if name == "cosh":
        s, c = np.sinh(u), np.cosh(u)
        return c, s, c
    if name == "tanh":
        t = np.tanh(u)
        d = 1.0 - t * t
        return t, d, -2.0 * t * d
    if name == "exp":
        e = np.exp(u)
        return e, e, e
    if name == "log":
        _domain_check(u > 0, "log of non-positive argument", node, points)
        return np.log(u), 1.0 / u, -1.0 / (u * u)
    if name == "sqrt":
        _domain_check(u > 0, "sqrt of non-positive argument", node, points)
        s = np.sqrt(u)
        return s, 0.5 / s, -0.25 / (s * u)
    raise ExpressionError(f"unknown function {name!r}")  # unreachable after parse


def _power(base: Jet2, exponent: float, node: Node, points: np.ndarray) -> Jet2:
    u = base.value
    p = exponent
    if p == 0.0:
        return _const_jet(1.0, *base.gradient.shape)
    if p == 1.0:
        return base
    if float(p).is_integer():
        if p < 0:
            _domain_check(u != 0, "division by zero", node, points)
        return base.compose(u**p, p * u ** (p - 1), p * (p - 1) * u ** (p - 2))
    _domain_check(u > 0, "non-integer power of non-positive base", node, points)
    return base.compose(u**p, p * u ** (p - 1), p * (p - 1) * u ** (p - 2))


def _jet(node: Node, points: np.ndarray, index: dict) -> Jet2:
    if isinstance(node, Num):
        return _const_jet(node.value, *points.shape)
    if isinstance(node, Var):
        return _var_jet(index[node.name], points)
    if isinstance(node, Neg):
        return -_jet(node.arg, points, index)
    if isinstance(node, Call):
        inner = _jet(node.arg, points, index)
        return inner.compose(*_function_derivs(node.func, inner.value, node, points))
    op = node.op
    if op == "^" and not node_vars(node.right):
        exponent = _values(node.right, points[:1], index)[0]
        return _power(_jet(node.left, points, index), float(exponent), node, points)
    left = _jet(node.left, points, index)
    right = _jet(node.right, points, index)
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        v = right.value
        _domain_check(v != 0, "division by zero", node, points)
        return left * right.compose(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    # variable exponent: x^y = exp(y log x)
    _domain_check(left.value > 0, "variable power of non-positive base", node, points)
    lv = left.value
    log_left = left.compose(np.log(lv), 1.0 / lv, -1.0 / (lv * lv))
    prod = right * log_left
    e = np.exp(prod.value)
    return prod.compose(e, e, e)


def _values(node: Node, points: np.ndarray, index: dict) -> np.ndarray:
    """Value-only evaluation (no derivative propagation)."""
    if isinstance(node, Num):
        return np.full(points.shape[0], node.value)
    if isinstance(node, Var):
        return points[:, index[node.name]].astype(float)
    if isinstance(node, Neg):
        return -_values(node.arg, points, index)
    if isinstance(node, Call):
        u = _values(node.arg, points, index)
        return _function_derivs(node.func, u, node, points)[0]
    a = _values(node.left, points, index)
    b = _values(node.right, points, index)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        _domain_check(b != 0, "division by zero", node, points)
        return a / b
    if not node_vars(node.right) and float(b[0]).is_integer():
        if b[0] < 0:
            _domain_check(a != 0, "division by zero", node, points)
        return a ** b
    _domain_check(a > 0, "non-integer power of non-positive base", node, points)
    return a**b


def _batch(expr: Expression, points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[1] != len(expr.coords):
        raise ExpressionError(f"point has {pts.shape[1]} coordinates, expression expects {len(expr.coords)}")
    return pts


def eval_jet2_batch(expr: Expression, points) -> Jet2:
    """Jets at each row of ``points`` (shape ``(N, n)``)."""
    pts = _batch(expr, points)
    index = {c: i for i, c in enumerate(expr.coords)}
    with np.errstate(all="ignore"):
        return _jet(expr.root, pts, index)


def eval_jet2(expr: Expression, point) -> Jet2:
    """Exact value, gradient and Hessian of ``expr`` at a single point."""
    jet = eval_jet2_batch(expr, np.asarray(point, dtype=float).reshape(1, -1))
    return Jet2(float(jet.value[0]), jet.gradient[0], jet.hessian[0])


def evaluate(expr: Expression, points) -> np.ndarray:
    """Values only, at each row of ``points``; a 1-D point gives a 1-element array."""
    pts = _batch(expr, points)
    index = {c: i for i, c in enumerate(expr.coords)}
    with np.errstate(all="ignore"):
        return _values(expr.root, pts, index)
