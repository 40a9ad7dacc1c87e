"""
Scalar fields on the extended phase space: parsing, printing, and jets.

An expression is a function of ``t, q1..qn, p1..pn`` and of named parameters
(bound at evaluation time, not at parsing time). The grammar::

    expr   := term (("+"|"-") term)* ;
    term   := factor (("*"|"/") factor)* ;
    factor := unary ("^" factor)? ;
    unary  := "-" unary | atom ;
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" ;

Evaluation is forward-mode automatic differentiation with the second-order
truncated arithmetic: every node yields its value, the gradient over the
``2n+1`` coordinates ``(t, q1..qn, p1..pn)``, and the symmetric Hessian.
"""
from __future__ import annotations

import dataclasses
import math
import re
from typing import TYPE_CHECKING, Callable, Mapping, Sequence, Union

import numpy as np

from noetherlab.errors import ConfigurationError, DomainError, ExpressionSyntaxError, \
                              IndexOutOfRange, NoetherError, UnknownIdentifier

if TYPE_CHECKING:
    from noetherlab.geometry import PhasePoint

    PointLike = Union[PhasePoint, Sequence[float], np.ndarray]
else:
    PointLike = object

FD_STEP = 1e-5

FUNCTIONS = ('sin', 'cos', 'tan', 'exp', 'log', 'sqrt')
CONSTANTS = {'pi': math.pi}

_IDENTIFIER = re.compile(r'[A-Za-z_][A-Za-z_0-9]*')
_COORDINATE = re.compile(r'([qp])([0-9]+)')
_NUMBER = re.compile(r'(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?')
_OPERATORS = '+-*/^()'


#
# The expression tree:
#

@dataclasses.dataclass(frozen=True)
class Number:
    value: float


@dataclasses.dataclass(frozen=True)
class Variable:
    name: str
    slot: int  # 0 for t; k for qk; n+k for pk.


@dataclasses.dataclass(frozen=True)
class Parameter:
    name: str


@dataclasses.dataclass(frozen=True)
class Constant:
    name: str
    value: float


@dataclasses.dataclass(frozen=True)
class Negate:
    operand: Node


@dataclasses.dataclass(frozen=True)
class Binary:
    op: str
    left: Node
    right: Node


@dataclasses.dataclass(frozen=True)
class Call:
    function: str
    argument: Node


Node = Union[Number, Variable, Parameter, Constant, Negate, Binary, Call]


def format_node(node: Node) -> str:
    """Print the subtree fully parenthesised, so that it reparses to the same tree."""
    if isinstance(node, Number):
        return repr(node.value)
    elif isinstance(node, (Variable, Parameter, Constant)):
        return node.name
    elif isinstance(node, Negate):
        return f"(-{format_node(node.operand)})"
    elif isinstance(node, Binary):
        return f"({format_node(node.left)} {node.op} {format_node(node.right)})"
    elif isinstance(node, Call):
        return f"{node.function}({format_node(node.argument)})"
    else:
        raise TypeError(f"Not an expression node: {node!r}")


def _walk(node: Node) -> list[Node]:
    if isinstance(node, Negate):
        return [node] + _walk(node.operand)
    elif isinstance(node, Binary):
        return [node] + _walk(node.left) + _walk(node.right)
    elif isinstance(node, Call):
        return [node] + _walk(node.argument)
    else:
        return [node]


@dataclasses.dataclass(frozen=True)
class Expression:
    """
    A parsed scalar field over ``(t, q1..qn, p1..pn)`` and named parameters.

    Immutable; evaluation is pure, so one expression can be evaluated
    at many points and parameter values, from many threads.
    """
    root: Node
    n: int
    declared: frozenset[str] = frozenset()
    source: str = dataclasses.field(default='', compare=False)

    def __str__(self) -> str:
        return self.text

    @property
    def text(self) -> str:
        return format_node(self.root)

    @property
    def parameters(self) -> frozenset[str]:
        """The parameter names actually referenced by the tree."""
        return frozenset(node.name for node in _walk(self.root) if isinstance(node, Parameter))

    @property
    def slots(self) -> frozenset[int]:
        """The coordinate slots (0 for t, k for qk, n+k for pk) referenced by the tree."""
        return frozenset(node.slot for node in _walk(self.root) if isinstance(node, Variable))

    @property
    def variables(self) -> frozenset[str]:
        """The coordinate names (``t``, ``qk``, ``pk``) referenced by the tree."""
        return frozenset(node.name for node in _walk(self.root) if isinstance(node, Variable))


def validate_parameter_names(names: Sequence[str] | frozenset[str]) -> None:
    for name in names:
        if not _IDENTIFIER.fullmatch(name):
            raise ConfigurationError(f"Parameter name {name!r} is not an identifier.")
        if name == 't' or _COORDINATE.fullmatch(name) or name in FUNCTIONS or name in CONSTANTS:
            raise ConfigurationError(f"Parameter name {name!r} is reserved.")


#
# Parsing:
#

@dataclasses.dataclass(frozen=True)
class _Token:
    kind: str  # 'number', 'ident', 'op', 'end'
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    position = 0
    while position < len(text):
        char = text[position]
        if char.isspace():
            position += 1
            continue
        if char in _OPERATORS:
            tokens.append(_Token('op', char, position))
            position += 1
            continue
        match = _NUMBER.match(text, position)
        if match:
            tokens.append(_Token('number', match.group(), position))
            position = match.end()
            continue
        match = _IDENTIFIER.match(text, position)
        if match:
            tokens.append(_Token('ident', match.group(), position))
            position = match.end()
            continue
        raise ExpressionSyntaxError(position, f"Unexpected character {char!r}")
    tokens.append(_Token('end', '', len(text)))
    return tokens


class _Parser:
    """A recursive descent parser, one method per grammar rule."""

    def __init__(self, text: str, n: int, parameters: frozenset[str]) -> None:
        self.tokens = _tokenize(text)
        self.index = 0
        self.n = n
        self.parameters = parameters

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def accept(self, *ops: str) -> _Token | None:
        token = self.current
        if token.kind == 'op' and token.text in ops:
            return self.advance()
        return None

    def expect(self, op: str) -> _Token:
        token = self.accept(op)
        if token is None:
            found = repr(self.current.text) if self.current.kind != 'end' else "end of input"
            raise ExpressionSyntaxError(self.current.position, f"Expected {op!r}, found {found}")
        return token

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != 'end':
            raise ExpressionSyntaxError(self.current.position,
                                        f"Unexpected token {self.current.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while (token := self.accept('+', '-')) is not None:
            node = Binary(token.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while (token := self.accept('*', '/')) is not None:
            node = Binary(token.text, node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.unary()
        if self.accept('^') is not None:
            node = Binary('^', node, self.factor())  # right-associative
        return node

    def unary(self) -> Node:
        if self.accept('-') is not None:
            return Negate(self.unary())
        return self.atom()

    def atom(self) -> Node:
        token = self.current
        if token.kind == 'number':
            value = float(token.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(token.position, f"Number {token.text!r} is out of range")
            self.advance()
            return Number(value)
        elif token.kind == 'ident':
            self.advance()
            return self.identifier(token)
        elif self.accept('(') is not None:
            node = self.expr()
            self.expect(')')
            return node
        elif token.kind == 'end':
            raise ExpressionSyntaxError(token.position, "Unexpected end of input")
        else:
            raise ExpressionSyntaxError(token.position, f"Unexpected token {token.text!r}")

    def identifier(self, token: _Token) -> Node:
        name = token.text
        if self.current.kind == 'op' and self.current.text == '(':
            if name not in FUNCTIONS:
                raise UnknownIdentifier(name)
            self.advance()
            argument = self.expr()
            self.expect(')')
            return Call(name, argument)
        if name == 't':
            return Variable('t', 0)
        coordinate = _COORDINATE.fullmatch(name)
        if coordinate:
            kind, index = coordinate.group(1), int(coordinate.group(2))
            if not 1 <= index <= self.n:
                raise IndexOutOfRange(name, index, self.n)
            slot = index if kind == 'q' else self.n + index
            return Variable(f"{kind}{index}", slot)
        if name in self.parameters:
            return Parameter(name)
        if name in CONSTANTS:
            return Constant(name, CONSTANTS[name])
        if name in FUNCTIONS:
            raise ExpressionSyntaxError(self.current.position, f"Expected '(' after {name!r}")
        raise UnknownIdentifier(name)


def parse_expression(
        text: str,
        n: int,
        param_names: Sequence[str] | frozenset[str] = frozenset(),
) -> Expression:
    """
    Parse the text of a scalar field in ``n`` degrees of freedom.

    Raises `ExpressionSyntaxError`, `UnknownIdentifier`, `IndexOutOfRange`.
    """
    if n < 1:
        raise ConfigurationError(f"The dimension must be positive, got n={n}.")
    if not text.strip():
        raise ExpressionSyntaxError(0, "Empty expression")
    parameters = frozenset(param_names)
    validate_parameter_names(parameters)
    root = _Parser(text, n, parameters).parse()
    return Expression(root=root, n=n, declared=parameters, source=text.strip())


#
# Jets:
#

class Jet2:
    """
    The value, the gradient, and the Hessian of a scalar field at a point.

    Both are ordered as ``(d/dt, d/dq1..d/dqn, d/dp1..d/dpn)``. The entries
    beyond the requested ``order`` are zero-filled; ``order`` tells which ones
    are present. The Hessian is symmetric to the exact equality.
    """
    __slots__ = ('value', 'gradient', 'hessian', 'order')

    def __init__(self, value: float, gradient: np.ndarray, hessian: np.ndarray, order: int) -> None:
        self.value = value
        self.gradient = gradient
        self.hessian = hessian
        self.order = order

    def __repr__(self) -> str:
        return f"<Jet2 order={self.order}: {self.value!r}, {self.gradient.tolist()!r}>"

    @property
    def n(self) -> int:
        return (len(self.gradient) - 1) // 2

    @property
    def dt(self) -> float:
        return float(self.gradient[0])

    @property
    def dq(self) -> np.ndarray:
        return self.gradient[1:self.n + 1]

    @property
    def dp(self) -> np.ndarray:
        return self.gradient[self.n + 1:]


class _Jet:
    # Internal: gradient/hessian are None when not requested.
    __slots__ = ('value', 'grad', 'hess', 'constant')

    def __init__(self, value: float, grad: np.ndarray | None, hess: np.ndarray | None,
                 constant: bool = False) -> None:
        self.value = value
        self.grad = grad
        self.hess = hess
        self.constant = constant


class _Context:
    def __init__(self, x: np.ndarray, params: Mapping[str, float], order: int) -> None:
        self.x = x
        self.params = params
        self.order = order
        size = len(x)
        self.zero_grad = np.zeros(size) if order >= 1 else None
        self.zero_hess = np.zeros((size, size)) if order >= 2 else None
        self.eye = np.eye(size)

    def constant(self, value: float) -> _Jet:
        return _Jet(value, self.zero_grad, self.zero_hess, constant=True)

    def variable(self, slot: int) -> _Jet:
        grad = self.eye[slot] if self.order >= 1 else None
        return _Jet(float(self.x[slot]), grad, self.zero_hess)


def _add(u: _Jet, v: _Jet, sign: float = 1.0) -> _Jet:
    value = u.value + v.value if sign > 0 else u.value - v.value
    grad = hess = None
    if u.grad is not None and v.grad is not None:
        grad = u.grad + v.grad if sign > 0 else u.grad - v.grad
    if u.hess is not None and v.hess is not None:
        hess = u.hess + v.hess if sign > 0 else u.hess - v.hess
    return _Jet(value, grad, hess, u.constant and v.constant)


def _mul(u: _Jet, v: _Jet) -> _Jet:
    value = u.value * v.value
    grad = hess = None
    if u.grad is not None and v.grad is not None:
        grad = u.value * v.grad + v.value * u.grad
    if u.hess is not None and v.hess is not None and u.grad is not None and v.grad is not None:
        hess = u.value * v.hess + v.value * u.hess + (np.outer(u.grad, v.grad) + np.outer(v.grad, u.grad))
    return _Jet(value, grad, hess, u.constant and v.constant)


def _compose(u: _Jet, f0: float, f1: Callable[[], float], f2: Callable[[], float]) -> _Jet:
    """Chain rule for a smooth unary function with the value & derivatives at u."""
    grad = hess = None
    if u.grad is not None and not u.constant:
        d1 = f1()
        grad = d1 * u.grad
        if u.hess is not None:
            hess = d1 * u.hess + f2() * np.outer(u.grad, u.grad)
    else:
        grad, hess = u.grad, u.hess  # zeros
    return _Jet(f0, grad, hess, u.constant)


def _negate(u: _Jet) -> _Jet:
    grad = -u.grad if u.grad is not None else None
    hess = -u.hess if u.hess is not None else None
    return _Jet(-u.value, grad, hess, u.constant)


def _reciprocal(u: _Jet, node: Node) -> _Jet:
    b = u.value
    if b == 0.0:
        raise DomainError("division by zero", format_node(node))
    return _compose(u, 1.0 / b, lambda: -1.0 / (b * b), lambda: 2.0 / (b * b * b))


def _call(function: str, u: _Jet, node: Node) -> _Jet:
    a = u.value
    if function == 'sin':
        s, c = math.sin(a), math.cos(a)
        return _compose(u, s, lambda: c, lambda: -s)
    elif function == 'cos':
        s, c = math.sin(a), math.cos(a)
        return _compose(u, c, lambda: -s, lambda: -c)
    elif function == 'tan':
        tg = math.tan(a)
        sec2 = 1.0 + tg * tg
        return _compose(u, tg, lambda: sec2, lambda: 2.0 * tg * sec2)
    elif function == 'exp':
        e = math.exp(a)
        return _compose(u, e, lambda: e, lambda: e)
    elif function == 'log':
        if a <= 0.0:
            raise DomainError("log of a nonpositive number", format_node(node))
        return _compose(u, math.log(a), lambda: 1.0 / a, lambda: -1.0 / (a * a))
    elif function == 'sqrt':
        if a < 0.0:
            raise DomainError("sqrt of a negative number", format_node(node))
        if a == 0.0 and u.grad is not None and not u.constant:
            raise DomainError("sqrt is not differentiable at 0", format_node(node))
        r = math.sqrt(a)
        return _compose(u, r, lambda: 0.5 / r, lambda: -0.25 / (r * a))
    else:
        raise UnknownIdentifier(function)


def _power(base: _Jet, exponent: _Jet, node: Node, ctx: _Context) -> _Jet:
    a = base.value
    if exponent.constant:
        c = exponent.value
        if a == 0.0 and c < 0.0:
            raise DomainError("zero to a negative power", format_node(node))
        if a < 0.0 and not float(c).is_integer():
            raise DomainError("negative base to a non-integer power", format_node(node))
        value = a ** c
        if base.constant:
            return ctx.constant(value)

        def d1() -> float:
            if c == 0.0:
                return 0.0
            if a == 0.0 and c < 1.0:
                raise DomainError("power is not differentiable at 0", format_node(node))
            return c * a ** (c - 1.0)

        def d2() -> float:
            if c == 0.0 or c == 1.0:
                return 0.0
            if a == 0.0 and c < 2.0:
                raise DomainError("power is not twice differentiable at 0", format_node(node))
            return c * (c - 1.0) * a ** (c - 2.0)

        return _compose(base, value, d1, d2)
    else:
        if a <= 0.0:
            raise DomainError("a variable exponent needs a positive base", format_node(node))
        log_base = _call('log', base, node)
        return _call('exp', _mul(exponent, log_base), node)


def _jet(node: Node, ctx: _Context) -> _Jet:
    try:
        if isinstance(node, Number):
            return ctx.constant(node.value)
        elif isinstance(node, Constant):
            return ctx.constant(node.value)
        elif isinstance(node, Parameter):
            return ctx.constant(float(ctx.params[node.name]))
        elif isinstance(node, Variable):
            return ctx.variable(node.slot)
        elif isinstance(node, Negate):
            return _negate(_jet(node.operand, ctx))
        elif isinstance(node, Call):
            return _call(node.function, _jet(node.argument, ctx), node)
        elif isinstance(node, Binary):
            left = _jet(node.left, ctx)
            right = _jet(node.right, ctx)
            if node.op == '+':
                return _add(left, right)
            elif node.op == '-':
                return _add(left, right, sign=-1.0)
            elif node.op == '*':
                return _mul(left, right)
            elif node.op == '/':
                return _mul(left, _reciprocal(right, node))
            elif node.op == '^':
                return _power(left, right, node, ctx)
        raise TypeError(f"Not an expression node: {node!r}")
    except (OverflowError, ZeroDivisionError, ValueError) as e:
        if isinstance(e, NoetherError):
            raise
        raise DomainError(f"arithmetic failure ({e})", format_node(node)) from e


def _coordinates(expr: Expression, x: PointLike) -> np.ndarray:
    vector = np.asarray(getattr(x, 'vector', x), dtype=float)
    if vector.shape != (2 * expr.n + 1,):
        raise ConfigurationError(f"Expected a point with {2 * expr.n + 1} coordinates, "
                                 f"got shape {vector.shape}.")
    return vector


def _check_params(expr: Expression, params: Mapping[str, float]) -> None:
    missing = expr.parameters - set(params)
    if missing:
        raise ConfigurationError(f"Missing parameters: {', '.join(sorted(missing))}.")


def eval_jet(
        expr: Expression,
        x: PointLike,
        params: Mapping[str, float] | None = None,
        order: int = 2,
) -> Jet2:
    """
    Evaluate the expression and its partial derivatives up to the ``order``.

    Raises `DomainError` with the offending subtree if the point is outside
    of the expression's domain (including non-differentiable points).
    """
    if order not in (0, 1, 2):
        raise ConfigurationError(f"The jet order must be 0, 1, or 2, got {order}.")
    params = params or {}
    vector = _coordinates(expr, x)
    _check_params(expr, params)
    ctx = _Context(vector, params, order)
    result = _jet(expr.root, ctx)
    size = len(vector)
    gradient = result.grad if result.grad is not None else np.zeros(size)
    hessian = result.hess if result.hess is not None else np.zeros((size, size))
    return Jet2(float(result.value), gradient, hessian, order)


def evaluate(expr: Expression, x: PointLike, params: Mapping[str, float] | None = None) -> float:
    return eval_jet(expr, x, params, order=0).value


def fd_jet(
        expr: Expression,
        x: PointLike,
        params: Mapping[str, float] | None = None,
        h: float = FD_STEP,
) -> Jet2:
    """
    The central-difference gradient and Hessian: an independent oracle for `eval_jet`.
    """
    if h <= 0:
        raise ConfigurationError(f"The finite-difference step must be positive, got {h}.")
    params = params or {}
    vector = _coordinates(expr, x)
    size = len(vector)
    eye = np.eye(size) * h

    def f(point: np.ndarray) -> float:
        return evaluate(expr, point, params)

    f0 = f(vector)
    plus = [f(vector + eye[i]) for i in range(size)]
    minus = [f(vector - eye[i]) for i in range(size)]
    gradient = np.array([(plus[i] - minus[i]) / (2 * h) for i in range(size)])
    hessian = np.zeros((size, size))
    for i in range(size):
        hessian[i, i] = (plus[i] - 2 * f0 + minus[i]) / (h * h)
        for j in range(i + 1, size):
            fpp = f(vector + eye[i] + eye[j])
            fpm = f(vector + eye[i] - eye[j])
            fmp = f(vector - eye[i] + eye[j])
            fmm = f(vector - eye[i] - eye[j])
            hessian[i, j] = hessian[j, i] = (fpp - fpm - fmp + fmm) / (4 * h * h)
    return Jet2(f0, gradient, hessian, 2)
