"""Scalar expression language for coefficient functions.

Expressions are small immutable ASTs over real literals, coordinate variables,
+, -, *, /, ^ (constant real exponent), unary minus, and the functions
exp, log, sin, cos, sinh, cosh.  They support exact symbolic differentiation
and pointwise evaluation; all derived tensor calculus is built on top of the
derivatives of these leaves.

Grammar:
    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' number)?
    base   := number | ident | func '(' expr ')' | '(' expr ')' | '-' base

Unary minus binds at base level, so "-t^2" parses as (-t)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh")

_FN_EVAL = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sinh": math.sinh,
    "cosh": math.cosh,
}


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    """Raised on malformed input; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class ExprNameError(ExprError):
    """Raised when an identifier is neither a declared coordinate nor a function."""


class ExprDomainError(ExprError):
    """Raised when evaluation leaves the real domain (1/0, log of x <= 0, overflow)."""


@dataclass(frozen=True)
class Expr:
    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __neg__(self):
        return neg(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: float


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    arg: Expr


ZERO = Num(0.0)
ONE = Num(1.0)


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float)):
        return Num(float(v))
    raise TypeError(f"cannot use {type(v).__name__} as Expr")


# Smart constructors.  Folding is intentionally limited to constants and
# neutral elements so parsed trees keep their written shape.

def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if isinstance(a, Num) and a.value == 0.0:
        return b
    if isinstance(b, Num) and b.value == 0.0:
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if isinstance(b, Num) and b.value == 0.0:
        return a
    if isinstance(a, Num) and a.value == 0.0:
        return neg(b)
    return Sub(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if isinstance(a, Num):
        if a.value == 0.0:
            return ZERO
        if a.value == 1.0:
            return b
    if isinstance(b, Num):
        if b.value == 0.0:
            return ZERO
        if b.value == 1.0:
            return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Num):
        if b.value == 0.0:
            raise ExprDomainError("division by the constant 0")
        if isinstance(a, Num):
            return Num(a.value / b.value)
        if b.value == 1.0:
            return a
    if isinstance(a, Num) and a.value == 0.0:
        return ZERO
    return Div(a, b)


def pow_(a: Expr, n: float) -> Expr:
    if n == 0.0:
        return ONE
    if n == 1.0:
        return a
    if isinstance(a, Num):
        return Num(_real_pow(a.value, n))
    return Pow(a, float(n))


def call(fn: str, a: Expr) -> Expr:
    if fn not in FUNCTIONS:
        raise ExprNameError(f"unknown function {fn!r}")
    if isinstance(a, Num):
        return Num(_apply_fn(fn, a.value))
    return Call(fn, a)


# ---------------------------------------------------------------------------
# Parsing


class _Parser:
    def __init__(self, text: str, coords: tuple[str, ...]):
        self.text = text
        self.coords = coords
        self.pos = 0

    def parse(self) -> Expr:
        e = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise ExprSyntaxError(
                f"unexpected character {self.text[self.pos]!r}", self.pos
            )
        return e

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self) -> Expr:
        e = self.term()
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                e = add(e, self.term())
            elif ch == "-":
                self.pos += 1
                e = sub(e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                e = mul(e, self.factor())
            elif ch == "/":
                self.pos += 1
                e = div(e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        e = self.base()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            n = self.number()
            e = pow_(e, n)
        return e

    def base(self) -> Expr:
        ch = self.peek()
        if ch == "":
            raise ExprSyntaxError("unexpected end of input", self.pos)
        if ch == "-":
            self.pos += 1
            return neg(self.base())
        if ch == "(":
            self.pos += 1
            e = self.expr()
            if self.peek() != ")":
                raise ExprSyntaxError("expected ')'", self.pos)
            self.pos += 1
            return e
        if ch.isdigit() or ch == ".":
            return Num(self.number())
        if ch.isalpha() or ch == "_":
            start = self.pos
            while self.pos < len(self.text) and (
                self.text[self.pos].isalnum() or self.text[self.pos] == "_"
            ):
                self.pos += 1
            name = self.text[start : self.pos]
            if name in FUNCTIONS:
                if self.peek() != "(":
                    raise ExprSyntaxError(f"expected '(' after {name}", self.pos)
                self.pos += 1
                arg = self.expr()
                if self.peek() != ")":
                    raise ExprSyntaxError("expected ')'", self.pos)
                self.pos += 1
                return call(name, arg)
            if name in self.coords:
                return Var(name)
            raise ExprNameError(
                f"unknown identifier {name!r}; declared coordinates: "
                f"{', '.join(self.coords) or '(none)'}"
            )
        raise ExprSyntaxError(f"unexpected character {ch!r}", self.pos)

    def number(self) -> float:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] == "-":
            self.pos += 1
        while self.pos < len(self.text) and (
            self.text[self.pos].isdigit() or self.text[self.pos] == "."
        ):
            self.pos += 1
        # exponent suffix like 1e-3
        if self.pos < len(self.text) and self.text[self.pos] in "eE":
            save = self.pos
            self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos] in "+-":
                self.pos += 1
            if self.pos < len(self.text) and self.text[self.pos].isdigit():
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
            else:
                self.pos = save
        token = self.text[start : self.pos]
        try:
            return float(token)
        except ValueError:
            raise ExprSyntaxError(f"expected a number, got {token!r}", start) from None


def parse(text: str, coords: tuple[str, ...] | list[str]) -> Expr:
    """Parse `text` into an Expr over the declared coordinate names."""
    return _Parser(text, tuple(coords)).parse()


# ---------------------------------------------------------------------------
# Printing


def to_str(e: Expr) -> str:
    """Canonical printer; parse(to_str(e), coords) reproduces e."""
    return _print(e, 0)


# precedence levels: 0 expr, 1 term, 2 factor, 3 base
def _print(e: Expr, level: int) -> str:
    if isinstance(e, Num):
        v = e.value
        if v < 0:
            s = f"-{_fmt_num(-v)}"
            return s if level < 2 else f"({s})"
        return _fmt_num(v)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        # '-' binds at base level, so the argument must print as a base token
        return f"-{_print(e.arg, 3)}"
    if isinstance(e, Add):
        s = f"{_print(e.left, 0)} + {_print(e.right, 1)}"
        return s if level == 0 else f"({s})"
    if isinstance(e, Sub):
        s = f"{_print(e.left, 0)} - {_print(e.right, 1)}"
        return s if level == 0 else f"({s})"
    if isinstance(e, Mul):
        s = f"{_print(e.left, 1)}*{_print(e.right, 2)}"
        return s if level <= 1 else f"({s})"
    if isinstance(e, Div):
        s = f"{_print(e.left, 1)}/{_print(e.right, 2)}"
        return s if level <= 1 else f"({s})"
    if isinstance(e, Pow):
        b = e.base
        if isinstance(b, (Var, Call)) or (isinstance(b, Num) and b.value >= 0):
            base = _print(b, 3)
        else:
            base = f"({_print(b, 0)})"
        s = f"{base}^{_fmt_num(e.exponent)}"
        return s if level <= 2 else f"({s})"
    if isinstance(e, Call):
        return f"{e.fn}({_print(e.arg, 0)})"
    raise TypeError(f"not an Expr: {e!r}")


def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


# ---------------------------------------------------------------------------
# Differentiation and evaluation


def diff(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative of e with respect to the coordinate `var`."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Neg):
        return neg(diff(e.arg, var))
    if isinstance(e, Add):
        return add(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Sub):
        return sub(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Mul):
        return add(mul(diff(e.left, var), e.right), mul(e.left, diff(e.right, var)))
    if isinstance(e, Div):
        num = sub(
            mul(diff(e.left, var), e.right), mul(e.left, diff(e.right, var))
        )
        return div(num, Pow(e.right, 2.0))
    if isinstance(e, Pow):
        return mul(
            mul(Num(e.exponent), pow_(e.base, e.exponent - 1.0)), diff(e.base, var)
        )
    if isinstance(e, Call):
        inner = diff(e.arg, var)
        if e.fn == "exp":
            outer: Expr = Call("exp", e.arg)
        elif e.fn == "log":
            return div(inner, e.arg)
        elif e.fn == "sin":
            outer = Call("cos", e.arg)
        elif e.fn == "cos":
            outer = neg(Call("sin", e.arg))
        elif e.fn == "sinh":
            outer = Call("cosh", e.arg)
        elif e.fn == "cosh":
            outer = Call("sinh", e.arg)
        else:
            raise ExprNameError(f"unknown function {e.fn!r}")
        return mul(outer, inner)
    raise TypeError(f"not an Expr: {e!r}")


def _apply_fn(fn: str, x: float) -> float:
    if fn == "log" and x <= 0.0:
        raise ExprDomainError(f"log of non-positive value {x}")
    try:
        return _FN_EVAL[fn](x)
    except OverflowError:
        raise ExprDomainError(f"{fn}({x}) overflows") from None


def _real_pow(b: float, n: float) -> float:
    if b == 0.0 and n < 0.0:
        raise ExprDomainError("zero raised to a negative power")
    if b < 0.0 and n != int(n):
        raise ExprDomainError(f"({b})^{n} is not real")
    return b ** n


def eval_expr(e: Expr, env: dict[str, float]) -> float:
    """Evaluate e at the point given by env (coordinate name -> value).

    Raises ExprDomainError on division by zero, log of a non-positive value,
    or a non-finite result.
    """
    v = _eval(e, env)
    if not math.isfinite(v):
        raise ExprDomainError(f"non-finite result {v}")
    return v


def _eval(e: Expr, env: dict[str, float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprNameError(f"no value for coordinate {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, Add):
        return _eval(e.left, env) + _eval(e.right, env)
    if isinstance(e, Sub):
        return _eval(e.left, env) - _eval(e.right, env)
    if isinstance(e, Mul):
        return _eval(e.left, env) * _eval(e.right, env)
    if isinstance(e, Div):
        d = _eval(e.right, env)
        if d == 0.0:
            raise ExprDomainError("division by zero")
        return _eval(e.left, env) / d
    if isinstance(e, Pow):
        return _real_pow(_eval(e.base, env), e.exponent)
    if isinstance(e, Call):
        return _apply_fn(e.fn, _eval(e.arg, env))
    raise TypeError(f"not an Expr: {e!r}")
