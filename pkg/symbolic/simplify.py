"""
Constant folding and 0/1 identities.

No canonical ordering or polynomial rewriting is attempted, so derivative
trees keep the shape of the source expression.
"""

#####################################
# Import Modules
#####################################

from functools import singledispatch

from symbolic.evaluate import UNARY_FUNCTIONS, apply_binary
from symbolic.expr import (
    ONE,
    ZERO,
    Binary,
    Call,
    Compare,
    Conj,
    Const,
    Expr,
    Ident,
    Neg,
    is_const,
)
from utils.errors import EvaluationError

#####################################
# Smart Constructors
#####################################


def _fold(op: str, left: Const, right: Const):
    try:
        return Const(apply_binary(op, left.value, right.value, left.symbol == "e"))
    except EvaluationError:
        return None


def neg(a: Expr) -> Expr:
    if is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def add(a: Expr, b: Expr) -> Expr:
    if is_const(a) and is_const(b):
        folded = _fold("+", a, b)
        if folded is not None:
            return folded
    if is_const(a, 0):
        return b
    if is_const(b, 0):
        return a
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if is_const(a) and is_const(b):
        folded = _fold("-", a, b)
        if folded is not None:
            return folded
    if is_const(b, 0):
        return a
    if is_const(a, 0):
        return neg(b)
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if is_const(a) and is_const(b):
        folded = _fold("*", a, b)
        if folded is not None:
            return folded
    if is_const(a, 0) or is_const(b, 0):
        return ZERO
    if is_const(a, 1):
        return b
    if is_const(b, 1):
        return a
    if is_const(a, -1):
        return neg(b)
    if is_const(b, -1):
        return neg(a)
    return Binary("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if is_const(a) and is_const(b) and b.value != 0:
        folded = _fold("/", a, b)
        if folded is not None:
            return folded
    if is_const(a, 0) and not is_const(b, 0):
        return ZERO
    if is_const(b, 1):
        return a
    return Binary("/", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if is_const(b, 0):
        return ONE
    if is_const(b, 1):
        return a
    if is_const(a) and is_const(b):
        folded = _fold("^", a, b)
        if folded is not None:
            return folded
    return Binary("^", a, b)


def call(func: str, *args: Expr) -> Expr:
    if func in UNARY_FUNCTIONS and len(args) == 1 and is_const(args[0]) and func != "sign":
        try:
            return Const(UNARY_FUNCTIONS[func](args[0].value))
        except EvaluationError:
            pass
    return Call(func, tuple(args))


def conj(a: Expr) -> Expr:
    if is_const(a):
        value = a.value
        return Const(value.conjugate() if isinstance(value, complex) else value, a.symbol)
    if isinstance(a, Conj):
        return a.operand
    return Conj(a)


BUILDERS = {"+": add, "-": sub, "*": mul, "/": div, "^": power}


def binary(op: str, a: Expr, b: Expr) -> Expr:
    return BUILDERS[op](a, b)


#####################################
# Whole-Tree Simplification
#####################################


@singledispatch
def simplify(expr: Expr) -> Expr:
    return expr


@simplify.register
def _(expr: Const):
    return expr


@simplify.register
def _(expr: Ident):
    return expr


@simplify.register
def _(expr: Neg):
    return neg(simplify(expr.operand))


@simplify.register
def _(expr: Conj):
    return conj(simplify(expr.operand))


@simplify.register
def _(expr: Binary):
    left = simplify(expr.left)
    right = simplify(expr.right)
    # keep e^x symbolic so evaluation can use exp()
    if expr.op == "^" and isinstance(left, Const) and left.symbol == "e":
        return Binary("^", left, right) if not is_const(right) else power(left, right)
    return binary(expr.op, left, right)


@simplify.register
def _(expr: Compare):
    return Compare(expr.op, simplify(expr.left), simplify(expr.right))


@simplify.register
def _(expr: Call):
    if expr.func in ("rnd",):
        return expr
    args = tuple(simplify(arg) for arg in expr.args)
    if len(args) == 1:
        return call(expr.func, *args)
    return Call(expr.func, args, expr.line, expr.column)
