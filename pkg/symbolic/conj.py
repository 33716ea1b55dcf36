"""
Push conjugation down to the leaves of an expression.

After normalization a Conj node only ever wraps an Ident (or an rnd()
draw, which has no closed-form conjugate).
"""

from functools import singledispatch
from typing import Callable

from symbolic.expr import Binary, Call, Compare, Conj, Const, Expr, Ident, Neg

# conj(f(u)) == f(conj(u)) on the principal branch
CONJ_COMMUTING = frozenset({"sin", "cos", "tan", "asin", "acos", "atan", "sqrt", "exp", "log"})
REAL_RESULT = frozenset({"abs", "real", "imag", "round", "disc", "sign"})

RealTest = Callable[[str], bool]


def _never_real(name: str) -> bool:
    return False


def normalize_conj(expr: Expr, is_real: RealTest = _never_real) -> Expr:
    """Rewrite expr so that conjugation only applies to identifiers."""
    return _normalize(expr, is_real)


@singledispatch
def _normalize(expr: Expr, is_real: RealTest) -> Expr:
    return expr


@_normalize.register
def _(expr: Conj, is_real: RealTest):
    return _push(_normalize(expr.operand, is_real), is_real)


@_normalize.register
def _(expr: Neg, is_real: RealTest):
    return Neg(_normalize(expr.operand, is_real))


@_normalize.register
def _(expr: Binary, is_real: RealTest):
    return Binary(expr.op, _normalize(expr.left, is_real), _normalize(expr.right, is_real))


@_normalize.register
def _(expr: Compare, is_real: RealTest):
    return Compare(expr.op, _normalize(expr.left, is_real), _normalize(expr.right, is_real))


@_normalize.register
def _(expr: Call, is_real: RealTest):
    if expr.func == "rnd":
        return expr
    args = tuple(_normalize(arg, is_real) for arg in expr.args)
    return Call(expr.func, args, expr.line, expr.column)


#####################################
# Conjugating a normalized tree
#####################################


@singledispatch
def _push(expr: Expr, is_real: RealTest) -> Expr:
    return Conj(expr)


@_push.register
def _(expr: Const, is_real: RealTest):
    value = expr.value
    if isinstance(value, complex):
        return Const(value.conjugate())
    return expr


@_push.register
def _(expr: Ident, is_real: RealTest):
    return expr if is_real(expr.name) else Conj(expr)


@_push.register
def _(expr: Conj, is_real: RealTest):
    return expr.operand


@_push.register
def _(expr: Neg, is_real: RealTest):
    return Neg(_push(expr.operand, is_real))


@_push.register
def _(expr: Binary, is_real: RealTest):
    return Binary(expr.op, _push(expr.left, is_real), _push(expr.right, is_real))


@_push.register
def _(expr: Call, is_real: RealTest):
    if expr.func in REAL_RESULT:
        return expr
    if expr.func in CONJ_COMMUTING:
        return Call(expr.func, (_push(expr.args[0], is_real),), expr.line, expr.column)
    return Conj(expr)
