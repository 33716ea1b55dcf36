"""
Symbolic differentiation.

diff_real() applies the usual rules in real variables. diff_wirtinger()
treats v and conj(v) as independent unknowns; the input must already be
conj-normalized so that Conj only wraps identifiers.

Non-smooth (round, disc) and stochastic (rnd) calls are refused outright.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass
from functools import singledispatch
from typing import Callable

from data.defaults import NON_SMOOTH_FUNCTIONS
from symbolic.conj import normalize_conj
from symbolic.expr import (
    IMAG_UNIT,
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
    calls,
    is_const,
    occurrences,
)
from symbolic.simplify import add, call, div, mul, neg, power, sub
from utils.errors import DifferentiationError

TWO = Const(2)

#####################################
# Differentiation Target
#####################################


@dataclass(frozen=True)
class Target:
    name: str
    conjugated: bool = False
    # Wirtinger mode: abs/real/imag are expanded through conj()
    wirtinger: bool = False
    is_real: Callable[[str], bool] = lambda name: False

    def matches(self, name: str, conjugated: bool) -> bool:
        return self.name == name and self.conjugated == conjugated

    def partner(self) -> "Target":
        return Target(self.name, not self.conjugated, self.wirtinger, self.is_real)


NON_HOLOMORPHIC = frozenset({"abs", "real", "imag"})


def dependencies(expr: Expr, wirtinger: bool = False) -> set:
    """
    (name, conjugated) pairs expr depends on. In Wirtinger mode a name
    under abs/real/imag also depends on its conjugate partner.
    """
    found = occurrences(expr)
    if wirtinger:
        for node in calls(expr):
            if node.func in NON_HOLOMORPHIC:
                found |= {(name, not flag) for name, flag in occurrences(node)}
    return found


def _depends(expr: Expr, target: Target) -> bool:
    return (target.name, target.conjugated) in dependencies(expr, target.wirtinger)


def _refuse_non_smooth(expr: Expr) -> None:
    for node in calls(expr):
        if node.func in NON_SMOOTH_FUNCTIONS:
            raise DifferentiationError(
                f"{node.func}() cannot be differentiated; "
                "use it in assignments, not in equations"
            )


#####################################
# Public Entry Points
#####################################


def diff_real(expr: Expr, var_name: str) -> Expr:
    """d expr / d var_name with expr over real unknowns."""
    _refuse_non_smooth(expr)
    return _d(expr, Target(var_name))


def diff_wirtinger(
    expr: Expr,
    var_name: str,
    conjugated: bool = False,
    is_real: Callable[[str], bool] = lambda name: False,
) -> Expr:
    """
    Wirtinger partial of expr with respect to var_name, or to
    conj(var_name) when conjugated is true.
    """
    _refuse_non_smooth(expr)
    return _d(expr, Target(var_name, conjugated, True, is_real))


#####################################
# Rules
#####################################


@singledispatch
def _d(expr: Expr, target: Target) -> Expr:
    raise DifferentiationError(f"cannot differentiate {type(expr).__name__}")


@_d.register
def _(expr: Const, target: Target):
    return ZERO


@_d.register
def _(expr: Ident, target: Target):
    return ONE if target.matches(expr.name, False) else ZERO


@_d.register
def _(expr: Conj, target: Target):
    inner = expr.operand
    if isinstance(inner, Ident):
        if not target.wirtinger:
            # real unknowns are their own conjugates
            return ONE if target.matches(inner.name, False) else ZERO
        return ONE if target.matches(inner.name, True) else ZERO
    # d conj(f) / dz == conj(d f / d conj(z))
    return normalize_conj(Conj(_d(inner, target.partner())), target.is_real)


@_d.register
def _(expr: Neg, target: Target):
    return neg(_d(expr.operand, target))


@_d.register
def _(expr: Compare, target: Target):
    raise DifferentiationError("comparisons cannot appear inside equations")


@_d.register
def _(expr: Binary, target: Target):
    a, b = expr.left, expr.right
    if expr.op == "+":
        return add(_d(a, target), _d(b, target))
    if expr.op == "-":
        return sub(_d(a, target), _d(b, target))
    if expr.op == "*":
        return add(mul(_d(a, target), b), mul(a, _d(b, target)))
    if expr.op == "/":
        da, db = _d(a, target), _d(b, target)
        if is_const(db, 0):
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, TWO))
    return _d_power(expr, target)


def _d_power(expr: Binary, target: Target) -> Expr:
    a, b = expr.left, expr.right
    if not _depends(b, target):
        # n*a^(n-1)*da
        da = _d(a, target)
        if is_const(da, 0):
            return ZERO
        return mul(mul(b, power(a, sub(b, ONE))), da)
    db = _d(b, target)
    if isinstance(a, Const) and a.symbol == "e":
        return mul(expr, db)
    if not _depends(a, target):
        return mul(mul(expr, call("log", a)), db)
    da = _d(a, target)
    return mul(expr, add(mul(db, call("log", a)), div(mul(b, da), a)))


@_d.register
def _(expr: Call, target: Target):
    if not _depends(expr, target):
        return ZERO
    u = expr.args[0]
    if expr.func in NON_HOLOMORPHIC and target.wirtinger:
        return _d(_EXPANSIONS[expr.func](u, target), target)
    du = _d(u, target)
    if is_const(du, 0):
        return ZERO
    try:
        outer = _OUTER[expr.func]
    except KeyError:
        raise DifferentiationError(f"no derivative rule for {expr.func}()") from None
    return outer(u, du)


#####################################
# Builtin Derivatives
#####################################


def _one_minus_square(u: Expr) -> Expr:
    return sub(ONE, power(u, TWO))


_OUTER = {
    "sin": lambda u, du: mul(call("cos", u), du),
    "cos": lambda u, du: neg(mul(call("sin", u), du)),
    "tan": lambda u, du: div(du, power(call("cos", u), TWO)),
    "asin": lambda u, du: div(du, call("sqrt", _one_minus_square(u))),
    "acos": lambda u, du: neg(div(du, call("sqrt", _one_minus_square(u)))),
    "atan": lambda u, du: div(du, add(ONE, power(u, TWO))),
    "sqrt": lambda u, du: div(du, mul(TWO, call("sqrt", u))),
    "exp": lambda u, du: mul(call("exp", u), du),
    "log": lambda u, du: div(du, u),
    "abs": lambda u, du: mul(call("sign", u), du),
    "real": lambda u, du: du,
    "imag": lambda u, du: ZERO,
    "sign": lambda u, du: ZERO,
}


def _conj_of(u: Expr, target: Target) -> Expr:
    return normalize_conj(Conj(u), target.is_real)


# abs/real/imag are not holomorphic; rewrite them before differentiating
_EXPANSIONS = {
    "abs": lambda u, t: call("sqrt", mul(u, _conj_of(u, t))),
    "real": lambda u, t: div(add(u, _conj_of(u, t)), TWO),
    "imag": lambda u, t: div(sub(u, _conj_of(u, t)), mul(TWO, IMAG_UNIT)),
}
