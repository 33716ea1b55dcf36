"""
Numeric evaluation of expression trees against an Env.

Real operands go through `math`, complex operands through `cmath`.
Booleans may only feed guards; comparisons refuse complex operands so
model authors must spell out abs() or real().
"""

#####################################
# Import Modules
#####################################

import cmath
import math
from functools import singledispatch

from symbolic.env import Env
from symbolic.expr import Binary, Call, Compare, Conj, Const, Expr, Ident, Neg
from utils.errors import EvaluationError

#####################################
# Value Helpers
#####################################


def _is_complex(value) -> bool:
    return isinstance(value, complex)


def _arith(value, where: str):
    if isinstance(value, bool):
        raise EvaluationError(f"boolean value used in arithmetic ({where})")
    return value


def _real_scalar(value, where: str) -> float:
    """Accept real values and complex values with an exactly zero imaginary part."""
    if isinstance(value, bool):
        raise EvaluationError(f"boolean value used in arithmetic ({where})")
    if isinstance(value, complex):
        if value.imag != 0.0:
            raise EvaluationError(f"{where} needs a real argument, got {value!r}")
        return value.real
    return value


def round_half_away(value: float, digits: int = 0) -> float:
    scale = 10.0 ** digits
    scaled = abs(value) * scale
    return math.copysign(math.floor(scaled + 0.5) / scale, value)


def disc(value: float, center: float, step: float) -> float:
    """Nearest point of the grid center + k*step."""
    if step <= 0:
        raise EvaluationError(f"disc() step must be positive, got {step}")
    return center + round_half_away((value - center) / step) * step


#####################################
# Builtin Functions
#####################################


def _unary_math(real_fn, complex_fn, name):
    def apply(value):
        value = _arith(value, name)
        try:
            if _is_complex(value):
                return complex_fn(value)
            return real_fn(value)
        except (ValueError, OverflowError) as e:
            raise EvaluationError(f"{name}({value!r}): {e}") from None

    return apply


def _sign(value):
    value = _real_scalar(value, "sign")
    if value == 0:
        raise EvaluationError("sign() is undefined at 0 (derivative of abs at 0)")
    return 1.0 if value > 0 else -1.0


def _conj(value):
    value = _arith(value, "conj")
    return value.conjugate() if _is_complex(value) else value


def _real(value):
    value = _arith(value, "real")
    return float(value.real) if _is_complex(value) else float(value)


def _imag(value):
    value = _arith(value, "imag")
    return float(value.imag) if _is_complex(value) else 0.0


def _abs(value):
    return float(abs(_arith(value, "abs")))


UNARY_FUNCTIONS = {
    "sin": _unary_math(math.sin, cmath.sin, "sin"),
    "cos": _unary_math(math.cos, cmath.cos, "cos"),
    "tan": _unary_math(math.tan, cmath.tan, "tan"),
    "asin": _unary_math(math.asin, cmath.asin, "asin"),
    "acos": _unary_math(math.acos, cmath.acos, "acos"),
    "atan": _unary_math(math.atan, cmath.atan, "atan"),
    "sqrt": _unary_math(math.sqrt, cmath.sqrt, "sqrt"),
    "exp": _unary_math(math.exp, cmath.exp, "exp"),
    "log": _unary_math(math.log, cmath.log, "log"),
    "abs": _abs,
    "sign": _sign,
    "conj": _conj,
    "real": _real,
    "imag": _imag,
}


def _power(base, exponent, base_is_e: bool):
    base = _arith(base, "^")
    exponent = _arith(exponent, "^")
    try:
        if base_is_e:
            if _is_complex(exponent):
                return cmath.exp(exponent)
            return math.exp(exponent)
        result = base ** exponent
    except ZeroDivisionError:
        raise EvaluationError(f"division by zero in {base!r}^{exponent!r}") from None
    except OverflowError as e:
        raise EvaluationError(f"overflow in {base!r}^{exponent!r}: {e}") from None
    if _is_complex(result) and not (_is_complex(base) or _is_complex(exponent)):
        raise EvaluationError(f"{base!r}^{exponent!r} has no real value")
    return result


def apply_binary(op: str, left, right, base_is_e: bool = False):
    if op == "^":
        return _power(left, right, base_is_e)
    left = _arith(left, op)
    right = _arith(right, op)
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if right == 0:
            raise EvaluationError("division by zero")
        return left / right
    raise EvaluationError(f"unknown operator '{op}'")


def _compare(op: str, left, right) -> bool:
    for side in (left, right):
        if isinstance(side, bool):
            raise EvaluationError(f"boolean operand in comparison '{op}'")
        if _is_complex(side):
            raise EvaluationError(
                f"complex operand {side!r} in comparison '{op}'; use abs() or real()"
            )
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise EvaluationError(f"unknown comparison '{op}'")


#####################################
# Evaluation
#####################################


@singledispatch
def evaluate(expr: Expr, env: Env):
    raise EvaluationError(f"cannot evaluate {type(expr).__name__}")


@evaluate.register
def _(expr: Const, env: Env):
    return expr.value


@evaluate.register
def _(expr: Ident, env: Env):
    return env.get(expr.name)


@evaluate.register
def _(expr: Neg, env: Env):
    return -_arith(evaluate(expr.operand, env), "unary -")


@evaluate.register
def _(expr: Conj, env: Env):
    return _conj(evaluate(expr.operand, env))


@evaluate.register
def _(expr: Binary, env: Env):
    base_is_e = expr.op == "^" and isinstance(expr.left, Const) and expr.left.symbol == "e"
    return apply_binary(expr.op, evaluate(expr.left, env), evaluate(expr.right, env), base_is_e)


@evaluate.register
def _(expr: Compare, env: Env):
    return _compare(expr.op, evaluate(expr.left, env), evaluate(expr.right, env))


@evaluate.register
def _(expr: Call, env: Env):
    if expr.func == "rnd":
        target = expr.args[0]
        if not isinstance(target, Ident):
            raise EvaluationError("rnd() takes a distribution name")
        return env.draw(target.name)
    args = [evaluate(arg, env) for arg in expr.args]
    if expr.func == "round":
        digits = _real_scalar(args[1], "round")
        if digits != int(digits):
            raise EvaluationError(f"round() digits must be integral, got {digits}")
        return round_half_away(_real_scalar(args[0], "round"), int(digits))
    if expr.func == "disc":
        return disc(*(_real_scalar(a, "disc") for a in args))
    try:
        fn = UNARY_FUNCTIONS[expr.func]
    except KeyError:
        raise EvaluationError(f"unknown function '{expr.func}'") from None
    return fn(args[0])


def evaluate_guard(expr: Expr, env: Env) -> bool:
    """Evaluate a guard and insist on a boolean result."""
    value = evaluate(expr, env)
    if not isinstance(value, bool):
        raise EvaluationError(f"guard evaluated to {value!r}, expected true/false")
    return value
