"""
Expression trees for the modeling language.

Nodes are frozen dataclasses, so structural equality and hashing come
for free. Source positions ride along on Ident and Call nodes but are
excluded from comparisons.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import Iterator, Tuple, Union

Number = Union[int, float, complex, bool]

BINARY_OPERATORS = ("+", "-", "*", "/", "^")
COMPARE_OPERATORS = ("<", "<=", ">", ">=")

#####################################
# Node Types
#####################################


class Expr:
    """Base class of every expression node."""

    def children(self) -> Tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class Const(Expr):
    value: Number
    # spelling for e/pi/true/false so printing round-trips
    symbol: str = ""


@dataclass(frozen=True)
class Ident(Expr):
    name: str
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def children(self):
        return (self.operand,)


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Compare(Expr):
    op: str
    left: Expr
    right: Expr

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: Tuple[Expr, ...]
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)

    def children(self):
        return self.args


@dataclass(frozen=True)
class Conj(Expr):
    operand: Expr

    def children(self):
        return (self.operand,)


IMAG_UNIT = Const(1j)
ZERO = Const(0)
ONE = Const(1)

#####################################
# Tree Helpers
#####################################


def walk(expr: Expr) -> Iterator[Expr]:
    """Yield every node, parents before children."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def free_symbols(expr: Expr) -> set:
    """Names of every identifier in the tree (conjugated or not)."""
    return {node.name for node in walk(expr) if isinstance(node, Ident)}


def occurrences(expr: Expr) -> set:
    """
    Set of (name, conjugated) pairs for every identifier in the tree.
    An identifier under an odd number of Conj wrappers counts as
    conjugated.
    """
    found = set()
    stack = [(expr, False)]
    while stack:
        node, flipped = stack.pop()
        if isinstance(node, Ident):
            found.add((node.name, flipped))
        elif isinstance(node, Conj):
            stack.append((node.operand, not flipped))
        else:
            stack.extend((child, flipped) for child in node.children())
    return found


def occurs(expr: Expr, name: str, conjugated: bool = False) -> bool:
    """True when `name` appears in expr, plain or under Conj as requested."""
    return (name, conjugated) in occurrences(expr)


def calls(expr: Expr) -> Iterator[Call]:
    for node in walk(expr):
        if isinstance(node, Call):
            yield node


def is_const(expr: Expr, value=None) -> bool:
    if not isinstance(expr, Const) or isinstance(expr.value, bool):
        return False
    return value is None or expr.value == value
