"""
Canonical pretty-printer.

format_document() output re-parses to a structurally identical document;
format_expression() emits the fewest parentheses that keep the tree shape.
"""

#####################################
# Import Modules
#####################################

from functools import singledispatch
from typing import List

from language.document import (
    AssignStmt,
    Attribute,
    DistDecl,
    EquationStmt,
    Group,
    IfStmt,
    ModelDocument,
    ParamDecl,
    RepeatMarker,
    SwitchStmt,
    VarDecl,
)
from symbolic.expr import Binary, Call, Compare, Conj, Const, Expr, Ident, Neg

INDENT = "    "

#####################################
# Expressions
#####################################

COMPARE, ADDITIVE, NEGATION, MULTIPLICATIVE, POWER, ATOM = range(6)

BINARY_PRECEDENCE = {"+": ADDITIVE, "-": ADDITIVE, "*": MULTIPLICATIVE, "/": MULTIPLICATIVE, "^": POWER}


def format_number(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _format_const(expr: Const) -> str:
    if expr.symbol:
        return expr.symbol
    value = expr.value
    if isinstance(value, complex):
        if value.real == 0 and value.imag >= 0:
            return f"{format_number(value.imag)}i"
        if value.real == 0:
            return f"-{format_number(-value.imag)}i"
        sign = "+" if value.imag >= 0 else "-"
        return f"({format_number(value.real)}{sign}{format_number(abs(value.imag))}i)"
    return format_number(value)


def precedence(expr: Expr) -> int:
    if isinstance(expr, Compare):
        return COMPARE
    if isinstance(expr, Binary):
        return BINARY_PRECEDENCE[expr.op]
    if isinstance(expr, Neg):
        return NEGATION
    if isinstance(expr, Const) and not expr.symbol:
        text = _format_const(expr)
        return NEGATION if text.startswith("-") else ATOM
    return ATOM


def _wrap(expr: Expr, needs_parens: bool) -> str:
    text = format_expression(expr)
    return f"({text})" if needs_parens else text


@singledispatch
def format_expression(expr: Expr) -> str:
    raise TypeError(f"cannot format {type(expr).__name__}")


@format_expression.register
def _(expr: Const):
    return _format_const(expr)


@format_expression.register
def _(expr: Ident):
    return expr.name


@format_expression.register
def _(expr: Conj):
    return f"conj({format_expression(expr.operand)})"


@format_expression.register
def _(expr: Call):
    args = ", ".join(format_expression(arg) for arg in expr.args)
    return f"{expr.func}({args})"


@format_expression.register
def _(expr: Neg):
    inner = expr.operand
    return "-" + _wrap(inner, precedence(inner) <= NEGATION)


@format_expression.register
def _(expr: Compare):
    return f"{format_expression(expr.left)} {expr.op} {format_expression(expr.right)}"


@format_expression.register
def _(expr: Binary):
    level = BINARY_PRECEDENCE[expr.op]
    left_level, right_level = precedence(expr.left), precedence(expr.right)
    if expr.op == "^":
        left = _wrap(expr.left, left_level <= POWER)
        right = _wrap(expr.right, right_level < POWER)
    elif level == ADDITIVE:
        # a leading negation needs no parentheses: -a + b
        left = _wrap(expr.left, left_level < ADDITIVE)
        right = _wrap(expr.right, right_level <= NEGATION)
    else:
        left = _wrap(expr.left, left_level < level)
        right = _wrap(expr.right, right_level <= level)
    return f"{left}{expr.op}{right}"


#####################################
# Attributes and Statements
#####################################


def format_attribute_value(value) -> str:
    if isinstance(value, Ident):
        return value.name
    if isinstance(value, str):
        return f'"{value}"'
    return format_number(value)


def format_attributes(attributes: List[Attribute]) -> str:
    if not attributes:
        return ""
    inner = " ".join(f"{a.name}={format_attribute_value(a.value)}" for a in attributes)
    return f"[{inner}]"


def _with_attributes(text: str, attributes: List[Attribute]) -> str:
    suffix = format_attributes(attributes)
    return f"{text} {suffix}" if suffix else text


@singledispatch
def format_statement(stmt, depth: int) -> List[str]:
    raise TypeError(f"cannot format {type(stmt).__name__}")


def _inline(stmt) -> str:
    (line,) = format_statement(stmt, 0)
    return line


@format_statement.register
def _(stmt: EquationStmt, depth: int):
    text = format_expression(stmt.lhs)
    if stmt.rhs is not None:
        text += " = " + format_expression(stmt.rhs)
    return [INDENT * depth + _with_attributes(text, stmt.attributes)]


@format_statement.register
def _(stmt: AssignStmt, depth: int):
    return [f"{INDENT * depth}{stmt.target} {stmt.op} {format_expression(stmt.expr)}"]


@format_statement.register
def _(stmt: VarDecl, depth: int):
    return [INDENT * depth + _format_decl(stmt)]


@format_statement.register
def _(stmt: ParamDecl, depth: int):
    return [INDENT * depth + _format_decl(stmt)]


def _format_decl(stmt) -> str:
    text = stmt.name
    if stmt.init is not None:
        text += " = " + format_expression(stmt.init)
    return _with_attributes(text, stmt.attributes)


@format_statement.register
def _(stmt: DistDecl, depth: int):
    return [INDENT * depth + _with_attributes(stmt.name, stmt.attributes)]


@format_statement.register
def _(stmt: RepeatMarker, depth: int):
    return [INDENT * depth + "repeat"]


@format_statement.register
def _(stmt: IfStmt, depth: int):
    pad = INDENT * depth
    lines = [pad + _with_attributes(f"if {format_expression(stmt.guard)}", stmt.attributes) + ":"]
    for inner in stmt.then:
        lines.extend(format_statement(inner, depth + 1))
    if stmt.otherwise:
        lines.append(pad + "else:")
        for inner in stmt.otherwise:
            lines.extend(format_statement(inner, depth + 1))
    lines.append(pad + "end")
    return lines


@format_statement.register
def _(stmt: SwitchStmt, depth: int):
    pad = INDENT * depth
    lines = [pad + "switch:"]
    for case in stmt.cases:
        head = "default" if case.is_default else f"case {format_expression(case.guard)}"
        head = _with_attributes(head, case.attributes)
        arms = "; ".join(_inline(inner) for inner in case.body)
        lines.append(f"{pad}{INDENT}{head} -> {arms}")
    lines.append(pad + "end")
    return lines


#####################################
# Groups and Documents
#####################################


def _format_group(group: Group, depth: int) -> List[str]:
    pad = INDENT * depth
    keyword = "group" if group.kind == "LimitGroup" else group.kind
    lines = [pad + _with_attributes(keyword, group.attributes) + ":"]
    if group.kind == "SubModel" and group.body is not None:
        for inner in group.body.groups:
            lines.extend(_format_group(inner, depth + 1))
        lines.append(pad + "end")
        return lines
    for stmt in group.statements:
        if isinstance(stmt, Group):
            lines.extend(_format_group(stmt, depth + 1))
        else:
            lines.extend(format_statement(stmt, depth + 1))
    if group.kind == "LimitGroup":
        lines.append(pad + "end")
    return lines


def format_document(document: ModelDocument) -> str:
    """Canonical text of a document, ending with a newline."""
    lines = ["Header:"]
    if document.header is not None:
        for attribute in document.header.attributes:
            lines.append(f"{INDENT}{attribute.name}={format_attribute_value(attribute.value)}")
    lines.append("end")
    lines.append(_with_attributes("Model", document.model.attributes) + ":")
    for group in document.groups:
        lines.extend(_format_group(group, 0))
    lines.append("end")
    return "\n".join(lines) + "\n"
