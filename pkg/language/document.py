"""
Model Document
AST of a parsed model file: groups, statements, attributes and the
diagnostics reported against them.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import List, Optional, Union

from data.defaults import get_header_default, get_model_default, normalize_domain
from symbolic.expr import Binary, Expr, Ident

#####################################
# Attributes
#####################################

# str for quoted text, Ident for bare words such as AllDetails or w_inj
AttributeValue = Union[str, int, float, bool, Ident]


@dataclass
class Attribute:
    name: str
    value: AttributeValue
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)

    @property
    def text(self) -> str:
        if isinstance(self.value, Ident):
            return self.value.name
        if isinstance(self.value, bool):
            return "true" if self.value else "false"
        return str(self.value)


def find_attribute(attributes: List[Attribute], name: str) -> Optional[Attribute]:
    """First occurrence wins; later duplicates are ignored."""
    for attribute in attributes:
        if attribute.name == name:
            return attribute
    return None


def attribute_value(attributes: List[Attribute], name: str, default=None):
    attribute = find_attribute(attributes, name)
    return default if attribute is None else attribute.value


def attribute_flag(attributes: List[Attribute], name: str, default: bool = False) -> bool:
    value = attribute_value(attributes, name, default)
    if isinstance(value, Ident):
        return value.name == "true"
    return bool(value)


def attribute_text(attributes: List[Attribute], name: str, default: str = "") -> str:
    attribute = find_attribute(attributes, name)
    return default if attribute is None else attribute.text


#####################################
# Statements
#####################################


@dataclass
class Statement:
    line: int = field(default=0, compare=False, repr=False, kw_only=True)
    column: int = field(default=0, compare=False, repr=False, kw_only=True)


@dataclass
class EquationStmt(Statement):
    lhs: Expr
    rhs: Optional[Expr] = None
    attributes: List[Attribute] = field(default_factory=list)

    @property
    def residual(self) -> Expr:
        """lhs - rhs, or lhs alone when the equation equals zero."""
        if self.rhs is None:
            return self.lhs
        return Binary("-", self.lhs, self.rhs)

    @property
    def weight(self) -> Optional[AttributeValue]:
        return attribute_value(self.attributes, "w")


@dataclass
class AssignTarget:
    name: str
    main: bool = False
    component: Optional[str] = None  # real | imag

    def __str__(self) -> str:
        text = f"@main.{self.name}" if self.main else self.name
        return f"{text}.{self.component}" if self.component else text


@dataclass
class AssignStmt(Statement):
    target: AssignTarget
    op: str
    expr: Expr


@dataclass
class VarDecl(Statement):
    name: str
    init: Optional[Expr] = None
    attributes: List[Attribute] = field(default_factory=list)


@dataclass
class ParamDecl(Statement):
    name: str
    init: Optional[Expr] = None
    attributes: List[Attribute] = field(default_factory=list)


@dataclass
class DistDecl(Statement):
    name: str
    attributes: List[Attribute] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return attribute_text(self.attributes, "type", "Gauss")

    @property
    def mean(self):
        return attribute_value(self.attributes, "mean", 0)

    @property
    def dev(self):
        return attribute_value(self.attributes, "dev", 0)


@dataclass
class IfStmt(Statement):
    guard: Expr
    attributes: List[Attribute] = field(default_factory=list)
    then: List[Statement] = field(default_factory=list)
    otherwise: List[Statement] = field(default_factory=list)

    @property
    def signal(self) -> str:
        return attribute_text(self.attributes, "signal")


@dataclass
class SwitchCase(Statement):
    guard: Optional[Expr]  # None for default
    attributes: List[Attribute] = field(default_factory=list)
    body: List[Statement] = field(default_factory=list)

    @property
    def is_default(self) -> bool:
        return self.guard is None

    @property
    def signal(self) -> str:
        return attribute_text(self.attributes, "signal")


@dataclass
class SwitchStmt(Statement):
    cases: List[SwitchCase] = field(default_factory=list)


@dataclass
class RepeatMarker(Statement):
    pass


#####################################
# Groups and Documents
#####################################


@dataclass
class Group:
    kind: str
    attributes: List[Attribute] = field(default_factory=list)
    statements: list = field(default_factory=list)
    # nested document for SubModel groups
    body: Optional["ModelDocument"] = None
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)

    def attribute(self, name: str, default=None):
        return attribute_value(self.attributes, name, default)

    @property
    def name(self) -> str:
        return attribute_text(self.attributes, "name")

    @property
    def enabled(self) -> bool:
        return attribute_flag(self.attributes, "enabled", True)


@dataclass
class ModelDocument:
    """One model (or SubModel) with its groups in source order."""

    header: Optional[Group]
    model: Group
    groups: List[Group] = field(default_factory=list)
    source: str = field(default="<model>", compare=False, repr=False)

    @property
    def submodels(self) -> List["ModelDocument"]:
        return [g.body for g in self.groups if g.kind == "SubModel" and g.body is not None]

    def group(self, kind: str) -> Optional[Group]:
        for g in self.groups:
            if g.kind == kind:
                return g
        return None

    def groups_of(self, kind: str) -> List[Group]:
        return [g for g in self.groups if g.kind == kind]

    def statements_of(self, kind: str) -> list:
        return [stmt for g in self.groups_of(kind) for stmt in g.statements]

    def model_attribute(self, name: str):
        return self.model.attribute(name, get_model_default(name))

    def header_attribute(self, name: str):
        if self.header is None:
            return get_header_default(name)
        return self.header.attribute(name, get_header_default(name))

    @property
    def model_type(self) -> str:
        return attribute_text(self.model.attributes, "type", get_model_default("type"))

    @property
    def domain(self) -> str:
        raw = attribute_text(self.model.attributes, "domain", get_model_default("domain"))
        return normalize_domain(raw) or raw

    @property
    def is_complex(self) -> bool:
        return self.domain == "complex"

    @property
    def eps(self) -> float:
        return float(self.model_attribute("eps"))

    @property
    def name(self) -> str:
        return attribute_text(self.model.attributes, "name")

    @property
    def reinit(self) -> bool:
        return attribute_flag(self.model.attributes, "reInit", get_model_default("reInit"))

    @property
    def always_on(self) -> bool:
        return attribute_flag(self.model.attributes, "alwaysOn", get_model_default("alwaysOn"))

    @property
    def copy_pars(self) -> int:
        return int(self.model_attribute("copyPars"))

    @property
    def report_level(self) -> str:
        value = self.header_attribute("report")
        return value.name if isinstance(value, Ident) else str(value)

    @property
    def max_reps(self) -> int:
        return int(self.header_attribute("maxReps"))

    def max_iter(self, inherited: Optional[int] = None) -> int:
        own = self.model.attribute("maxIter")
        if own is not None:
            return int(own)
        if self.header is not None or inherited is None:
            return int(self.header_attribute("maxIter"))
        return inherited


#####################################
# Diagnostics
#####################################


@dataclass
class Diagnostic:
    message: str
    line: int = 0
    column: int = 0
    source: str = "<model>"
    severity: str = "error"  # error | warning

    def __str__(self) -> str:
        return f"{self.source}:{self.line}:{self.column}: {self.severity}: {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity == "error"
