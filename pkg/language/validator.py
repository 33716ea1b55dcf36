"""
Document Validator
Static checks over a parsed ModelDocument.

Every problem becomes a Diagnostic; validation never stops at the first
one. Error-level diagnostics block execution, warnings are advisory.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from data.defaults import (
    DISTRIBUTION_KINDS,
    NON_SMOOTH_FUNCTIONS,
    PARAM_TYPES,
    REPORT_LEVELS,
    MODEL_TYPES,
    is_reserved,
    normalize_domain,
)
from language.document import (
    AssignStmt,
    Diagnostic,
    DistDecl,
    EquationStmt,
    IfStmt,
    ModelDocument,
    ParamDecl,
    RepeatMarker,
    SwitchStmt,
    VarDecl,
    attribute_flag,
    attribute_text,
    attribute_value,
    find_attribute,
)
from symbolic.expr import Call, Compare, Conj, Expr, Ident, walk
from utils.errors import ValidationError
from utils.utils_logger import logger

ASSIGNMENT_KINDS = ("ReInit", "PreProc", "PostProc", "IterPostP", "BasePostP", "Repeats")

#####################################
# Scope
#####################################


@dataclass
class Scope:
    """Names visible inside one model or submodel."""

    params: Dict[str, ParamDecl] = field(default_factory=dict)
    param_order: List[str] = field(default_factory=list)
    variables: Dict[str, VarDecl] = field(default_factory=dict)
    distributions: Dict[str, DistDecl] = field(default_factory=dict)
    copied: List[str] = field(default_factory=list)
    parent: Optional["Scope"] = None
    complex_domain: bool = False

    def declares(self, name: str) -> bool:
        return name in self.params or name in self.variables or name in self.copied

    def param_kind(self, name: str) -> str:
        decl = self.params.get(name)
        if decl is None:
            return "complex" if self.complex_domain else "real"
        default = "complex" if self.complex_domain else "real"
        return attribute_text(decl.attributes, "type", default)


def param_declarations(document: ModelDocument) -> List[ParamDecl]:
    return [s for s in document.statements_of("Params") if isinstance(s, ParamDecl)]


def var_declarations(document: ModelDocument) -> List[VarDecl]:
    """Variables with group-level attributes appended; per-declaration ones win."""
    merged = []
    for group in document.groups_of("Vars"):
        for decl in group.statements:
            if isinstance(decl, VarDecl):
                merged.append(
                    VarDecl(decl.name, decl.init, decl.attributes + group.attributes,
                            line=decl.line, column=decl.column)
                )
    return merged


def var_has_conjugate(decl: VarDecl, complex_domain: bool) -> bool:
    return complex_domain and attribute_flag(decl.attributes, "conj", True)


#####################################
# Validator
#####################################


class _Validator:
    def __init__(self, document: ModelDocument):
        self.document = document
        self.diagnostics: List[Diagnostic] = []

    def report(self, message: str, node=None, severity: str = "error") -> None:
        line = getattr(node, "line", 0) or 0
        column = getattr(node, "column", 0) or 0
        self.diagnostics.append(
            Diagnostic(message, line, column, self.document.source, severity)
        )

    # ---- model level --------------------------------------------------

    def run(self) -> List[Diagnostic]:
        self.check_header(self.document)
        self.check_model(self.document, parent=None)
        return self.diagnostics

    def check_header(self, document: ModelDocument) -> None:
        header = document.header
        if header is None:
            return
        report = attribute_text(header.attributes, "report", "Solved")
        if report not in REPORT_LEVELS:
            attr = find_attribute(header.attributes, "report")
            self.report(f"unknown report level '{report}' (use {', '.join(REPORT_LEVELS)})", attr)
        for name in ("maxIter", "maxReps"):
            attr = find_attribute(header.attributes, name)
            if attr is not None and (not isinstance(attr.value, int) or isinstance(attr.value, bool) or attr.value < 1):
                self.report(f"{name} must be a positive integer", attr)

    def check_model(self, document: ModelDocument, parent: Optional[Scope]) -> None:
        model = document.model
        model_type = document.model_type
        if model_type not in MODEL_TYPES:
            self.report(f"unknown model type '{model_type}'", model)
        domain = attribute_text(model.attributes, "domain", "real")
        if not normalize_domain(domain):
            self.report(f"unknown domain '{domain}'", model)
        eps = attribute_value(model.attributes, "eps", 1e-6)
        if isinstance(eps, bool) or not isinstance(eps, (int, float)) or eps <= 0:
            self.report("eps must be a positive number", model)

        scope = self.build_scope(document, parent)
        self.check_equation_groups(document, scope)
        for kind in ASSIGNMENT_KINDS:
            for group in document.groups_of(kind):
                self.check_assignments(group.statements, scope, kind)
        for limits in document.groups_of("Limits"):
            for group in limits.statements:
                self.check_assignments(group.statements, scope, "Limits")
        for group in document.groups_of("SubModel"):
            if group.body is not None:
                self.check_model(group.body, scope)

    # ---- declarations -------------------------------------------------

    def build_scope(self, document: ModelDocument, parent: Optional[Scope]) -> Scope:
        scope = Scope(parent=parent, complex_domain=document.is_complex)
        if parent is not None:
            count = document.copy_pars
            if count > len(parent.param_order):
                self.report(
                    f"copyPars={count} but the parent model declares only "
                    f"{len(parent.param_order)} parameter(s)",
                    document.model,
                )
            scope.copied = parent.param_order[:count]
            for name in scope.copied:
                scope.params[name] = parent.params[name]
                scope.param_order.append(name)

        for decl in param_declarations(document):
            self.check_name(decl.name, decl, "parameter")
            if decl.name in scope.params and decl.name not in scope.copied:
                self.report(f"duplicate declaration of parameter '{decl.name}'", decl)
            kind = attribute_text(decl.attributes, "type", "")
            if kind and kind not in PARAM_TYPES:
                self.report(f"unknown parameter type '{kind}'", decl)
            if decl.init is not None:
                self.check_param_init(decl, scope, document)
            scope.params[decl.name] = decl
            if decl.name not in scope.param_order:
                scope.param_order.append(decl.name)

        for decl in var_declarations(document):
            self.check_name(decl.name, decl, "variable")
            if decl.name in scope.variables:
                self.report(f"duplicate declaration of variable '{decl.name}'", decl)
            if decl.name in scope.params:
                self.report(f"variable '{decl.name}' shadows a parameter of the same name", decl)
            if decl.init is None:
                self.report(
                    f"variable '{decl.name}' has no initial value; "
                    "explicit initialization is recommended",
                    decl,
                    "warning",
                )
            else:
                for ident in self.referenced(decl.init):
                    if ident.name not in scope.params and ident.name not in scope.variables:
                        self.report(f"undeclared identifier '{ident.name}' in initializer of '{decl.name}'", ident)
            scope.variables[decl.name] = decl

        for decl in document.statements_of("Distributions"):
            self.check_name(decl.name, decl, "distribution")
            if decl.kind not in DISTRIBUTION_KINDS:
                self.report(f"unknown distribution type '{decl.kind}'", decl)
            for attr in ("mean", "dev"):
                value = attribute_value(decl.attributes, attr, 0)
                if isinstance(value, Ident):
                    if value.name not in scope.params:
                        self.report(f"undeclared parameter '{value.name}' in {attr}", decl)
                elif isinstance(value, bool) or not isinstance(value, (int, float)):
                    self.report(f"distribution {attr} must be a number", decl)
                elif attr == "dev" and value < 0:
                    self.report(f"distribution '{decl.name}' has negative dev", decl)
            scope.distributions[decl.name] = decl
        return scope

    def check_name(self, name: str, node, what: str) -> None:
        if is_reserved(name):
            self.report(f"reserved word '{name}' cannot name a {what}", node)

    def check_param_init(self, decl: ParamDecl, scope: Scope, document: ModelDocument) -> None:
        later = {d.name for d in param_declarations(document)} - set(scope.params)
        variables = {d.name for d in var_declarations(document)}
        for ident in self.referenced(decl.init):
            if ident.name in scope.params:
                continue
            if ident.name in later:
                self.report(
                    f"parameter '{decl.name}' refers to '{ident.name}' before it is declared",
                    ident,
                )
            elif ident.name in variables:
                self.report(f"parameter '{decl.name}' cannot depend on variable '{ident.name}'", ident)
            else:
                self.report(f"undeclared identifier '{ident.name}'", ident)
        self.check_rnd(decl.init, scope, decl)

    # ---- expressions ----------------------------------------------------

    @staticmethod
    def referenced(expr: Expr) -> List[Ident]:
        """Identifiers in expr, skipping the distribution name inside rnd()."""
        found = []
        stack = [expr]
        while stack:
            node = stack.pop()
            if isinstance(node, Ident):
                found.append(node)
            elif isinstance(node, Call) and node.func == "rnd":
                continue
            else:
                stack.extend(node.children())
        return found

    def check_identifiers(self, expr: Expr, scope: Scope) -> None:
        for ident in self.referenced(expr):
            if not scope.declares(ident.name):
                self.report(f"undeclared identifier '{ident.name}'", ident)

    def check_rnd(self, expr: Expr, scope: Scope, node) -> None:
        for call in walk(expr):
            if isinstance(call, Call) and call.func == "rnd":
                target = call.args[0]
                if not isinstance(target, Ident):
                    self.report("rnd() takes a distribution name", call)
                elif target.name not in scope.distributions:
                    self.report(f"unknown distribution '{target.name}'", target)

    # ---- equations -------------------------------------------------------

    def check_equation_groups(self, document: ModelDocument, scope: Scope) -> None:
        model_type = document.model_type
        if model_type == "NL" and document.group("NLEs") is None:
            self.report("an NL model needs an NLEs group", document.model)
        if model_type == "WLS" and document.group("WLSEs") is None:
            self.report("a WLS model needs a WLSEs group", document.model)

        for kind in ("NLEs", "WLSEs", "ECs"):
            for group in document.groups_of(kind):
                for stmt in group.statements:
                    self.check_equation_stmt(stmt, scope, kind)

        if model_type == "NL":
            equations = sum(self.count_equations(s) for s in document.statements_of("NLEs"))
            unknowns = 0
            for decl in scope.variables.values():
                unknowns += 2 if var_has_conjugate(decl, scope.complex_domain) else 1
            if equations != unknowns:
                self.report(
                    f"NL model has {equations} equation(s) but {unknowns} unknown(s)",
                    document.model,
                )

    def check_equation_stmt(self, stmt, scope: Scope, kind: str) -> None:
        if isinstance(stmt, EquationStmt):
            for expr in filter(None, (stmt.lhs, stmt.rhs)):
                self.check_equation_expr(expr, scope)
            weight = find_attribute(stmt.attributes, "w")
            if kind == "WLSEs" and weight is None:
                self.report("measurement equation without a weight [w=...]", stmt)
            if kind != "WLSEs" and weight is not None:
                self.report(f"{kind} equations take no weight", stmt)
            if weight is not None:
                self.check_weight(weight.value, scope, stmt)
        elif isinstance(stmt, IfStmt):
            self.check_guard(stmt.guard, scope)
            for inner in stmt.then + stmt.otherwise:
                self.check_equation_stmt(inner, scope, kind)
            if self.count_block(stmt.then) != self.count_block(stmt.otherwise):
                self.report("if/else branches hold different numbers of equations", stmt)
        elif isinstance(stmt, SwitchStmt):
            self.check_switch(stmt, scope)
            counts = set()
            for case in stmt.cases:
                for inner in case.body:
                    self.check_equation_stmt(inner, scope, kind)
                counts.add(self.count_block(case.body))
            if len(counts) > 1:
                self.report("switch arms hold different numbers of equations", stmt)
        elif isinstance(stmt, RepeatMarker):
            self.report("'repeat' is only allowed in the Repeats group", stmt)

    def check_equation_expr(self, expr: Expr, scope: Scope) -> None:
        self.check_identifiers(expr, scope)
        for node in walk(expr):
            if isinstance(node, Call) and node.func in NON_SMOOTH_FUNCTIONS:
                self.report(f"{node.func}() may only appear in assignments, not in equations", node)
            elif isinstance(node, Compare):
                self.report("comparisons may only appear in guards", expr)
            elif isinstance(node, Conj) and isinstance(node.operand, Ident):
                decl = scope.variables.get(node.operand.name)
                if decl is not None and not var_has_conjugate(decl, scope.complex_domain) and scope.complex_domain:
                    self.report(f"conj({decl.name}) used but '{decl.name}' is declared conj=false", node.operand)

    def check_weight(self, value, scope: Scope, node) -> None:
        if isinstance(value, Ident):
            if value.name not in scope.params:
                self.report(f"weight refers to undeclared parameter '{value.name}'", node)
        elif isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
            self.report("weights must be positive numbers or parameter names", node)

    def check_guard(self, guard: Expr, scope: Scope) -> None:
        self.check_identifiers(guard, scope)
        for node in walk(guard):
            if isinstance(node, Call) and node.func == "rnd":
                self.report("rnd() cannot appear in a guard", node)

    def check_switch(self, stmt: SwitchStmt, scope: Scope) -> None:
        defaults = [i for i, case in enumerate(stmt.cases) if case.is_default]
        if len(defaults) > 1:
            self.report("switch has more than one default", stmt.cases[defaults[1]])
        if defaults and defaults[0] != len(stmt.cases) - 1:
            self.report("'default' must be the last case of a switch", stmt.cases[defaults[0]])
        for case in stmt.cases:
            if case.guard is not None:
                self.check_guard(case.guard, scope)
            for inner in case.body:
                if isinstance(inner, (IfStmt, SwitchStmt)):
                    self.report("switch arms hold simple statements only", inner)

    def count_equations(self, stmt) -> int:
        if isinstance(stmt, EquationStmt):
            return 1
        if isinstance(stmt, IfStmt):
            return self.count_block(stmt.then)
        if isinstance(stmt, SwitchStmt):
            return self.count_block(stmt.cases[0].body) if stmt.cases else 0
        return 0

    def count_block(self, statements) -> int:
        return sum(self.count_equations(s) for s in statements)

    # ---- assignments ------------------------------------------------------

    def check_assignments(self, statements, scope: Scope, kind: str) -> None:
        for stmt in statements:
            if isinstance(stmt, AssignStmt):
                self.check_assign(stmt, scope)
            elif isinstance(stmt, IfStmt):
                self.check_guard(stmt.guard, scope)
                self.check_assignments(stmt.then + stmt.otherwise, scope, kind)
            elif isinstance(stmt, SwitchStmt):
                self.check_switch(stmt, scope)
                for case in stmt.cases:
                    self.check_assignments(case.body, scope, kind)
            elif isinstance(stmt, RepeatMarker) and kind != "Repeats":
                self.report("'repeat' is only allowed in the Repeats group", stmt)
            elif isinstance(stmt, EquationStmt):
                self.report("equations are not allowed here; use an assignment", stmt)

    def check_assign(self, stmt: AssignStmt, scope: Scope) -> None:
        target = stmt.target
        self.check_identifiers(stmt.expr, scope)
        self.check_rnd(stmt.expr, scope, stmt)
        owner = scope
        if target.main:
            if scope.parent is None:
                self.report("'@main.' targets are only allowed inside a SubModel", stmt)
                return
            owner = scope.parent
        if not owner.declares(target.name):
            where = "the main model" if target.main else "this model"
            self.report(f"cannot assign '{target.name}': not declared in {where}", stmt)
            return
        if target.component == "imag" and target.name in owner.params:
            if owner.param_kind(target.name) != "complex":
                self.report(f"'.imag' on real-typed parameter '{target.name}'", stmt)


#####################################
# Public Functions
#####################################


def validate_document(document: ModelDocument) -> List[Diagnostic]:
    """All diagnostics for a document, in discovery order."""
    diagnostics = _Validator(document).run()
    for diagnostic in diagnostics:
        if diagnostic.is_error:
            logger.error(str(diagnostic))
        else:
            logger.warning(str(diagnostic))
    return diagnostics


def ensure_valid(document: ModelDocument) -> List[Diagnostic]:
    """Raise ValidationError when any error-level diagnostic exists."""
    diagnostics = validate_document(document)
    errors = [d for d in diagnostics if d.is_error]
    if errors:
        raise ValidationError(errors)
    return diagnostics
