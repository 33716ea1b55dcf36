"""
Model Compiler
Turns a validated ModelDocument into a CompiledModel: a populated Env,
the ordered unknowns, and the sparse systems with their cached
symbolic Jacobians. SubModels compile recursively against the parent.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from engine.distributions import build_distribution
from language.document import ModelDocument, ParamDecl, VarDecl, attribute_flag, attribute_text
from language.validator import param_declarations, var_declarations, var_has_conjugate
from solvers.sparse_system import SparseSystem
from solvers.wls import MeasurementSet
from symbolic.env import Env
from symbolic.evaluate import evaluate
from symbolic.expr import Call, Expr, Ident, free_symbols, walk
from symbolic.jacobian import Unknown
from utils.errors import AssignmentError, EvaluationError
from utils.utils_logger import logger

#####################################
# Compiled Model
#####################################


@dataclass(eq=False)
class CompiledModel:
    document: ModelDocument
    env: Env
    unknowns: List[Unknown]
    max_iter: int
    param_order: List[str] = field(default_factory=list)
    copied: List[str] = field(default_factory=list)
    # parameters whose initializer reads other parameters
    derived: Dict[str, Expr] = field(default_factory=dict)
    var_inits: Dict[str, Optional[Expr]] = field(default_factory=dict)
    system: Optional[SparseSystem] = None
    measurements: Optional[MeasurementSet] = None
    submodels: List["CompiledModel"] = field(default_factory=list)
    # parameters written by assignments; derived refresh skips them
    written: set = field(default_factory=set)
    parent: Optional["CompiledModel"] = field(default=None, repr=False)

    @property
    def name(self) -> str:
        return self.document.name or ("main" if self.env.parent is None else "submodel")

    @property
    def is_wls(self) -> bool:
        return self.document.model_type == "WLS"

    @property
    def complex_domain(self) -> bool:
        return self.document.is_complex

    def statements(self, kind: str) -> list:
        return self.document.statements_of(kind)

    def has_group(self, kind: str) -> bool:
        return self.document.group(kind) is not None


#####################################
# Helper Functions
#####################################


def _uses_rnd(expr: Expr) -> bool:
    return any(isinstance(node, Call) and node.func == "rnd" for node in walk(expr))


def param_kind(decl: ParamDecl, complex_domain: bool, value) -> str:
    """Explicit type wins; a boolean initializer makes a bool; else the domain."""
    explicit = attribute_text(decl.attributes, "type", "")
    if explicit:
        return explicit
    if isinstance(value, bool):
        return "bool"
    return "complex" if complex_domain else "real"


def default_variable_value(complex_domain: bool):
    return complex(1.0, 0.0) if complex_domain else 0.0


def _declare_params(model: CompiledModel, parent: Optional["CompiledModel"]) -> None:
    env = model.env
    document = model.document
    if parent is not None:
        model.copied = parent.param_order[: document.copy_pars]
        for name in model.copied:
            binding = parent.env.binding(name)
            env.declare(name, binding.value, binding.kind, "param", binding.out)
            model.param_order.append(name)

    for decl in param_declarations(document):
        if decl.init is None:
            value = False if attribute_text(decl.attributes, "type", "") == "bool" else 0
        else:
            value = evaluate(decl.init, env)
            names = free_symbols(decl.init)
            if names and not _uses_rnd(decl.init):
                model.derived[decl.name] = decl.init
        kind = param_kind(decl, document.is_complex, value)
        out = attribute_flag(decl.attributes, "out", False)
        try:
            env.declare(decl.name, value, kind, "param", out)
        except AssignmentError as e:
            raise AssignmentError(f"parameter '{decl.name}': {e}") from None
        if decl.name not in model.param_order:
            model.param_order.append(decl.name)


def _declare_variables(model: CompiledModel) -> List[VarDecl]:
    env = model.env
    complex_domain = model.document.is_complex
    kind = "complex" if complex_domain else "real"
    declarations = var_declarations(model.document)
    for decl in declarations:
        model.var_inits[decl.name] = decl.init
        if decl.init is None:
            value = default_variable_value(complex_domain)
            logger.warning(
                f"Variable '{decl.name}' in {model.name} has no initial value; starting at {value}"
            )
        else:
            value = evaluate(decl.init, env)
        env.declare(decl.name, value, kind, "var", attribute_flag(decl.attributes, "out", False))
        model.unknowns.append((decl.name, False))
        if var_has_conjugate(decl, complex_domain):
            model.unknowns.append((decl.name, True))
    return declarations


def _build_systems(model: CompiledModel) -> None:
    document = model.document
    env = model.env
    complex_domain = document.is_complex
    is_real = env.is_real_typed
    if model.is_wls:
        measurements = SparseSystem(document.statements_of("WLSEs"), model.unknowns, complex_domain, is_real)
        constraints = None
        if document.group("ECs") is not None:
            constraints = SparseSystem(document.statements_of("ECs"), model.unknowns, complex_domain, is_real)
        model.measurements = MeasurementSet(measurements, constraints)
    else:
        model.system = SparseSystem(document.statements_of("NLEs"), model.unknowns, complex_domain, is_real)


#####################################
# Public Functions
#####################################


def reset_variables(model: CompiledModel, skip=()) -> None:
    """Re-evaluate every variable initializer not listed in skip."""
    complex_domain = model.document.is_complex
    for name, init in model.var_inits.items():
        if name in skip:
            continue
        value = default_variable_value(complex_domain) if init is None else evaluate(init, model.env)
        model.env.set(name, value)


def refresh_derived(model: CompiledModel) -> List[str]:
    """Re-evaluate derived parameters that no assignment has written."""
    refreshed = []
    for name, init in model.derived.items():
        if name in model.written:
            continue
        value = evaluate(init, model.env)
        if model.env.get(name) != value:
            model.env.set(name, value)
            refreshed.append(name)
    return refreshed


def copy_parent_params(model: CompiledModel) -> None:
    for name in model.copied:
        model.env.set(name, model.parent.env.get(name))


def compile_document(
    document: ModelDocument,
    rng: Optional[np.random.Generator] = None,
    parent: Optional[CompiledModel] = None,
) -> CompiledModel:
    """Build Env, unknowns and cached sparse systems for a document tree."""
    inherited = parent.max_iter if parent is not None else None
    env = Env(
        document.domain,
        parent=parent.env if parent is not None else None,
        rng=rng,
        name=document.name or ("main" if parent is None else "submodel"),
    )
    model = CompiledModel(document, env, [], document.max_iter(inherited), parent=parent)

    distributions = document.statements_of("Distributions")
    # numeric attributes first so parameter initializers may draw
    for decl in distributions:
        if not any(isinstance(raw, Ident) for raw in (decl.mean, decl.dev)):
            env.distributions[decl.name] = build_distribution(decl)
    try:
        _declare_params(model, parent)
        for decl in distributions:
            env.distributions[decl.name] = build_distribution(decl, env)
        _declare_variables(model)
    except EvaluationError as e:
        raise EvaluationError(f"{model.name}: {e}") from None

    _build_systems(model)
    for group in document.groups_of("SubModel"):
        if group.body is not None:
            model.submodels.append(compile_document(group.body, rng, model))

    logger.info(
        f"Compiled {model.name}: {len(model.param_order)} parameter(s), "
        f"{len(model.unknowns)} unknown(s), {len(model.submodels)} submodel(s)"
    )
    return model
