"""
Sparse System
Residual vector and numeric sparse Jacobian of an equation group.

Symbolic partials for every equation (including inactive conditional
arms) are derived once. Each assembly re-evaluates the guards, picks
the live arm per conditional site and evaluates only the live rows.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from language.document import EquationStmt, IfStmt, SwitchStmt
from language.printer import format_expression
from symbolic.env import Env
from symbolic.evaluate import evaluate, evaluate_guard
from symbolic.expr import Expr
from symbolic.jacobian import JacobianStructure, Unknown, column_label, jacobian_structure
from utils.errors import EvaluationError

#####################################
# Compiled Pieces
#####################################


@dataclass
class CompiledEquation:
    index: int
    stmt: EquationStmt
    label: str
    residual: Expr
    row: List[Tuple[int, Expr]] = field(default_factory=list)


@dataclass
class ConditionalSite:
    """An if or switch: guards plus one list of sites per arm."""

    stmt: Union[IfStmt, SwitchStmt]
    guards: List[Optional[Expr]]
    arms: List[list]


Site = Union[int, ConditionalSite]


@dataclass
class Assembly:
    residual: np.ndarray
    jacobian: sp.csr_matrix
    active: List[int]
    arms: Tuple[int, ...]


#####################################
# SparseSystem
#####################################


class SparseSystem:
    def __init__(
        self,
        statements: Sequence,
        unknowns: Sequence[Unknown],
        complex_domain: bool,
        is_real: Callable[[str], bool],
    ):
        self.unknowns: List[Unknown] = list(unknowns)
        self.complex_domain = complex_domain
        self.dtype = np.complex128 if complex_domain else np.float64
        self._statements: List[EquationStmt] = []
        self.sites: List[Site] = [self._compile_site(s) for s in statements]
        self.structure: JacobianStructure = jacobian_structure(
            [s.residual for s in self._statements],
            self.unknowns,
            wirtinger=complex_domain,
            is_real=is_real,
        )
        self.equations: List[CompiledEquation] = []
        for i, stmt in enumerate(self._statements):
            self.equations.append(
                CompiledEquation(
                    i,
                    stmt,
                    _label(stmt),
                    self.structure.equations[i],
                    self.structure.row(i),
                )
            )
        self.columns = {u: j for j, u in enumerate(self.unknowns)}

    def _compile_site(self, stmt) -> Site:
        if isinstance(stmt, EquationStmt):
            self._statements.append(stmt)
            return len(self._statements) - 1
        if isinstance(stmt, IfStmt):
            arms = [
                [self._compile_site(s) for s in stmt.then],
                [self._compile_site(s) for s in stmt.otherwise],
            ]
            return ConditionalSite(stmt, [stmt.guard, None], arms)
        if isinstance(stmt, SwitchStmt):
            guards = [case.guard for case in stmt.cases]
            arms = [[self._compile_site(s) for s in case.body] for case in stmt.cases]
            return ConditionalSite(stmt, guards, arms)
        raise TypeError(f"unexpected statement {type(stmt).__name__} in an equation group")

    @property
    def size(self) -> int:
        return len(self.unknowns)

    def column_labels(self) -> List[str]:
        return [column_label(u) for u in self.unknowns]

    # ---- guards -----------------------------------------------------

    def select(self, env: Env) -> Tuple[List[int], Tuple[int, ...]]:
        """Live equation indices and the chosen arm of every site."""
        active: List[int] = []
        arms: List[int] = []
        self._select(self.sites, env, active, arms)
        return active, tuple(arms)

    def _select(self, sites, env: Env, active: List[int], arms: List[int]) -> None:
        for site in sites:
            if isinstance(site, int):
                active.append(site)
                continue
            chosen = _choose_arm(site, env)
            arms.append(chosen)
            if chosen >= 0:
                self._select(site.arms[chosen], env, active, arms)

    # ---- numeric evaluation -----------------------------------------

    def residual(self, env: Env, active: Sequence[int]) -> np.ndarray:
        values = np.empty(len(active), dtype=self.dtype)
        for k, i in enumerate(active):
            values[k] = self._value(self.equations[i].residual, env, i)
        return values

    def jacobian(self, env: Env, active: Sequence[int]) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for k, i in enumerate(active):
            for j, entry in self.equations[i].row:
                rows.append(k)
                cols.append(j)
                vals.append(self._value(entry, env, i))
        shape = (len(active), self.size)
        return sp.coo_matrix(
            (np.asarray(vals, dtype=self.dtype), (rows, cols)), shape=shape
        ).tocsr()

    def _value(self, expr: Expr, env: Env, index: int):
        try:
            value = evaluate(expr, env)
        except EvaluationError as e:
            raise EvaluationError(f"equation {index + 1} ({self.equations[index].label}): {e}") from None
        if isinstance(value, bool):
            raise EvaluationError(f"equation {index + 1} evaluates to a boolean")
        if not self.complex_domain and isinstance(value, complex):
            if value.imag != 0.0:
                raise EvaluationError(
                    f"equation {index + 1} ({self.equations[index].label}) "
                    "is complex in a real-domain model"
                )
            value = value.real
        return value

    # ---- state vector -----------------------------------------------

    def read_state(self, env: Env) -> np.ndarray:
        x = np.empty(self.size, dtype=self.dtype)
        for j, (name, conjugated) in enumerate(self.unknowns):
            value = env.get(name)
            x[j] = value.conjugate() if conjugated and isinstance(value, complex) else value
        return x

    def write_state(self, env: Env, x: np.ndarray) -> None:
        """Store primary slots; conjugate slots follow from them."""
        for j, (name, conjugated) in enumerate(self.unknowns):
            if not conjugated:
                value = x[j]
                env.set(name, complex(value) if self.complex_domain else float(value.real))

    def enforce_conjugacy(self, x: np.ndarray) -> None:
        for j, (name, conjugated) in enumerate(self.unknowns):
            if conjugated:
                x[j] = np.conj(x[self.columns[(name, False)]])


def _choose_arm(site: ConditionalSite, env: Env) -> int:
    for k, guard in enumerate(site.guards):
        if guard is None or evaluate_guard(guard, env):
            return k
    return -1


def _label(stmt: EquationStmt) -> str:
    text = format_expression(stmt.lhs)
    if stmt.rhs is not None:
        text += " = " + format_expression(stmt.rhs)
    return text


#####################################
# Public Functions
#####################################


def assemble(system: SparseSystem, env: Env) -> Assembly:
    """Residual (lhs - rhs) and Jacobian of the live equations at env."""
    active, arms = system.select(env)
    residual = system.residual(env, active)
    jacobian = system.jacobian(env, active)
    return Assembly(residual, jacobian, active, arms)


def is_finite(vector: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(vector)))


def inf_norm(vector: np.ndarray) -> float:
    return float(np.max(np.abs(vector))) if len(vector) else 0.0


def sparsity_stats(system: SparseSystem) -> dict:
    rows, cols = system.structure.shape
    return {
        "equations": rows,
        "unknowns": cols,
        "nonzeros": system.structure.nnz,
        "density": round(system.structure.density(), 6),
    }
