"""
Weighted least-squares state estimation by Gauss-Newton on the normal
equations, with equality constraints carried by Lagrange multipliers.

Each iteration solves

    [ H^H W H   C^H ] [dx]   [ H^H W r ]
    [ C         0   ] [mu] = [ c       ]

with r = z - h(x) and c = -g(x), then sets x <- x + dx. For real data
H^H is H^T.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from solvers.linear import linear_solve
from solvers.newton import IterationHook, IterationRecord
from solvers.sparse_system import SparseSystem, assemble, inf_norm, is_finite
from symbolic.env import Env
from symbolic.expr import Ident
from utils.errors import (
    AssignmentError,
    EvaluationError,
    SingularMatrixError,
    UnobservableError,
)
from utils.utils_logger import logger

#####################################
# Types
#####################################


@dataclass
class MeasurementSet:
    """Weighted measurement equations plus unweighted equality constraints."""

    measurements: SparseSystem
    constraints: Optional[SparseSystem] = None

    @property
    def unknowns(self):
        return self.measurements.unknowns

    def weights(self, env: Env, active: List[int]) -> np.ndarray:
        values = np.empty(len(active))
        for k, i in enumerate(active):
            stmt = self.measurements.equations[i].stmt
            values[k] = weight_value(stmt.weight, env, i)
        return values


@dataclass
class ResidualRow:
    equation: str
    weight: float
    residual: complex
    weighted: float


@dataclass
class ResidualTable:
    rows: List[ResidualRow]
    objective: float


@dataclass
class EstimateResult:
    converged: bool
    iterations: int
    x: np.ndarray
    labels: List[str] = field(default_factory=list)
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    active: List[int] = field(default_factory=list)
    constraint_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("inf")
    step_norm: float = float("inf")
    trace: List[IterationRecord] = field(default_factory=list)
    failure: Optional[str] = None
    sparsity: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "wls"

    @property
    def residual_norm(self) -> float:
        return self.step_norm


#####################################
# Helper Functions
#####################################


def weight_value(raw, env: Env, index: int) -> float:
    """Resolve a w= attribute (number or parameter name) to a positive real."""
    if raw is None:
        raise EvaluationError(f"measurement {index + 1} has no weight")
    value = env.get(raw.name) if isinstance(raw, Ident) else raw
    if isinstance(value, bool) or not isinstance(value, (int, float, complex)):
        raise EvaluationError(f"measurement {index + 1}: weight {value!r} is not numeric")
    if isinstance(value, complex):
        if value.imag != 0.0:
            raise EvaluationError(f"measurement {index + 1}: weight {value!r} is complex")
        value = value.real
    if not value > 0:
        raise EvaluationError(f"measurement {index + 1}: weight must be positive, got {value}")
    return float(value)


def _empty_constraints(n: int, dtype):
    return np.zeros(0, dtype=dtype), sp.csr_matrix((0, n), dtype=dtype)


def _augmented(gain, C) -> sp.csr_matrix:
    m = C.shape[0]
    if m == 0:
        return sp.csr_matrix(gain)
    return sp.bmat([[gain, C.conj().T], [C, sp.csr_matrix((m, m), dtype=C.dtype)]], format="csr")


def _deficient_block(error: SingularMatrixError, labels: List[str]) -> str:
    row = error.pivot_row
    if row < 0:
        return "gain matrix"
    if row < len(labels):
        return f"gain matrix, state {labels[row]}"
    return f"equality constraint {row - len(labels) + 1}"


class _Linearization:
    """Measurement and constraint values at one point."""

    def __init__(self, mset: MeasurementSet, env: Env):
        n = mset.measurements.size
        dtype = mset.measurements.dtype
        measured = assemble(mset.measurements, env)
        # system residual is lhs - rhs = h(x) - z
        self.r = -measured.residual
        self.H = measured.jacobian
        self.active = measured.active
        self.arms = measured.arms
        self.w = mset.weights(env, measured.active)
        if mset.constraints is not None:
            constrained = assemble(mset.constraints, env)
            self.g = constrained.residual
            self.C = constrained.jacobian
        else:
            self.g, self.C = _empty_constraints(n, dtype)

    def finite(self) -> bool:
        return is_finite(self.r) and is_finite(self.g)

    def objective(self) -> float:
        return float(np.sum(self.w * np.abs(self.r) ** 2))

    def solve(self, labels: List[str]) -> Tuple[np.ndarray, np.ndarray]:
        n = self.H.shape[1]
        W = sp.diags(self.w)
        Hh = self.H.conj().T
        gain = Hh @ W @ self.H
        rhs = np.concatenate([Hh @ (self.w * self.r), -self.g])
        try:
            solution = linear_solve(_augmented(gain, self.C), rhs)
        except SingularMatrixError as e:
            block = _deficient_block(e, labels)
            raise UnobservableError(f"state is unobservable ({block})", block) from None
        return solution[:n], solution[n:]


#####################################
# Public Functions
#####################################


def gauss_newton_wls(
    mset: MeasurementSet,
    env: Env,
    eps: float,
    max_iter: int,
    x0: Optional[np.ndarray] = None,
    on_iteration: Optional[IterationHook] = None,
) -> EstimateResult:
    """
    Estimate the state from the values bound in env (or x0).

    Converges when the infinity norm of the state update is within eps.
    That last update only confirms the estimate, so it is not counted:
    an exactly determined linear problem reports one iteration.
    An unobservable gain matrix raises UnobservableError; every other
    failure comes back as a non-converged result.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    system = mset.measurements
    labels = system.column_labels()
    if x0 is not None:
        x = np.array(x0, dtype=system.dtype)
        if system.complex_domain:
            system.enforce_conjugacy(x)
        system.write_state(env, x)
    x = system.read_state(env)
    result = EstimateResult(False, 0, x, labels)
    result.sparsity = {
        "measurements": system.structure.shape[0],
        "constraints": mset.constraints.structure.shape[0] if mset.constraints else 0,
        "unknowns": system.size,
        "nonzeros": system.structure.nnz
        + (mset.constraints.structure.nnz if mset.constraints else 0),
    }

    for iteration in range(max_iter):
        try:
            point = _Linearization(mset, env)
        except EvaluationError as e:
            result.failure = f"evaluation failed at iteration {iteration}: {e}"
            break
        if not point.finite():
            result.failure = f"non-finite measurement residual at iteration {iteration}"
            break
        step, _ = point.solve(labels)
        if not is_finite(step):
            result.failure = f"non-finite update at iteration {iteration}"
            break
        x = x + step
        if system.complex_domain:
            system.enforce_conjugacy(x)
        try:
            system.write_state(env, x)
            if on_iteration is not None:
                on_iteration(env, iteration + 1)
        except (EvaluationError, AssignmentError) as e:
            result.failure = f"update failed at iteration {iteration}: {e}"
            break
        x = system.read_state(env)
        result.step_norm = inf_norm(step)
        result.trace.append(IterationRecord(iteration, result.step_norm, point.arms))
        logger.debug(f"wls iteration {iteration}: |dx|inf = {result.step_norm:.3e}, J = {point.objective():.6e}")
        if result.step_norm <= eps:
            result.iterations = iteration
            result.converged = True
            break
        result.iterations = iteration + 1
    else:
        result.failure = f"no convergence in {max_iter} iterations"

    result.x = system.read_state(env)
    if result.converged:
        try:
            final = _Linearization(mset, env)
            _, mu = final.solve(labels)
        except (EvaluationError, UnobservableError) as e:
            result.converged = False
            result.failure = f"final evaluation failed: {e}"
        else:
            result.multipliers = -mu
            result.residuals = final.r
            result.weights = final.w
            result.active = final.active
            result.constraint_residuals = final.g
            result.objective = final.objective()
    if result.converged:
        logger.info(
            f"WLS converged in {result.iterations} iteration(s), J = {result.objective:.6e}"
        )
    else:
        logger.warning(f"WLS failed: {result.failure}")
    return result


def residual_report(result: EstimateResult, mset: MeasurementSet) -> ResidualTable:
    """Per-measurement residuals and weighted squares of a converged estimate."""
    rows = []
    for k, i in enumerate(result.active):
        residual = complex(result.residuals[k])
        weight = float(result.weights[k])
        rows.append(
            ResidualRow(
                mset.measurements.equations[i].label,
                weight,
                residual,
                weight * abs(residual) ** 2,
            )
        )
    return ResidualTable(rows, float(sum(row.weighted for row in rows)))
