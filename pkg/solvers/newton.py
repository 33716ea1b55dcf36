"""
Newton-Raphson for square equation groups.

Real models iterate on real unknowns. Complex models iterate on
conjugate-paired unknowns directly in complex arithmetic and overwrite
every conj slot with the conjugate of its primary after each step.
Non-convergence is reported in the result, never raised.
"""

#####################################
# Import Modules
#####################################

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from solvers.linear import linear_solve
from solvers.sparse_system import (
    SparseSystem,
    assemble,
    inf_norm,
    is_finite,
    sparsity_stats,
)
from symbolic.env import Env
from utils.errors import AssignmentError, EvaluationError, SingularMatrixError
from utils.utils_logger import logger

IterationHook = Callable[[Env, int], None]

#####################################
# Results
#####################################


@dataclass
class IterationRecord:
    iteration: int
    residual_norm: float
    arms: Tuple[int, ...] = ()


@dataclass
class SolveResult:
    converged: bool
    iterations: int
    x: np.ndarray
    residual_norm: float
    labels: List[str] = field(default_factory=list)
    trace: List[IterationRecord] = field(default_factory=list)
    arm_history: List[Tuple[int, ...]] = field(default_factory=list)
    failure: Optional[str] = None
    arm_oscillation: bool = False
    sparsity: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "newton"


#####################################
# Helper Functions
#####################################


def _apply_step(system: SparseSystem, env: Env, x: np.ndarray, step: np.ndarray) -> np.ndarray:
    x = x - step
    if system.complex_domain:
        system.enforce_conjugacy(x)
    system.write_state(env, x)
    return x


#####################################
# Public Functions
#####################################


def newton_solve(
    system: SparseSystem,
    env: Env,
    eps: float,
    max_iter: int,
    x0: Optional[np.ndarray] = None,
    on_iteration: Optional[IterationHook] = None,
) -> SolveResult:
    """
    Iterate x <- x - J^-1 r from x0 (or the values bound in env).

    Guards are re-evaluated at every assembly. A point whose residual
    is within eps only counts as converged when its live arms are the
    ones that produced it.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if x0 is not None:
        x = np.array(x0, dtype=system.dtype)
        if x.shape != (system.size,):
            raise ValueError(f"x0 has {x.size} entries, system has {system.size} unknowns")
        if system.complex_domain:
            system.enforce_conjugacy(x)
        system.write_state(env, x)
    x = system.read_state(env)

    result = SolveResult(
        False, 0, x, float("inf"), system.column_labels(), sparsity=sparsity_stats(system)
    )
    previous_arms: Optional[Tuple[int, ...]] = None
    arms_moved_at_solution = False

    for iteration in range(max_iter + 1):
        try:
            assembly = assemble(system, env)
        except EvaluationError as e:
            result.failure = f"evaluation failed at iteration {iteration}: {e}"
            break
        if not result.arm_history or result.arm_history[-1] != assembly.arms:
            result.arm_history.append(assembly.arms)
        if len(assembly.active) != system.size:
            result.failure = (
                f"{len(assembly.active)} live equations for {system.size} unknowns "
                f"at iteration {iteration}"
            )
            break
        if not is_finite(assembly.residual):
            result.failure = f"non-finite residual at iteration {iteration}"
            break

        norm = inf_norm(assembly.residual)
        result.residual_norm = norm
        result.trace.append(IterationRecord(iteration, norm, assembly.arms))
        logger.debug(f"newton iteration {iteration}: |r|inf = {norm:.3e}")

        stable = previous_arms is None or previous_arms == assembly.arms
        if norm <= eps:
            if stable:
                result.converged = True
                break
            arms_moved_at_solution = True
        if iteration == max_iter:
            result.failure = f"no convergence in {max_iter} iterations"
            break

        try:
            step = linear_solve(assembly.jacobian, assembly.residual)
        except SingularMatrixError as e:
            result.failure = f"singular Jacobian at iteration {iteration} (row {e.pivot_row})"
            break
        if not is_finite(step):
            result.failure = f"non-finite update at iteration {iteration}"
            break
        try:
            x = _apply_step(system, env, x, step)
            if on_iteration is not None:
                on_iteration(env, iteration + 1)
        except (EvaluationError, AssignmentError) as e:
            result.failure = f"update failed at iteration {iteration}: {e}"
            result.iterations = iteration + 1
            break
        x = system.read_state(env)
        previous_arms = assembly.arms
        result.iterations = iteration + 1

    result.x = system.read_state(env)
    if not result.converged and arms_moved_at_solution:
        result.arm_oscillation = True
        result.failure = "conditional arms keep switching at the solution"
    if result.converged:
        logger.info(f"Newton converged in {result.iterations} iteration(s), |r|inf = {result.residual_norm:.3e}")
    else:
        logger.warning(f"Newton failed: {result.failure}")
    return result
