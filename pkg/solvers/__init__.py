"""
Numeric solvers: sparse assembly, linear solve, Newton-Raphson and
Gauss-Newton weighted least squares.
"""

from solvers.linear import linear_solve
from solvers.newton import SolveResult, newton_solve
from solvers.sparse_system import SparseSystem, assemble
from solvers.wls import EstimateResult, MeasurementSet, gauss_newton_wls, residual_report

__all__ = [
    "EstimateResult",
    "MeasurementSet",
    "SolveResult",
    "SparseSystem",
    "assemble",
    "gauss_newton_wls",
    "linear_solve",
    "newton_solve",
    "residual_report",
]
