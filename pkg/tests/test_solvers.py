"""Linear solves, Newton-Raphson and weighted least squares."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from engine import compile_document
from language import parse_text
from solvers import gauss_newton_wls, linear_solve, newton_solve, residual_report
from utils.errors import SingularMatrixError, UnobservableError


def compiled(text: str):
    return compile_document(parse_text(text, "solver.mod"))


def nl(body: str, variables: str = "x=1", domain: str = "real", max_iter: int = 20):
    conj = " conj=true" if domain != "real" else ""
    return compiled(
        f"""Header:
    maxIter={max_iter}
end
Model [type=NL domain={domain} eps=1e-12]:
Vars [out=true{conj}]:
    {variables}
NLEs:
    {body}
end
"""
    )


def wls(measurements: str, variables: str = "x=0", constraints: str = ""):
    ecs = f"ECs:\n    {constraints}\n" if constraints else ""
    return compiled(
        f"""Header:
    maxIter=30
end
Model [type=WLS domain=real eps=1e-12]:
Vars [out=true]:
    {variables}
WLSEs:
    {measurements}
{ecs}end
"""
    )


#####################################
# Linear Solve
#####################################


def test_dense_and_sparse_paths_agree():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    b = rng.standard_normal(6)
    dense = linear_solve(A, b, dense_threshold=100)
    sparse = linear_solve(sp.csr_matrix(A), b, dense_threshold=0)
    np.testing.assert_allclose(dense, np.linalg.solve(A, b), rtol=1e-12)
    np.testing.assert_allclose(sparse, dense, rtol=1e-12)


def test_complex_system():
    A = np.array([[2 + 1j, 1], [1j, 3 - 1j]])
    b = np.array([1, 2j])
    x = linear_solve(sp.csc_matrix(A), b, dense_threshold=0)
    np.testing.assert_allclose(A @ x, b, atol=1e-14)


@pytest.mark.parametrize("threshold", [0, 100])
def test_singular_matrix_names_a_row(threshold):
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError) as info:
        linear_solve(sp.csr_matrix(A), np.ones(2), dense_threshold=threshold)
    assert info.value.pivot_row in (-1, 0, 1)


def test_zero_matrix():
    with pytest.raises(SingularMatrixError) as info:
        linear_solve(np.zeros((3, 3)), np.ones(3))
    assert info.value.pivot_row == 0


def test_non_square_matrix():
    with pytest.raises(ValueError, match="square"):
        linear_solve(np.ones((2, 3)), np.ones(2))


#####################################
# Newton-Raphson
#####################################


def test_newton_converges_quadratically():
    model = nl("x^2 = 2")
    result = newton_solve(model.system, model.env, 1e-12, 20)
    assert result.converged
    assert model.env.get("x") == pytest.approx(math.sqrt(2), abs=1e-12)
    norms = [step.residual_norm for step in result.trace]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert result.iterations <= 6
    assert result.sparsity["nonzeros"] == 1


def test_newton_from_explicit_start():
    model = nl("x^2 = 2")
    result = newton_solve(model.system, model.env, 1e-12, 20, x0=np.array([-3.0]))
    assert result.converged
    assert result.x[0] == pytest.approx(-math.sqrt(2))


def test_newton_reports_singular_jacobian():
    # 1 -> 0 in one step, where d(x^2+1)/dx vanishes
    model = nl("x^2 + 1 = 0")
    result = newton_solve(model.system, model.env, 1e-12, 20)
    assert not result.converged
    assert "singular Jacobian" in result.failure


def test_newton_reports_iteration_limit():
    model = nl("x^2 + 1 = 0", variables="x=0.3", max_iter=4)
    result = newton_solve(model.system, model.env, 1e-12, 4)
    assert not result.converged
    assert result.failure == "no convergence in 4 iterations"


def test_complex_newton_keeps_conjugate_slots_paired():
    model = nl("v*conj(v) = 4\n    v - conj(v) = 2i", variables="v=1+1i", domain="cmplx")
    assert model.unknowns == [("v", False), ("v", True)]
    result = newton_solve(model.system, model.env, 1e-12, 20)
    assert result.converged
    assert model.env.get("v") == pytest.approx(complex(math.sqrt(3), 1), abs=1e-12)
    assert result.x[1] == np.conj(result.x[0])


def test_iteration_hook_sees_every_update():
    model = nl("x^2 = 2")
    seen = []
    newton_solve(model.system, model.env, 1e-12, 20, on_iteration=lambda env, k: seen.append(k))
    assert seen == list(range(1, len(seen) + 1)) and seen


#####################################
# Weighted Least Squares
#####################################


def test_weighted_average():
    model = wls("[w=1] x = 1\n    [w=3] x = 2")
    result = gauss_newton_wls(model.measurements, model.env, 1e-12, 30)
    assert result.converged
    assert model.env.get("x") == pytest.approx(1.75)
    assert result.objective == pytest.approx(0.75)

    table = residual_report(result, model.measurements)
    assert [row.equation for row in table.rows] == ["x = 1", "x = 2"]
    assert table.rows[0].residual == pytest.approx(-0.75)
    assert table.rows[1].weighted == pytest.approx(0.1875)
    assert table.objective == pytest.approx(0.75)


def test_equality_constraint_holds_exactly():
    model = wls("[w=1] x = 1\n    [w=1] y = 3", variables="x=0; y=0", constraints="x - y = 0")
    result = gauss_newton_wls(model.measurements, model.env, 1e-12, 30)
    assert result.converged
    assert model.env.get("x") == pytest.approx(2.0)
    assert model.env.get("y") == pytest.approx(2.0)
    assert len(result.multipliers) == 1
    assert result.multipliers[0] == pytest.approx(1.0)
    assert abs(result.constraint_residuals[0]) < 1e-12


def test_nonlinear_measurements():
    model = wls("[w=1] x^2 = 4\n    [w=1] x*y = 6\n    [w=1] y = 3", variables="x=1; y=1")
    result = gauss_newton_wls(model.measurements, model.env, 1e-12, 30)
    assert result.converged
    assert model.env.get("x") == pytest.approx(2.0, abs=1e-9)
    assert model.env.get("y") == pytest.approx(3.0, abs=1e-9)
    assert result.objective < 1e-16


def test_unobservable_state_is_named():
    model = wls("[w=1] x = 1", variables="x=0; y=0")
    with pytest.raises(UnobservableError, match="state y"):
        gauss_newton_wls(model.measurements, model.env, 1e-12, 30)


def test_constrained_estimate_is_stationary():
    model = wls(
        "[w=1] x^2 = 4.1\n    [w=2] y = 1\n    [w=0.5] x*y = 2",
        variables="x=1; y=1",
        constraints="x + y = 3",
    )
    result = gauss_newton_wls(model.measurements, model.env, 1e-12, 100)
    assert result.converged
    x, y = model.env.get("x"), model.env.get("y")
    r = np.array([4.1 - x**2, 1 - y, 2 - x * y])
    np.testing.assert_allclose(result.residuals, r, atol=1e-12)
    H = np.array([[2 * x, 0.0], [0.0, 1.0], [y, x]])
    C = np.array([[1.0, 1.0]])
    w = np.array([1.0, 2.0, 0.5])
    z = np.array([4.1, 1.0, 2.0])
    gradient = H.T @ (w * r) + C.T @ result.multipliers
    assert np.max(np.abs(gradient)) <= 1e-6 * (1 + np.max(np.abs(H.T @ (w * z))))
    assert x + y == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("scale", [0.01, 7.0, 1e4])
def test_common_weight_scale_leaves_estimate_unchanged(scale):
    measurements = "[w={a}] x^2 = 4.1\n    [w={b}] y = 1\n    [w={c}] x*y = 2"
    base = wls(measurements.format(a=1, b=2, c=0.5), variables="x=1; y=1")
    scaled = wls(measurements.format(a=scale, b=2 * scale, c=0.5 * scale), variables="x=1; y=1")
    first = gauss_newton_wls(base.measurements, base.env, 1e-13, 100)
    second = gauss_newton_wls(scaled.measurements, scaled.env, 1e-13, 100)
    assert first.converged and second.converged
    for name in ("x", "y"):
        assert scaled.env.get(name) == pytest.approx(base.env.get(name), abs=1e-10)
    assert second.objective == pytest.approx(scale * first.objective, rel=1e-8)


def test_exactly_determined_estimate_takes_one_iteration():
    model = wls("[w=1] x = 5")
    result = gauss_newton_wls(model.measurements, model.env, 1e-12, 30)
    assert result.converged
    assert result.iterations == 1
    assert model.env.get("x") == pytest.approx(5.0)
    assert len(result.trace) == 2
