import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from fracweak.elliptic import assemble_operator, eigensolve, shifted_solve, ShiftedFactor
from fracweak.errors import ShapeError, SolverError, ValidationError


def test_laplacian_eigenvalues_1d():
    n = 63
    prob = assemble_operator(1, n)
    h = 1.0 / (n + 1)
    basis = eigensolve(prob, 4)
    k = np.arange(1, 5)
    # [DERIVED] discrete Dirichlet Laplacian: 4/h^2 sin^2(k pi h / 2)
    assert_allclose(basis.eigenvalues, 4 / h**2 * np.sin(k * math.pi * h / 2) ** 2, rtol=1e-12)


def test_laplacian_eigenvalues_2d():
    prob = assemble_operator(2, (7, 9), lengths=(1.0, 2.0))
    hx, hy = 1 / 8, 2 / 10
    lam = 4 / hx**2 * math.sin(math.pi * hx / 2) ** 2 + 4 / hy**2 * math.sin(math.pi * hy / 4) ** 2
    assert eigensolve(prob, 1).eigenvalues[0] == pytest.approx(lam, rel=1e-12)


def test_operator_symmetric_and_positive():
    prob = assemble_operator(1, 20, a_field=lambda x: 1 + x, q_field=2.0)
    A = prob.A.toarray()
    assert_allclose(A, A.T, rtol=0, atol=0)
    assert np.linalg.eigvalsh(A).min() > 0


def test_eigenvectors_rho_orthonormal():
    prob = assemble_operator(1, 40, rho_field=lambda x: 1 + x**2)
    b = eigensolve(prob, 6)
    G = prob.cell * b.vectors.T @ (prob.rho_field[:, None] * b.vectors)
    assert_allclose(G, np.eye(6), atol=1e-12)
    c = b.coefficients(b.vectors[:, 2])
    assert_allclose(c, np.eye(6)[2], atol=1e-12)
    assert_allclose(b.synthesize(c), b.vectors[:, 2], atol=1e-12)


def test_validation_lists_offending_nodes():
    a = np.ones(10)
    a[3] = -1.0
    with pytest.raises(ValidationError, match="a invalid at nodes"):
        assemble_operator(1, 10, a_field=a)
    with pytest.raises(ValidationError, match="rho"):
        assemble_operator(1, 10, rho_field=0.0)
    with pytest.raises(ValidationError):
        assemble_operator(3, 4)
    with pytest.raises(ShapeError):
        assemble_operator(1, 10, a_field=np.ones(9))


def test_shifted_solve_residual():
    prob = assemble_operator(1, 50, a_field=lambda x: 1 + x)
    b = np.arange(50.0)
    shift = 0.3 + 2j
    x = shifted_solve(prob, shift, b)
    assert_allclose((prob.A.toarray() + shift * np.eye(50)) @ x, b, atol=1e-9)
    with pytest.raises(ShapeError):
        shifted_solve(prob, shift, np.ones(3))


def test_singular_shift_detected():
    prob = assemble_operator(1, 15)
    lam = eigensolve(prob, 1).eigenvalues[0]
    with pytest.raises(SolverError):
        ShiftedFactor(prob, -lam, p=-lam).solve(np.ones(15))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0), st.floats(0.0, 3.0))
def test_first_eigenvalue_monotone_in_coefficients(a, rho, q):
    # scaling a up raises lambda_1, scaling rho up lowers it
    base = eigensolve(assemble_operator(1, 15, a, q, rho), 1).eigenvalues[0]
    up_a = eigensolve(assemble_operator(1, 15, 2 * a, q, rho), 1).eigenvalues[0]
    up_r = eigensolve(assemble_operator(1, 15, a, q, 2 * rho), 1).eigenvalues[0]
    assert up_a > base > up_r > 0
