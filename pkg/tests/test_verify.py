import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from fracweak.elliptic import assemble_operator, eigensolve
from fracweak.errors import ValidationError
from fracweak.grids import TimeGrid, Trajectory
from fracweak.kernels import DistributedOrder, MultiTerm, VariableOrder
from fracweak.solvers import duhamel_solve
from fracweak.verify import (LaplaceProbe, TimeBump, VerificationReport, b_operator_norm, digest,
                             laplace_residual, laplace_transform, norm_slope_probe, power_norm,
                             weak_refinement, weak_residual)
from fracweak.verify.laplace import _phi_ab
from fracweak.verify.probes import bound_exponents


# ------------------------------------------------------------- report ----
def test_report_pass_fail_and_worst():
    r = VerificationReport("x")
    assert not r.passed  # empty reports never pass
    r.add("a", 1e-6, 1e-5)
    r.add("b", 2.0, 1.0, mode="ge")
    assert r.passed and r.worst == 1e-6
    r.add("c", float("nan"), 1.0)
    assert not r.passed
    g = VerificationReport("g")
    g.add("o", 1.5, 1.0, mode="ge")
    assert g.worst == 1.5
    r.flag("d", "broken")
    assert "[broken]" in r.rows[-1].sample
    assert len(list(r.csv_rows())) == 4
    assert "FAIL" in r.summary()
    with pytest.raises(ValueError):
        r.add("e", 1.0, 1.0, mode="eq")


def test_digest_stable():
    a = np.arange(5.0)
    assert digest(a, None) == digest(a.copy(), None)
    assert digest(a) != digest(a + 1)
    assert len(digest(a)) == 16


# ------------------------------------------------------------ laplace ----
def test_phi_moments_series_branch_continuous():
    z = np.array([0.0999999, 0.1000001, 1e-8, 2 + 3j])
    a, b = _phi_ab(z)
    s = np.linspace(0, 1, 20001)
    for zi, ai, bi in zip(z, a, b):
        assert ai == pytest.approx(trapezoid((1 - s) * np.exp(-zi * s), s), rel=1e-7)
        assert bi == pytest.approx(trapezoid(s * np.exp(-zi * s), s), rel=1e-7)


def test_laplace_transform_exact_for_linear():
    t = np.linspace(0, 3.0, 7)
    vals = t[:, None]
    p = 1.5 + 0.5j
    ref = (1 - math.e ** 0 * np.exp(-p * 3) * (1 + 3 * p)) / p**2
    assert_allclose(laplace_transform(t, vals, p)[0], ref, rtol=1e-13)


def test_probe_validation():
    with pytest.raises(ValidationError):
        LaplaceProbe((0.5,), None, 1.0)
    with pytest.raises(ValidationError):
        LaplaceProbe(())


def test_laplace_rejects_short_horizon(prob31):
    traj = Trajectory(np.array([0.0, 1.0]), np.zeros((2, 31)))
    with pytest.raises(ValidationError, match="tail bound"):
        laplace_residual(prob31, VariableOrder.constant(0.5, 31), traj, np.zeros(31))


@pytest.fixture(scope="module")
def small_run():
    prob = assemble_operator(1, 31)
    b = eigensolve(prob, 1)
    k = VariableOrder.constant(0.5, 31)
    u0 = b.vectors[:, 0].copy()
    grid = TimeGrid.graded(12.0, 256, 3.0)
    return prob, k, u0, duhamel_solve(prob, k, None, u0, None, grid)


def test_laplace_residual_small_run(small_run):
    prob, k, u0, traj = small_run
    rep = laplace_residual(prob, k, traj, u0, tol=1e-3)
    assert rep.passed, rep.summary()
    bad = laplace_residual(prob, k, traj.scaled(1.01), u0, tol=1e-3)
    assert not bad.passed


# --------------------------------------------------------------- weak ----
def test_time_bump_derivative():
    b = TimeBump(1.0, 3.0)
    t = np.linspace(1.1, 2.9, 7)
    fd = (b.value(t + 1e-6) - b.value(t - 1e-6)) / 2e-6
    assert_allclose(b.derivative(t), fd, rtol=1e-6, atol=1e-9)
    assert b.value(0.5) == 0 and b.value(2.0) == 1.0
    with pytest.raises(ValidationError):
        TimeBump(2.0, 1.0)


def test_weak_residual_small_run(small_run):
    prob, k, u0, traj = small_run
    rep = weak_residual(prob, k, traj, u0, tol=1e-3)
    assert rep.passed, rep.summary()
    with pytest.raises(ValidationError):
        weak_residual(prob, k, traj, u0, test_functions=[TimeBump(5.0, 20.0)])


def test_weak_refinement_orders(small_run):
    prob, k, u0, _ = small_run
    solve = lambda g: duhamel_solve(prob, k, None, u0, None, g)
    rep = weak_refinement(prob, k, solve, TimeGrid.graded(12.0, 32, 3.0), u0, doublings=2)
    assert rep.passed, rep.summary()
    assert len(rep.details["levels"]) == 3
    bad = weak_refinement(prob, k, solve, TimeGrid.graded(12.0, 32, 3.0), u0, doublings=2,
                          transform=lambda tr: tr.scaled(1.01))
    assert not bad.passed


# ------------------------------------------------------------- probes ----
def test_power_norm_matches_svd():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((80, 80)) + 1j * rng.standard_normal((80, 80))
    s, ok = power_norm(M)
    assert ok and s == pytest.approx(np.linalg.norm(M, 2), rel=1e-9)
    assert power_norm(np.zeros((3, 3)))[0] == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 20), st.integers(0, 1000))
def test_power_norm_small_matrices(n, seed):
    M = np.random.default_rng(seed).standard_normal((n, n))
    s, ok = power_norm(M)
    assert ok and s == pytest.approx(np.linalg.norm(M, 2), rel=1e-9)


def test_bound_exponents():
    v = VariableOrder(np.array([0.4, 0.7]))
    assert_allclose(bound_exponents("S0", v), (0.6, -0.6, 0.0))
    d = DistributedOrder.builtin("uniform")
    assert_allclose(bound_exponents("S1mu", d), (-0.75, -0.5))
    m = MultiTerm((0.3, 0.7), (1.0, 1.0))
    assert_allclose(bound_exponents("resolvent", m), (-0.7,))
    with pytest.raises(ValidationError):
        bound_exponents("S0", m)
    with pytest.raises(ValidationError):
        bound_exponents("Q", m)


def test_slope_probe_distributed():
    prob = assemble_operator(1, 31, lengths=[10.0])
    rep = norm_slope_probe("S1mu", prob, DistributedOrder.builtin("uniform"))
    assert rep.passed, rep.summary()


def test_b_operator_small():
    prob = assemble_operator(1, 15)
    k = MultiTerm((0.3, 0.7), (1.0, 1.0))
    H = eigensolve(prob, 2).vectors.T
    rep = b_operator_norm(prob, k, sample_vectors=H, radii=np.logspace(2, 12, 5), tol=1e-6)
    assert rep.passed, rep.summary()
    with pytest.raises(ValidationError):
        b_operator_norm(prob, VariableOrder.constant(0.5, 15))
