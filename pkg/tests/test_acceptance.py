"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Runs use the 127-node unit-interval problem with u0 = phi_1 and the graded
grid T = 12, M = 512, grading 3 unless stated otherwise.
"""
import math
import time

import numpy as np
import pytest

from conftest import record
from fracweak.cli import selftest_reports
from fracweak.contour import ContourConfig
from fracweak.elliptic import assemble_operator, eigensolve
from fracweak.grids import TimeGrid
from fracweak.kernels import DistributedOrder, MultiTerm, VariableOrder
from fracweak.solvers import (SourceSpec, duhamel_solve, finite_time_solve,
                              spectral_solve_distributed)
from fracweak.verify import (b_operator_norm, laplace_residual, mittag_leffler,
                             norm_slope_probe, weak_refinement)

N = 127
RUN_GRID = TimeGrid.graded(12.0, 512, 3.0)
WEAK_GRID = TimeGrid.graded(12.0, 32, 3.0)
CORRUPT = 1.01


@pytest.fixture(scope="module")
def setting():
    prob = assemble_operator(1, N)
    basis = eigensolve(prob, 1)
    u0 = basis.vectors[:, 0].copy()
    x = prob.points()[:, 0]
    runs = {
        "constant": (VariableOrder.constant(0.5, N), SourceSpec.zero()),
        "distributed": (DistributedOrder.builtin("uniform"),
                        SourceSpec.separable(lambda t: math.exp(-t), np.sin(2 * math.pi * x),
                                             growth_certificate=0)),
        "multiterm": (MultiTerm((0.3, 0.7), (1.0, 1.0)), SourceSpec.zero()),
    }
    return prob, basis.eigenvalues[0], u0, runs


class _Cached:
    """Solves each grid once so the canary reuses the clean trajectories."""

    def __init__(self, prob, kernel, u0, source):
        self.args = (prob, kernel, None, u0, source)
        self.memo = {}

    def __call__(self, grid):
        if grid.M not in self.memo:
            self.memo[grid.M] = duhamel_solve(*self.args, grid)
        return self.memo[grid.M]


@pytest.fixture(scope="module")
def results(setting):
    prob, _, u0, runs = setting
    out = {}
    for name, (kernel, source) in runs.items():
        traj = duhamel_solve(prob, kernel, None, u0, source, RUN_GRID)
        solve = _Cached(prob, kernel, u0, source)
        out[name] = {
            "laplace": laplace_residual(prob, kernel, traj, u0, source, tol=1e-4),
            "laplace_bad": laplace_residual(prob, kernel, traj.scaled(CORRUPT), u0, source,
                                            tol=1e-4),
            "weak": weak_refinement(prob, kernel, solve, WEAK_GRID, u0, source, doublings=3),
            "weak_bad": weak_refinement(prob, kernel, solve, WEAK_GRID, u0, source, doublings=3,
                                        transform=lambda tr: tr.scaled(CORRUPT)),
        }
    return out


def test_criterion_01_contour_identity():
    t0 = time.perf_counter()
    rep = selftest_reports()[0]
    elapsed = time.perf_counter() - t0
    dev = max(r.measured for r in rep.rows if r.sample.startswith("t="))
    ok = dev <= 1e-10 and elapsed < 1.0
    record(1, ok, f"max |deviation| {dev:.2e} (tol 1e-10), selftest {elapsed:.3f} s (limit 1 s)")
    assert ok


def test_criterion_02_mittag_leffler(setting):
    prob, lam, u0, _ = setting
    times = np.logspace(-2, 1, 20)
    grid = TimeGrid(np.concatenate([[0.0], times]))
    t0 = time.perf_counter()
    traj = duhamel_solve(prob, VariableOrder.constant(0.5, N), None, u0, None, grid, threads=1)
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for t, row in zip(times, traj.values[1:]):
        ref = mittag_leffler(0.5, 1.0, -lam * t**0.5)
        worst = max(worst, float(prob.norm(row - ref * u0) / (abs(ref) * prob.norm(u0))))
    ok = worst <= 1e-5 and elapsed < 30.0
    record(2, ok, f"max relative error {worst:.2e} (tol 1e-5), solve {elapsed:.2f} s (limit 30 s)")
    assert ok


def test_criterion_03_laplace_residual(results):
    worst = {k: v["laplace"].worst for k, v in results.items()}
    ok = all(v["laplace"].passed for v in results.values())
    record(3, ok, "worst residual " + ", ".join(f"{k} {w:.2e}" for k, w in worst.items())
           + " (tol 1e-4, p = 1, 2, 1+2i)")
    assert ok


def test_criterion_04_weak_refinement(results):
    ok = all(v["weak"].passed for v in results.values())
    orders = {k: v["weak"].worst for k, v in results.items()}
    record(4, ok, "min order " + ", ".join(f"{k} {o:.2f}" for k, o in orders.items())
           + " (need >= 1 over 3 doublings)")
    assert ok


def test_criterion_05_definition_equivalence(results):
    agree = all(v["laplace"].passed == v["weak"].passed for v in results.values())
    canary = all(not v["laplace_bad"].passed and not v["weak_bad"].passed
                 for v in results.values())
    ok = agree and canary
    record(5, ok, f"clean runs agree on both definitions: {agree}; "
                  f"1% corruption fails both: {canary}")
    assert ok


def test_criterion_06_theta_independence(setting):
    prob, _, u0, runs = setting
    kernel = runs["constant"][0]
    outs = [duhamel_solve(prob, kernel, ContourConfig(theta=f * math.pi), u0, None,
                          RUN_GRID).values[1:] for f in (0.6, 0.75, 0.9)]
    worst = 0.0
    for i in range(3):
        for j in range(i + 1, 3):
            d = np.linalg.norm(outs[i] - outs[j], axis=1) / np.linalg.norm(outs[j], axis=1)
            worst = max(worst, float(d.max()))
    ok = worst <= 1e-8
    record(6, ok, f"max pairwise relative difference {worst:.2e} (tol 1e-8)")
    assert ok


def test_criterion_07_norm_exponents():
    prob = assemble_operator(1, 31, lengths=[10.0])
    x = prob.points()[:, 0] / 10.0
    V = VariableOrder(0.4 + 0.3 * x)
    D = DistributedOrder.builtin("uniform")
    M = MultiTerm((0.3, 0.7), (1.0, 1.0))
    cases = [("S0", V), ("S1", V), ("S0mu", D), ("S1mu", D), ("R0", M), ("R1", M),
             ("resolvent", V), ("resolvent", D), ("resolvent", M)]
    failed = []
    for tag, kernel in cases:
        rep = norm_slope_probe(tag, prob, kernel)
        if not rep.passed:
            failed.append(f"{tag}/{type(kernel).__name__}")
    ok = not failed
    record(7, ok, f"{len(cases) - len(failed)}/{len(cases)} probes within +0.1 slack"
                  + (f"; failing {failed}" if failed else ""))
    assert ok


def test_criterion_08_b_vanishes(setting):
    prob = setting[0]
    kernel = MultiTerm((0.3, 0.7), (1.0, 1.0))
    H = eigensolve(prob, 5).vectors.T
    H = H / prob.norm(H)[:, None]
    rep = b_operator_norm(prob, kernel, sample_vectors=H, tol=1e-8, slope_slack=0.2)
    norms = [r.measured for r in rep.rows if "|B h|" in r.sample]
    slopes = [r.measured for r in rep.rows if "slope" in r.sample]
    ok = rep.passed and len(norms) == 5
    record(8, ok, f"max |Bh| {max(norms):.2e} (tol 1e-8), worst slope {max(slopes):.2f} "
                  f"(need <= {-0.7 + 0.2:.1f})")
    assert ok


def test_criterion_09_finite_time(setting):
    prob = setting[0]
    x = prob.points()[:, 0]
    kernel = VariableOrder(np.where(x < 0.5, 0.45, 0.65))
    G = SourceSpec.separable(lambda t: math.cos(3 * t), np.sin(2 * math.pi * x))
    u0 = np.sin(math.pi * x)
    g1 = TimeGrid.graded(1.0, 64, 2.0)
    g2 = g1.extend(2.0, 64)
    a = finite_time_solve(prob, kernel, None, u0, G, 1.0, g1)
    b = finite_time_solve(prob, kernel, None, u0, G, 2.0, g2)
    diff = float(np.max(np.abs(a.values[1:] - b.values[1:g1.M + 1])))
    ok = diff <= 1e-10
    record(9, ok, f"max |u_T1 - u_T2| on (0, 1]: {diff:.2e} (tol 1e-10)")
    assert ok


def test_criterion_10_degeneracies(setting):
    prob, _, u0, _ = setting
    x = prob.points()[:, 0]
    grid = TimeGrid.graded(4.0, 64, 2.0)
    a = duhamel_solve(prob, MultiTerm((0.5,), (1.0,)), None, u0, None, grid).values
    b = duhamel_solve(prob, VariableOrder.constant(0.5, N), None, u0, None, grid).values
    single = float(np.linalg.norm(a - b) / np.linalg.norm(b))
    D = DistributedOrder.builtin("uniform")
    v0 = np.sin(math.pi * x) + 0.2 * np.sin(5 * math.pi * x)
    src = SourceSpec.separable(lambda t: math.exp(-t), np.sin(2 * math.pi * x),
                               growth_certificate=0)
    r = duhamel_solve(prob, D, None, v0, src, grid).values
    s = spectral_solve_distributed(prob, D, v0, src, grid, N).values
    spectral = float(np.linalg.norm(r - s) / np.linalg.norm(r))
    ok = single <= 1e-10 and spectral <= 1e-7
    record(10, ok, f"single-term vs constant {single:.2e} (tol 1e-10); "
                   f"spectral vs resolvent {spectral:.2e} (tol 1e-7)")
    assert ok
