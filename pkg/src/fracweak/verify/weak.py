"""Distributional residual and initial-condition attainment of a trajectory.

For time bumps psi supported in (0, T) and spatial probes chi the weak form of
``rho d/dt I_K[u - u0] + A u = F`` reads

    -int psi'(t) <rho I_K[u - u0](t), chi> dt + int psi(t) <A u(t) - F(t), chi> dt = 0.

The trajectory is read as its piecewise-linear interpolant; I_K of that
interpolant is exact (product integration), and the time integrals use
Gauss-Legendre rules on every grid interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import ValidationError
from ..grids import TimeGrid, Trajectory
from ..kernels import product_integral
from .report import VerificationReport, digest


@dataclass(frozen=True)
class TimeBump:
    """``psi(t) = (4 (t - a)(b - t) / (b - a)^2)^power`` on (a, b), zero elsewhere."""

    a: float
    b: float
    power: int = 4

    def __post_init__(self):
        if not self.b > self.a:
            raise ValidationError(f"empty bump support ({self.a}, {self.b})")

    def _base(self, t):
        return 4.0 * (t - self.a) * (self.b - t) / (self.b - self.a) ** 2

    def value(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t > self.a) & (t < self.b)
        return np.where(inside, np.clip(self._base(t), 0, None) ** self.power, 0.0)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t > self.a) & (t < self.b)
        base = np.clip(self._base(t), 0, None)
        dbase = 4.0 * ((self.b - t) - (t - self.a)) / (self.b - self.a) ** 2
        return np.where(inside, self.power * base ** (self.power - 1) * dbase, 0.0)


def default_bumps(T, count=5):
    """``count`` overlapping bumps covering (0.02 T, 0.98 T)."""
    centers = np.linspace(0.15, 0.85, count) * T
    half = 0.13 * T
    return [TimeBump(float(c - half), float(c + half)) for c in centers]


def default_probes(prob, count=5):
    """Sine probes ``prod_i sin(j pi x_i / L_i)`` for j = 1..count."""
    pts = prob.points()
    lengths = [h * (s + 1) for h, s in zip(prob.h, prob.shape)]
    out = []
    for j in range(1, count + 1):
        chi = np.ones(prob.n)
        for d in range(prob.dim):
            chi = chi * np.sin(j * math.pi * pts[:, d] / lengths[d])
        out.append(chi)
    return np.array(out)


def _gauss_points(points, n_gauss):
    xg, wg = leggauss(n_gauss)
    h = np.diff(points)
    mid = 0.5 * (points[1:] + points[:-1])
    t = (mid[:, None] + 0.5 * h[:, None] * xg[None, :]).ravel()
    w = (0.5 * h[:, None] * wg[None, :]).ravel()
    cell = np.repeat(np.arange(h.size), n_gauss)
    return t, w, cell


def _interp(points, values, t, cell):
    lam = ((t - points[cell]) / (points[cell + 1] - points[cell]))[:, None]
    return (1 - lam) * values[cell] + lam * values[cell + 1]


def weak_measures(prob, kernel, traj: Trajectory, u0, source=None, test_functions=None,
                  spatial_probes=None, n_gauss=4):
    """Per-pair weak residuals (array ``(n_psi, n_chi)``), their scale, and attainment."""
    pts = traj.times
    T = float(pts[-1])
    bumps = default_bumps(T) if test_functions is None else list(test_functions)
    for b in bumps:
        if b.a < 0 or b.b > T:
            raise ValidationError(f"test function support ({b.a:g}, {b.b:g}) leaves (0, {T:g})")
    chis = default_probes(prob) if spatial_probes is None else np.atleast_2d(spatial_probes)
    u0 = np.asarray(u0, dtype=float)
    diff = traj.values - u0[None, :]

    t, w, cell = _gauss_points(pts, n_gauss)
    lo = min(b.a for b in bumps)
    hi = max(b.b for b in bumps)
    keep = (t > lo) & (t < hi)
    t, w, cell = t[keep], w[keep], cell[keep]

    ik = product_integral(kernel, pts, diff, t)  # (nt, n)
    u = _interp(pts, traj.values, t, cell)
    force = prob.A @ u.T  # (n, nt)
    if source is not None and not source.is_zero():
        F = source.values(pts, prob.n)
        force = force - _interp(pts, F, t, cell).T
    cell_vol = prob.cell
    mem = cell_vol * (chis * prob.rho_field[None, :]) @ ik.T  # (n_chi, nt)
    loc = cell_vol * chis @ force  # (n_chi, nt)

    res = np.empty((len(bumps), chis.shape[0]))
    scale = 0.0
    for i, b in enumerate(bumps):
        dpsi = w * b.derivative(t)
        psi = w * b.value(t)
        term_mem = -(mem @ dpsi)
        term_loc = loc @ psi
        res[i] = term_mem + term_loc
        scale = max(scale, float(np.max(np.abs(term_mem))), float(np.max(np.abs(term_loc))))

    first = product_integral(kernel, pts, diff, pts[1:2])[0]
    attain = float(prob.norm(prob.rho_field * first))
    return res, scale, attain


def weak_residual(prob, kernel, traj: Trajectory, u0, source=None, test_functions=None,
                  spatial_probes=None, tol=1e-3, attain_tol=None, n_gauss=4):
    """Single-grid report: relative weak residual per (psi, chi) pair and the attainment norm."""
    res, scale, attain = weak_measures(prob, kernel, traj, u0, source, test_functions,
                                       spatial_probes, n_gauss)
    rep = VerificationReport("weak_residual", digest(traj.times, traj.values, u0))
    denom = scale if scale > 0 else 1.0
    for i in range(res.shape[0]):
        for j in range(res.shape[1]):
            rep.add(f"psi{i}:chi{j}", abs(res[i, j]) / denom, tol)
    rep.add("attainment", attain, tol if attain_tol is None else attain_tol)
    rep.details.update(scale=scale, attainment=attain)
    return rep


def weak_refinement(prob, kernel, solve, grid: TimeGrid, u0, source=None, doublings=3,
                    min_order=1.0, transform=None, test_functions=None, spatial_probes=None):
    """Grid-doubling study of the weak residual and of the attainment norm.

    ``solve(grid)`` returns a trajectory; ``transform`` optionally alters it
    (e.g. a corruption canary).  Each level must improve on the previous one
    with empirical order at least ``min_order`` for both measures.
    """
    T = grid.T
    bumps = default_bumps(T) if test_functions is None else test_functions
    levels = []
    g = grid
    for _ in range(doublings + 1):
        traj = solve(g)
        if transform is not None:
            traj = transform(traj)
        res, scale, attain = weak_measures(prob, kernel, traj, u0, source, bumps, spatial_probes)
        levels.append((g.M, float(np.max(np.abs(res))) / (scale or 1.0), attain))
        g = g.refine()
    rep = VerificationReport("weak_refinement", digest(grid.points, u0))
    rep.details["levels"] = levels
    for (m0, r0, a0), (m1, r1, a1) in zip(levels, levels[1:]):
        for name, x0, x1 in (("residual", r0, r1), ("attainment", a0, a1)):
            order = math.log2(x0 / x1) if x0 > 0 and x1 > 0 else (math.inf if x1 == 0 else -math.inf)
            rep.add(f"{name} order M={m0}->{m1}", order, min_order, mode="ge")
    return rep
