"""Contour-integral solution operators and Duhamel solvers.

For the equation ``rho D^K [u - u0] + A u = F`` the Laplace transform of the
solution is ``(A + rho Phi(p))^{-1} (F^(p) + rho Phi(p)/p u0)``.  Inverting on
the keyhole contour gives

    u(t) = S0(t) u0 + int_0^t S1(t - s) F(s) ds,
    S0(t) = (1/2 pi i) int e^{tp} (A + rho Phi)^{-1} rho Phi/p dp,
    S1(t) = (1/2 pi i) int e^{tp} (A + rho Phi)^{-1} dp.

With F piecewise linear in time, ``F(s) = F_0 + sum_k d_k (s - t_k)_+``, the
convolution is integrated exactly inside the contour integral:

    int_0^t S1(t - s) F(s) ds = (1/2 pi i) int (A + rho Phi)^{-1}
        [e^{tp}/p F_0 + sum_{t_k < t} e^{(t - t_k) p}/p^2 d_k] dp,

so a single shifted solve per contour node serves every time level.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .contour import ContourConfig, ContourSpec, unit_check
from .elliptic import EigenBasis, ShiftedFactor, SpatialProblem, eigensolve
from .errors import ConfigError, ShapeError, ValidationError
from .grids import TimeGrid, Trajectory
from .kernels import DistributedOrder, KernelSpec

UNIT_GATE = 1e-10
NODE_CHUNK = 32


@dataclass(frozen=True)
class SourceSpec:
    """Right-hand side F(t, x).

    ``kind`` is ``"zero"``, ``"separable"`` (``time_profile(t) * space_profile``)
    or ``"sampled"`` (a :class:`Trajectory`, linearly interpolated in t).
    ``horizon`` declares that F vanishes for ``t > horizon``; a source without
    a horizon needs a ``growth_certificate`` J with ``(1+t)^{-J} F`` integrable.
    """

    kind: str = "zero"
    time_profile: Callable | None = None
    space_profile: np.ndarray | None = None
    samples: Trajectory | None = None
    growth_certificate: int | None = None
    horizon: float | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "separable", "sampled"):
            raise ValidationError(f"unknown source kind {self.kind!r}")
        if self.kind == "separable" and (self.time_profile is None or self.space_profile is None):
            raise ValidationError("a separable source needs time_profile and space_profile")
        if self.kind == "sampled" and self.samples is None:
            raise ValidationError("a sampled source needs a trajectory")
        J = self.growth_certificate
        if J is not None and (int(J) != J or J < 0):
            raise ValidationError(f"growth certificate must be a non-negative integer, got {J}")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def separable(cls, time_profile, space_profile, growth_certificate=None, horizon=None):
        w = np.asarray(space_profile, dtype=float)
        return cls("separable", time_profile, w, None, growth_certificate, horizon)

    @classmethod
    def sampled(cls, traj, growth_certificate=None, horizon=None):
        return cls("sampled", samples=traj, growth_certificate=growth_certificate,
                   horizon=horizon)

    def truncated(self, T):
        """The same source extended by zero beyond ``T``."""
        h = T if self.horizon is None else min(T, self.horizon)
        return replace(self, horizon=float(h))

    def values(self, times, n):
        """Samples at ``times``, shape ``(len(times), n)``."""
        times = np.asarray(times, dtype=float)
        out = np.zeros((times.size, n))
        if self.kind == "zero":
            return out
        if self.kind == "separable":
            w = np.broadcast_to(self.space_profile, (n,))
            g = np.asarray([float(self.time_profile(t)) for t in times])
            out = g[:, None] * w[None, :]
        else:
            s = self.samples
            if s.n_nodes != n:
                raise ShapeError(f"sampled source has {s.n_nodes} nodes, problem has {n}")
            need = times if self.horizon is None else times[times <= self.horizon]
            if need.size and (need.min() < s.times[0] - 1e-14 or need.max() > s.times[-1] * (1 + 1e-14)):
                raise ValidationError("sampled source does not cover the requested times")
            for i in range(n):
                out[:, i] = np.interp(times, s.times, s.values[:, i])
        if self.horizon is not None:
            out[times > self.horizon * (1 + 1e-14)] = 0.0
        return out

    def is_zero(self):
        return self.kind == "zero"


def _resolve_contour(contour, t_min, t_max):
    if isinstance(contour, ContourSpec):
        spec = contour
    else:
        cfg = ContourConfig() if contour is None else contour
        spec = cfg.for_window(t_min, t_max) if t_min < t_max else cfg.for_time(t_min)
    dev = unit_check(spec, sorted({t_min, math.sqrt(t_min * t_max), t_max}))
    if not dev <= UNIT_GATE:
        raise ConfigError(f"contour fails the unit check on [{t_min:g}, {t_max:g}]: "
                          f"deviation {dev:.3e} > {UNIT_GATE:g}")
    return spec


def _contour_meta(kernel, spec, path="resolvent"):
    return {"family": type(kernel).__name__, "path": path, "theta": spec.theta,
            "delta": spec.delta, "R": spec.R, "contour_nodes": spec.size}


def _shifts(prob: SpatialProblem, kernel: KernelSpec, nodes):
    kernel.check_nodes(prob.n)
    phi = np.broadcast_to(kernel.symbol_many(nodes), (len(nodes), prob.n))
    return phi, prob.rho_field[None, :] * phi


def _map_nodes(work, count, threads):
    """Evaluate ``work(j)`` for every node, yielding results in node order."""
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            yield from ex.map(work, range(count))
    else:
        for j in range(count):
            yield work(j)


def _fold(acc, spec):
    return acc.imag / math.pi if spec.half_symmetric else (acc / (2j * math.pi)).real


def _apply(prob, kernel, contour, t, rhs_of, threads):
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr <= 0):
        raise ValidationError("evaluation times must be positive")
    spec = _resolve_contour(contour, float(t_arr.min()), float(t_arr.max()))
    phi, shift = _shifts(prob, kernel, spec.nodes)

    def work(j):
        return ShiftedFactor(prob, shift[j], spec.nodes[j]).solve(rhs_of(spec.nodes[j], phi[j]))

    expo = np.exp(np.multiply.outer(t_arr, spec.nodes)) * spec.weights
    acc = 0.0
    for j, x in enumerate(_map_nodes(work, spec.size, threads)):
        acc = acc + np.multiply.outer(expo[:, j], x)
    out = _fold(acc, spec)
    return out[0] if np.ndim(t) == 0 else out


def _as_field(prob, v, name):
    v = np.asarray(v, dtype=float)
    if v.shape[0] != prob.n:
        raise ShapeError(f"{name} has {v.shape[0]} rows, problem has {prob.n} nodes")
    return v


def apply_S0(prob, kernel, contour, t, u0, threads=1):
    """S0(t) u0 for scalar or array ``t``; ``u0`` may be a field or an (n, k) block."""
    u0 = _as_field(prob, u0, "u0")
    rho = prob.rho_field if u0.ndim == 1 else prob.rho_field[:, None]

    def rhs(p, phi):
        ph = phi if u0.ndim == 1 else phi[:, None]
        return rho * ph / p * u0

    return _apply(prob, kernel, contour, t, rhs, threads)


def apply_S1(prob, kernel, contour, t, f, threads=1):
    """S1(t) f for scalar or array ``t``."""
    f = _as_field(prob, f, "f").astype(complex)
    return _apply(prob, kernel, contour, t, lambda p, phi: f, threads)


def _source_data(source, grid, n):
    """``F_0`` and the kinks ``d_k`` of the piecewise-linear source."""
    vals = source.values(grid.points, n)
    slopes = np.diff(vals, axis=0) / grid.steps[:, None]
    kinks = np.vstack([slopes[:1], np.diff(slopes, axis=0)])
    return vals[0], kinks


def _check_horizon(source):
    if not source.is_zero() and source.horizon is None and source.growth_certificate is None:
        raise ValidationError(
            "source has no declared horizon; supply growth_certificate J so that "
            "(1+t)^(-J) F is integrable")


def _duhamel_rhs(p, phi, rho, u0, F0, kinks, pts):
    """Right-hand sides for every time level t_1..t_M at one contour node, shape (n, M)."""
    t = pts[1:]
    e = np.exp(t * p)
    B = np.outer(rho * phi / p * u0, e) if u0 is not None else np.zeros((rho.size, t.size), complex)
    if kinks is not None:
        B += np.outer(F0 / p, e)
        decay = np.exp(np.diff(pts) * p)
        y = np.zeros(rho.size, dtype=complex)
        p2 = p * p
        for m in range(t.size):
            y = decay[m] * (y + kinks[m])
            B[:, m] += y / p2
    return B


def duhamel_solve(prob, kernel, contour, u0, source: SourceSpec, grid: TimeGrid, threads=1):
    """Trajectory ``u(t_m) = S0(t_m) u0 + int_0^{t_m} S1(t_m - s) F(s) ds`` on ``grid``.

    The source is interpolated linearly between grid points and the time
    convolution is evaluated exactly for that interpolant.
    """
    source = SourceSpec.zero() if source is None else source
    _check_horizon(source)
    n = prob.n
    u0 = np.zeros(n) if u0 is None else _as_field(prob, u0, "u0")
    pts = grid.points
    values = np.empty((pts.size, n))
    values[0] = u0
    has_u0 = bool(np.any(u0))
    has_src = not source.is_zero()
    if not has_u0 and not has_src:
        values[1:] = 0.0
        return Trajectory.on_grid(grid, values, {"family": type(kernel).__name__})
    F0, kinks = _source_data(source, grid, n) if has_src else (None, None)
    if has_src and not np.any(kinks) and not np.any(F0):
        has_src = False
    spec = _resolve_contour(contour, float(grid.steps.min()), grid.T)
    phi, shift = _shifts(prob, kernel, spec.nodes)
    rho = prob.rho_field

    def work(j):
        p = spec.nodes[j]
        B = _duhamel_rhs(p, phi[j], rho, u0 if has_u0 else None, F0 if has_src else None,
                         kinks if has_src else None, pts)
        return ShiftedFactor(prob, shift[j], p).solve(B)

    acc = np.zeros((n, pts.size - 1), dtype=complex)
    for j, x in enumerate(_map_nodes(work, spec.size, threads)):
        acc += spec.weights[j] * x
    values[1:] = _fold(acc, spec).T
    return Trajectory.on_grid(grid, values, _contour_meta(kernel, spec))


def finite_time_solve(prob, kernel, contour, u0, G: SourceSpec, T, grid: TimeGrid, threads=1):
    """Solution on (0, T] with ``G`` extended by zero beyond ``T``."""
    if grid.T > T * (1 + 1e-14):
        raise ValidationError(f"grid reaches t = {grid.T:g} beyond the final time T = {T:g}")
    G = SourceSpec.zero() if G is None else G.truncated(T)
    traj = duhamel_solve(prob, kernel, contour, u0, G, grid, threads)
    traj.meta["T"] = float(T)
    return traj


def _tail_energy(prob, basis, f):
    """Relative rho-energy of ``f`` outside the retained modes."""
    total = prob.inner(f, f, prob.rho_field)
    if total == 0:
        return 0.0
    c = basis.coefficients(f)
    return float(max(total - np.sum(c**2), 0.0) / total)


def spectral_solve_distributed(prob, kernel: DistributedOrder, u0, source, grid: TimeGrid,
                               k_modes, contour=None, basis: EigenBasis | None = None,
                               tail_tol=1e-10):
    """Eigen-expansion solver for the distributed-order family.

    Each mode solves ``D^K[a - a(0)] + lam_n a = <rho^{-1} F, phi_n>_rho`` by the
    scalar version of the contour formulas; modes are recombined in the
    rho-orthonormal basis.
    """
    if not isinstance(kernel, DistributedOrder):
        raise ValidationError("the spectral path is defined for the distributed-order family")
    source = SourceSpec.zero() if source is None else source
    _check_horizon(source)
    n = prob.n
    u0 = np.zeros(n) if u0 is None else _as_field(prob, u0, "u0")
    basis = eigensolve(prob, k_modes) if basis is None else basis
    lam = basis.eigenvalues
    pts = grid.points
    c0 = basis.coefficients(u0)
    tails = {"u0": _tail_energy(prob, basis, u0)}
    has_src = not source.is_zero()
    if has_src:
        vals = source.values(pts, n)
        fc = basis.coefficients(vals, weight=1.0 / prob.rho_field)  # (k, M+1)
        tails["F"] = max(_tail_energy(prob, basis, v / prob.rho_field) for v in vals)
        slopes = np.diff(fc, axis=1) / grid.steps[None, :]
        kinks = np.hstack([slopes[:, :1], np.diff(slopes, axis=1)])
    worst = max(tails.values())
    if worst > tail_tol:
        warnings.warn(f"modal expansion truncated with relative tail energy {worst:.3e}",
                      RuntimeWarning, stacklevel=2)

    spec = _resolve_contour(contour, float(grid.steps.min()), grid.T)
    p = spec.nodes[:, None]
    theta = kernel.symbol_many(spec.nodes)  # (J, 1)
    r = 1.0 / (lam[None, :] + theta)  # (J, k)
    w = spec.weights[:, None]
    base = w * r * theta / p * c0[None, :]
    if has_src:
        f0 = w * r / p * fc[:, 0][None, :]
        y = np.zeros_like(base)
        scale = w * r / (p * p)
    amps = np.empty((pts.size - 1, lam.size))
    for m in range(1, pts.size):
        e = np.exp(pts[m] * p)
        acc = e * base
        if has_src:
            y = np.exp((pts[m] - pts[m - 1]) * p) * (y + kinks[:, m - 1][None, :])
            acc = acc + e * f0 + scale * y
        amps[m - 1] = _fold(acc.sum(axis=0), spec)
    values = np.empty((pts.size, n))
    values[0] = u0
    values[1:] = basis.synthesize(amps.T)
    meta = _contour_meta(kernel, spec, "spectral")
    meta.update(k_modes=int(lam.size), tail_energy=worst)
    return Trajectory.on_grid(grid, values, meta)
