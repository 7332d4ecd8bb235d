"""Memory kernels K(t, x) of variable-order, distributed-order and multiterm type.

Every family is stored as a finite superposition

    K(t, x) = sum_q c_q(x) t**(-a_q(x)) / Gamma(1 - a_q(x))

so the Laplace symbol, the repeated integrals of K used by product integration
and the point values share one code path.  For the distributed family the terms
are the Gauss-Legendre nodes of the alpha-integral.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import rgamma

from .errors import DomainError, ShapeError, ValidationError
from .grids import TimeGrid, Trajectory


class KernelSpec:
    """Common interface; concrete families are the three dataclasses below."""

    variant: str = ""

    def terms(self):
        """List of ``(exponent, coefficient)`` pairs, each scalar or per-node array."""
        raise NotImplementedError

    @property
    def n_nodes(self):
        return None

    def check_nodes(self, n):
        if self.n_nodes is not None and self.n_nodes != n:
            raise ShapeError(f"kernel defined on {self.n_nodes} nodes, problem has {n}")

    def moment(self, t, order=0):
        """``order``-fold integral of K from 0 to t, shape ``t.shape + (n or 1,)``.

        ``order=0`` is the kernel itself; ``order=k`` uses
        ``t**(k - a) / Gamma(k + 1 - a)``.
        """
        t = np.asarray(t, dtype=float)[..., None]
        out = 0.0
        for a, c in self.terms():
            a = np.atleast_1d(np.asarray(a, dtype=float))
            c = np.atleast_1d(np.asarray(c, dtype=float))
            with np.errstate(divide="ignore"):
                val = np.where(t > 0, np.abs(t) ** (order - a), 0.0 if order > 0 else np.inf)
            out = out + c * val * rgamma(order + 1 - a)
        return np.asarray(out)

    def symbol(self, p):
        """Phi(p, .) = p * Khat(p, .), per node (length 1 for x-independent kernels)."""
        p = complex(p)
        if p.imag == 0 and p.real <= 0:
            raise DomainError(f"p = {p} lies on the branch cut (-inf, 0]")
        logp = np.log(p)
        out = 0.0
        for a, c in self.terms():
            out = out + np.asarray(c) * np.exp(np.asarray(a) * logp)
        return np.atleast_1d(np.asarray(out, dtype=complex))

    def symbol_many(self, p):
        """Symbols at an array of points, shape ``(len(p), n or 1)``."""
        p = np.atleast_1d(np.asarray(p, dtype=complex))
        if np.any((p.imag == 0) & (p.real <= 0)):
            raise DomainError("a contour point lies on the branch cut (-inf, 0]")
        logp = np.log(p)[:, None]
        out = 0.0
        for a, c in self.terms():
            a = np.atleast_1d(np.asarray(a, dtype=float))[None, :]
            out = out + np.atleast_1d(np.asarray(c, dtype=float))[None, :] * np.exp(a * logp)
        return np.asarray(out, dtype=complex)

    def exponent_bounds(self):
        """(smallest, largest) exponent of t**(-a) present in the kernel."""
        exps = np.concatenate([np.atleast_1d(a) for a, _ in self.terms()])
        return float(exps.min()), float(exps.max())


@dataclass(frozen=True, eq=False)
class VariableOrder(KernelSpec):
    """K(t, x) = t**(-alpha(x)) / Gamma(1 - alpha(x)) with alpha stored per node."""

    alpha_field: np.ndarray
    variant = "VariableOrder"

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.alpha_field, dtype=float)).copy()
        a.setflags(write=False)
        object.__setattr__(self, "alpha_field", a)
        bad = np.flatnonzero(~((a > 0) & (a < 1)))
        if bad.size:
            raise ValidationError(f"alpha must lie in (0, 1); offending nodes {bad[:10].tolist()}")
        if not self.alphaM < 2 * self.alpha0:
            raise ValidationError(
                f"variable order needs alpha_M < 2 alpha_0, got alpha_M={self.alphaM}, "
                f"alpha_0={self.alpha0}"
            )

    @classmethod
    def constant(cls, alpha, n):
        return cls(np.full(n, float(alpha)))

    @property
    def alpha0(self):
        return float(self.alpha_field.min())

    @property
    def alphaM(self):
        return float(self.alpha_field.max())

    @property
    def n_nodes(self):
        return self.alpha_field.size

    @property
    def is_constant(self):
        return self.alpha0 == self.alphaM

    def terms(self):
        if self.is_constant:
            return [(self.alpha0, 1.0)]
        return [(self.alpha_field, 1.0)]


@dataclass(frozen=True, eq=False)
class DistributedOrder(KernelSpec):
    """K(t) = int_0^1 mu(alpha) t**(-alpha) / Gamma(1 - alpha) d alpha.

    ``mu_values`` are samples of the weight at the Gauss-Legendre nodes
    ``quad_nodes`` on (0, 1); ``alpha0`` and ``eps`` are the parameters of the
    positivity condition on mu.
    """

    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    mu_values: np.ndarray
    alpha0: float
    eps: float
    mu: Callable | None = None
    name: str = "custom"
    variant = "DistributedOrder"

    def __post_init__(self):
        if not 0 < self.alpha0 < 1:
            raise ValidationError(f"alpha0 must lie in (0, 1), got {self.alpha0}")
        if not 0 < self.eps < self.alpha0:
            raise ValidationError(f"eps must lie in (0, alpha0), got {self.eps}")
        if np.any(np.asarray(self.mu_values) < 0):
            raise ValidationError("mu must be non-negative")
        if self.mu is not None:
            mu0 = float(self.mu(self.alpha0))
            probe = np.linspace(self.alpha0 - self.eps, self.alpha0, 202)[1:-1]
            vals = np.asarray(self.mu(probe), dtype=float)
            if mu0 <= 0 or np.any(vals < mu0 / 2):
                raise ValidationError(
                    "mu must satisfy mu(a) >= mu(alpha0)/2 > 0 on (alpha0 - eps, alpha0)"
                )

    @classmethod
    def from_function(cls, mu, alpha0, eps, n_quad=64, name="custom"):
        x, w = leggauss(n_quad)
        nodes, weights = 0.5 * (x + 1), 0.5 * w
        vals = np.broadcast_to(np.asarray(mu(nodes), dtype=float), nodes.shape).copy()
        return cls(nodes, weights, vals, float(alpha0), float(eps), mu, name)

    @classmethod
    def builtin(cls, name, n_quad=64):
        """``"uniform"`` (mu = 1, alpha0 = 0.5, eps = 0.25) or ``"bump"``."""
        if name == "uniform":
            return cls.from_function(lambda a: np.ones_like(np.asarray(a, float)), 0.5, 0.25,
                                     n_quad, name)
        if name == "bump":
            return cls.from_function(lambda a: np.exp(-((np.asarray(a) - 0.5) / 0.15) ** 2),
                                     0.5, 0.1, n_quad, name)
        raise ValidationError(f"unknown built-in weight {name!r}; use 'uniform' or 'bump'")

    def terms(self):
        return [(a, w * m) for a, w, m in zip(self.quad_nodes, self.quad_weights, self.mu_values)]

    def symbol(self, p):
        p = complex(p)
        if p.imag == 0 and p.real <= 0:
            raise DomainError(f"p = {p} lies on the branch cut (-inf, 0]")
        c = self.quad_weights * self.mu_values
        return np.atleast_1d(np.sum(c * np.exp(self.quad_nodes * np.log(p))))

    def symbol_many(self, p):
        p = np.atleast_1d(np.asarray(p, dtype=complex))
        if np.any((p.imag == 0) & (p.real <= 0)):
            raise DomainError("a contour point lies on the branch cut (-inf, 0]")
        c = self.quad_weights * self.mu_values
        return (np.exp(np.log(p)[:, None] * self.quad_nodes[None, :]) @ c)[:, None]

    def exponent_bounds(self):
        active = self.quad_nodes[self.mu_values > 0]
        return float(active.min()), float(active.max())


@dataclass(frozen=True, eq=False)
class MultiTerm(KernelSpec):
    """K(t, x) = sum_j rho_j(x) t**(-alpha_j) / Gamma(1 - alpha_j)."""

    alphas: tuple
    rho_fields: tuple
    variant = "MultiTerm"

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        rhos = tuple(np.atleast_1d(np.asarray(r, dtype=float)).copy() for r in self.rho_fields)
        if len(alphas) == 0 or len(alphas) != len(rhos):
            raise ValidationError("multiterm kernel needs one weight field per exponent")
        if not all(0 < a < 1 for a in alphas):
            raise ValidationError(f"multiterm exponents must lie in (0, 1), got {alphas}")
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise ValidationError(
                "multiterm exponents must be strictly increasing, 0 < alpha_1 < ... < alpha_N < 1"
            )
        sizes = {r.size for r in rhos}
        if len(sizes - {1}) > 1:
            raise ShapeError("multiterm weight fields have different lengths")
        for j, r in enumerate(rhos):
            bad = np.flatnonzero(~((r > 0) & np.isfinite(r)))
            if bad.size:
                raise ValidationError(
                    f"weight rho_{j + 1} must be positive and bounded; offending nodes "
                    f"{bad[:10].tolist()}"
                )
            r.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "rho_fields", rhos)

    @property
    def N(self):
        return len(self.alphas)

    @property
    def n_nodes(self):
        sizes = {r.size for r in self.rho_fields} - {1}
        return sizes.pop() if sizes else None

    def terms(self):
        return [(a, r if r.size > 1 else float(r[0])) for a, r in zip(self.alphas, self.rho_fields)]


def _node_value(arr, x):
    arr = np.atleast_1d(arr)
    return arr[0] if arr.size == 1 else arr[x]


def _check_node(spec, x):
    n = spec.n_nodes
    if not isinstance(x, (int, np.integer)) or x < 0 or (n is not None and x >= n):
        raise IndexError(f"invalid grid node {x!r}")


def kernel_time_eval(spec: KernelSpec, t, x):
    """Point value K(t, x); ``t`` must be positive."""
    if not t > 0:
        raise DomainError(f"kernel is singular at t = 0; got t = {t}")
    _check_node(spec, x)
    return float(_node_value(spec.moment(t, 0), x))


def laplace_symbol(spec: KernelSpec, p, x=None):
    """Phi(p, x) = p Khat(p, x); the whole field when ``x`` is None."""
    if x is not None:
        _check_node(spec, x)
        return complex(_node_value(spec.symbol(p), x))
    return spec.symbol(p)


def _as_values(g, grid):
    values = g.values if isinstance(g, Trajectory) else np.asarray(g, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != grid.points.size:
        raise ShapeError(f"{values.shape[0]} samples for a grid of {grid.points.size} points")
    if isinstance(g, Trajectory) and not np.allclose(g.times, grid.points, rtol=0, atol=0):
        raise ShapeError("trajectory times differ from the grid")
    return values


def product_integral(spec: KernelSpec, points, values, eval_times=None):
    """I_K of the piecewise-linear interpolant of ``values`` at ``eval_times``.

    Writes the interpolant as ``g0 + sum_k d_k (t - t_k)_+`` so that
    ``I_K g(t) = K1(t) g0 + sum_k d_k K2(t - t_k)`` with ``K1``, ``K2`` the
    first and second integrals of the kernel; exact for piecewise-linear data.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    if eval_times is None:
        eval_times = points
    eval_times = np.atleast_1d(np.asarray(eval_times, dtype=float))
    slopes = np.diff(values, axis=0) / np.diff(points)[:, None]
    kinks = np.vstack([slopes[:1], np.diff(slopes, axis=0)])
    out = np.empty((eval_times.size, values.shape[1]))
    k1 = spec.moment(eval_times, 1)
    for m, t in enumerate(eval_times):
        active = points[:-1] < t
        acc = k1[m] * values[0]
        if np.any(active):
            k2 = spec.moment(t - points[:-1][active], 2)
            acc = acc + np.sum(k2 * kinks[active], axis=0)
        out[m] = acc
    return out


def apply_IK(spec: KernelSpec, g, grid: TimeGrid):
    """Weakly singular convolution ``int_0^t K(t - s, x) g(s, x) ds`` on the grid."""
    values = _as_values(g, grid)
    if values.shape[1] > 1:
        spec.check_nodes(values.shape[1])
    return Trajectory.on_grid(grid, product_integral(spec, grid.points, values),
                              {"operator": "I_K"})


def _three_point_derivative(points, f):
    h1 = points[1:-1] - points[:-2]
    h2 = points[2:] - points[1:-1]
    c0 = (-h2 / (h1 * (h1 + h2)))[:, None]
    c1 = ((h2 - h1) / (h1 * h2))[:, None]
    c2 = (h1 / (h2 * (h1 + h2)))[:, None]
    return c0 * f[:-2] + c1 * f[1:-1] + c2 * f[2:]


def riemann_liouville_derivative(spec: KernelSpec, g, grid: TimeGrid):
    """D_t^K g = d/dt I_K g at the interior grid points t_1 .. t_{M-1}."""
    if grid.points.size < 3:
        raise ShapeError("the derivative needs at least 3 time points")
    ik = apply_IK(spec, g, grid).values
    return Trajectory(grid.points[1:-1], _three_point_derivative(grid.points, ik),
                      {"operator": "D_t^K"})


def caputo_derivative(spec: KernelSpec, g, grid: TimeGrid):
    """I_K applied to the piecewise-constant slope of g, at interior grid points."""
    values = _as_values(g, grid)
    slopes = np.diff(values, axis=0) / grid.steps[:, None]
    pts = grid.points
    out = np.zeros((pts.size - 2, values.shape[1]))
    for m, t in enumerate(pts[1:-1], start=1):
        k1_hi = spec.moment(t - pts[:m], 1)
        k1_lo = spec.moment(t - pts[1:m + 1], 1)
        out[m - 1] = np.sum((k1_hi - k1_lo) * slopes[:m], axis=0)
    return Trajectory(pts[1:-1], out, {"operator": "caputo"})
