"""Frequency-domain residual of a computed trajectory.

The transform of a trajectory is taken for its piecewise-linear interpolant
with exact exponential moments on every interval, so large ``Re p`` causes no
loss of accuracy.  Beyond the horizon the interpolant is continued by its last
value, which also furnishes the tail bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..grids import Trajectory
from .report import VerificationReport, digest

_SERIES_CUT = 0.1


def _phi_ab(z):
    """Moments ``int_0^1 (1-s) e^{-zs} ds`` and ``int_0^1 s e^{-zs} ds``."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SERIES_CUT
    zs = np.where(small, 1.0, z)
    em = np.exp(-zs)
    a = (zs - 1 + em) / zs**2
    b = (1 - em * (1 + zs)) / zs**2
    if np.any(small):
        zz = z[small]
        sa = np.zeros_like(zz)
        sb = np.zeros_like(zz)
        term = np.ones_like(zz)
        for k in range(12):
            if k:
                term = term * (-zz) / k
            sa += term / ((k + 1) * (k + 2))
            sb += term / (k + 2)
        a = np.where(small, 0, a)
        b = np.where(small, 0, b)
        a[small] = sa
        b[small] = sb
    return a, b


def laplace_transform(times, values, p):
    """Transform of the piecewise-linear interpolant over ``[t_0, t_M]``, per column."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values)
    h = np.diff(times)
    a, b = _phi_ab(p * h)
    scale = np.exp(-p * times[:-1]) * h
    return (scale * a) @ values[:-1] + (scale * b) @ values[1:]


@dataclass(frozen=True)
class LaplaceProbe:
    """Sample points ``p`` with ``Re p >= p_min > 0`` and the transform horizon."""

    p_samples: tuple = (1.0, 2.0, 1 + 2j)
    T_max: float | None = None
    p_min: float = 1.0

    def __post_init__(self):
        ps = tuple(complex(p) for p in self.p_samples)
        if not ps:
            raise ValidationError("a Laplace probe needs at least one sample")
        if self.p_min <= 0 or any(p.real < self.p_min for p in ps):
            raise ValidationError(f"probe samples must satisfy Re p >= p_min = {self.p_min} > 0")
        object.__setattr__(self, "p_samples", ps)

    def tail_bound(self, traj: Trajectory, T_max=None):
        """Bound on the neglected transform beyond the horizon, relative to ``sup |u|``.

        Assumes ``|u(t)| <= sup_{s <= T} |u(s)|`` for ``t > T`` (dissipative runs).
        """
        T = traj.times[-1] if T_max is None else T_max
        return math.exp(-self.p_min * T) / self.p_min


def _rhs(prob, kernel, p, u0, F_hat):
    phi = np.broadcast_to(kernel.symbol(p), (prob.n,))
    rhs = prob.rho_field * phi / p * u0 + F_hat
    return phi, rhs


def laplace_residual(prob, kernel, traj: Trajectory, u0, source=None, probe=None, tol=1e-4):
    """Relative residual ``|(A + rho Phi) u^ - F^ - rho Phi/p u0| / |rhs|`` per probe point.

    The tail of the transform beyond the horizon is added analytically by
    continuing the trajectory (and the source) with their last values.
    """
    probe = LaplaceProbe() if probe is None else probe
    u0 = np.zeros(prob.n) if u0 is None else np.asarray(u0, dtype=float)
    scale = float(np.max(np.abs(traj.values))) if traj.values.size else 0.0
    tail = probe.tail_bound(traj)
    rep = VerificationReport("laplace_residual", digest(traj.times, traj.values, u0))
    rep.details["tail_bound"] = tail
    if tail > 0.1 * tol:
        raise ValidationError(
            f"Laplace probe rejected: tail bound {tail:.3e} exceeds 0.1 x tolerance; "
            "extend the horizon"
        )
    T = traj.times[-1]
    F = None
    if source is not None and not source.is_zero():
        F = source.values(traj.times, prob.n)
    for p in probe.p_samples:
        u_hat = laplace_transform(traj.times, traj.values, p) + traj.values[-1] * np.exp(-p * T) / p
        F_hat = np.zeros(prob.n, dtype=complex)
        if F is not None:
            F_hat = laplace_transform(traj.times, F, p)
            if source.horizon is None or source.horizon > T:
                F_hat = F_hat + F[-1] * np.exp(-p * T) / p
        phi, rhs = _rhs(prob, kernel, p, u0, F_hat)
        res = prob.A @ u_hat + prob.rho_field * phi * u_hat - rhs
        denom = prob.norm(rhs)
        if denom == 0:
            rel = 0.0 if scale == 0 else float(prob.norm(res))
        else:
            rel = float(prob.norm(res) / denom)
        rep.add(f"p={p.real:g}{p.imag:+g}i", rel, tol)
    return rep
