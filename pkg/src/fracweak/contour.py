"""Keyhole contour quadrature for inverse Laplace integrals.

The contour consists of the ray ``r exp(-i theta)`` traversed inward from R to
delta, the arc ``delta exp(i beta)`` with beta from -theta to theta, and the ray
``r exp(i theta)`` traversed outward.  Arc nodes are Gauss-Legendre in beta;
each ray is split into panels whose widths double away from delta until they
reach a cap, with Gauss-Legendre nodes on every panel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ContourError, ValidationError

DEFAULT_THETA = 0.75 * math.pi
DEFAULT_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class ContourSpec:
    delta: float
    theta: float
    R: float
    n_arc: int
    n_ray: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    half_symmetric: bool = False
    breakpoints: np.ndarray = field(default=None, repr=False)

    @property
    def size(self):
        return self.nodes.size

    def arclength(self):
        """Integral of |dp| over the (full) contour."""
        total = np.sum(np.abs(self.weights))
        return 2 * total if self.half_symmetric else total


def ray_breakpoints(delta, R, width_cap, ratio=2.0):
    """Panel ends on [delta, R]: geometric growth by ``ratio`` until ``width_cap``."""
    b = [float(delta)]
    while b[-1] < R * (1 - 1e-15):
        step = min((ratio - 1.0) * b[-1], width_cap)
        b.append(min(b[-1] + step, float(R)))
    return np.array(b)


def panel_ratio(theta):
    """Panel growth ``min(2, 1 + |cot theta|)``.

    Along the ray the integrand oscillates ``|tan theta|`` times faster than it
    decays, so rays close to the imaginary axis need slower growth.
    """
    return min(2.0, 1.0 + abs(math.cos(theta) / math.sin(theta)))


def _validate(delta, theta, R, n_arc, n_ray):
    if not delta > 0:
        raise ValidationError(f"contour delta must be positive, got {delta}")
    if not math.pi / 2 < theta < math.pi:
        raise ValidationError(
            f"contour.theta must lie in (0.5π, π), got {theta / math.pi:.4g}π"
        )
    if not R > delta:
        raise ValidationError(f"truncation radius R={R} must exceed delta={delta}")
    if n_arc < 4 or (n_ray is not None and n_ray < 4):
        raise ValidationError("node counts must be at least 4")


def build_contour(delta, theta=DEFAULT_THETA, R=None, n_arc=32, n_ray=None,
                  half_symmetric=False, width_cap=None, nodes_per_panel=8, ratio=None):
    """Quadrature nodes and dp-weights on the truncated keyhole contour.

    ``sum(weights * g(nodes))`` approximates the contour integral of ``g``.
    With ``half_symmetric`` only the upper half (arc beta in [0, theta] and the
    upper ray) is stored; :func:`contour_integrate` then folds by conjugation.

    ``n_ray`` is the node count per ray; when None it is ``nodes_per_panel``
    times the number of panels.  ``width_cap`` bounds the panel width (default
    ``3 delta``).  Consecutive panels grow by ``ratio`` (default
    :func:`panel_ratio` of theta).
    """
    if R is None:
        R = select_truncation(1.0 / delta, theta, 0.0, DEFAULT_TOL, delta)
    _validate(delta, theta, R, n_arc, n_ray)
    cap = 3.0 * delta if width_cap is None else float(width_cap)
    b = ray_breakpoints(delta, R, cap, panel_ratio(theta) if ratio is None else ratio)
    n_panels = b.size - 1
    per_panel = nodes_per_panel if n_ray is None else max(2, math.ceil(n_ray / n_panels))
    xg, wg = leggauss(per_panel)
    half = 0.5 * np.diff(b)[:, None]
    mid = 0.5 * (b[1:] + b[:-1])[:, None]
    r = (half * xg + mid).ravel()
    wr = (half * wg).ravel()

    e = complex(math.cos(theta), math.sin(theta))
    if half_symmetric:
        xa, wa = leggauss(max(2, n_arc // 2))
        beta = 0.5 * theta * (xa + 1)
        wbeta = 0.5 * theta * wa
    else:
        xa, wa = leggauss(n_arc)
        beta = theta * xa
        wbeta = theta * wa
    arc_p = delta * np.exp(1j * beta)
    arc_w = 1j * arc_p * wbeta
    if half_symmetric:
        nodes = np.concatenate([arc_p, r * e])
        weights = np.concatenate([arc_w, e * wr])
    else:
        ec = e.conjugate()
        nodes = np.concatenate([r[::-1] * ec, arc_p, r * e])
        weights = np.concatenate([-ec * wr[::-1], arc_w, e * wr])
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return ContourSpec(float(delta), float(theta), float(R), int(n_arc), int(r.size),
                       nodes, weights, bool(half_symmetric), b)


def _values_at_nodes(f, spec):
    if not callable(f):
        vals = np.asarray(f)
        if vals.shape[0] != spec.size:
            raise ValidationError(f"{vals.shape[0]} integrand values for {spec.size} nodes")
        return vals
    out = []
    for j, p in enumerate(spec.nodes):
        try:
            out.append(np.asarray(f(p)))
        except Exception as exc:  # annotate and re-raise
            raise ContourError(f"integrand failed: {exc}", j, p) from exc
    return np.stack(out)


def contour_integrate(f, spec: ContourSpec, t):
    """``(1/2 pi i) sum_j w_j exp(t p_j) f(p_j)`` for scalar or array ``t``.

    ``f`` is a callable of p or an array of precomputed values (first axis =
    nodes).  On a half-symmetric contour the integrand must satisfy
    ``f(conj p) = conj f(p)`` and the real result is returned.
    """
    vals = _values_at_nodes(f, spec)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr <= 0):
        raise ValidationError("evaluation times must be positive")
    expo = np.exp(np.multiply.outer(t_arr, spec.nodes)) * spec.weights  # (nt, nodes)
    flat = vals.reshape(spec.size, -1)
    acc = expo @ flat
    if spec.half_symmetric:
        res = acc.imag / math.pi
    else:
        res = acc / (2j * math.pi)
    res = res.reshape((t_arr.size,) + vals.shape[1:])
    return res[0] if np.ndim(t) == 0 else res


def select_truncation(t, theta, decay_exponent=0.0, tol=DEFAULT_TOL, delta=None, steps=8):
    """Smallest ``R`` on the ladder ``R0 * 2**(k/steps)`` with
    ``exp(t R cos theta) * R**decay_exponent <= tol``, where ``R0 = max(delta, 1/t)``.
    """
    c = math.cos(theta)
    if c >= 0:
        raise ValidationError("theta must exceed π/2 for the tail to decay")
    R0 = max(delta or 0.0, 1.0 / t)
    k = 0
    while True:
        R = R0 * 2.0 ** (k / steps)
        if t * R * c + decay_exponent * math.log(R) <= math.log(tol):
            return R
        k += 1


@dataclass(frozen=True)
class ContourConfig:
    """User-level contour settings; builds concrete :class:`ContourSpec` objects.

    ``delta=None`` selects ``delta = 1/t`` (or ``1/t_max`` for a time window).
    """

    theta: float = DEFAULT_THETA
    delta: float | None = None
    n_arc: int = 32
    n_ray: int | None = None
    tol: float = DEFAULT_TOL
    nodes_per_panel: int = 10
    window_nodes_per_panel: int = 16

    def __post_init__(self):
        if not math.pi / 2 < self.theta < math.pi:
            raise ValidationError(
                f"contour.theta must lie in (0.5π, π), got {self.theta / math.pi:.4g}π"
            )

    def for_time(self, t, half_symmetric=True):
        delta = 1.0 / t if self.delta is None else self.delta
        R = select_truncation(t, self.theta, 0.0, self.tol, delta)
        cap = 3.0 / (t * abs(math.sin(self.theta)))
        return build_contour(delta, self.theta, R, self.n_arc, self.n_ray, half_symmetric,
                             cap, self.nodes_per_panel)

    def for_window(self, t_min, t_max, half_symmetric=True):
        """One contour accurate for every ``t`` in ``[t_min, t_max]``."""
        if t_min == t_max:
            return self.for_time(t_min, half_symmetric)
        delta = 1.0 / t_max if self.delta is None else self.delta
        R = select_truncation(t_min, self.theta, 0.0, self.tol, delta)
        cap = 3.0 / (t_min * abs(math.sin(self.theta)))
        return build_contour(delta, self.theta, R, self.n_arc, None, half_symmetric, cap,
                             self.window_nodes_per_panel)


def unit_check(spec, t_list):
    """Worst ``|(1/2 pi i) int exp(tp)/p dp - 1|`` over ``t_list``.

    ``spec`` is a :class:`ContourSpec` used for every t, or a
    :class:`ContourConfig` that builds a contour per t.
    """
    worst = 0.0
    for t in np.atleast_1d(t_list):
        s = spec.for_time(float(t), half_symmetric=False) if isinstance(spec, ContourConfig) \
            else spec
        val = contour_integrate(1.0 / s.nodes, s, float(t))
        worst = max(worst, float(abs(val - 1.0)))
    return worst
