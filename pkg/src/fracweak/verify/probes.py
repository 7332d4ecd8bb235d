"""Operator-norm growth probes and the vanishing-B check for multiterm kernels."""
from __future__ import annotations

import math

import numpy as np

from ..contour import ContourConfig, build_contour
from ..elliptic import ShiftedFactor, eigensolve
from ..errors import ValidationError
from ..kernels import DistributedOrder, MultiTerm, VariableOrder
from ..solvers import _resolve_contour, apply_S0, apply_S1
from .report import VerificationReport, digest

TAGS = ("S0", "S1", "S0mu", "S1mu", "R0", "R1", "resolvent")
DEFAULT_SLACK = 0.1


def power_norm(M, iters=2000, rtol=1e-10, block=64, seed=0):
    """Largest singular value of ``M`` by block power iteration on ``M^H M``.

    A Rayleigh-Ritz step on the block resolves clustered singular values; for
    matrices no wider than ``block`` the block spans the space and the first
    step is already exact.  Returns ``(estimate, converged)``.
    """
    M = np.asarray(M)
    n = M.shape[1]
    k = min(block, n)
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, k)) + 0j)
    s_old = 0.0
    for _ in range(iters):
        W = M @ Q
        G = W.conj().T @ W
        s = math.sqrt(max(float(np.linalg.eigvalsh(G)[-1]), 0.0))
        if s == 0.0:
            return 0.0, True
        if abs(s - s_old) <= rtol * s:
            return s, True
        s_old = s
        Q, _ = np.linalg.qr(M.conj().T @ W)
    return s, False


def bound_exponents(tag, kernel):
    """Exponents of the power-law envelope ``C max(x^e_1, x^e_2, ...)`` for each probe."""
    if tag in ("S0", "S1") or (tag == "resolvent" and isinstance(kernel, VariableOrder)):
        if not isinstance(kernel, VariableOrder):
            raise ValidationError(f"{tag} probe needs a variable-order kernel")
        a0, aM = kernel.alpha0, kernel.alphaM
        return {"S0": (2 * (aM - a0), 2 * (a0 - aM), 0.0),
                "S1": (2 * aM - a0 - 1, 2 * a0 - aM - 1, 0.0),
                "resolvent": (a0 - 2 * aM, aM - 2 * a0)}[tag]
    if tag in ("S0mu", "S1mu") or (tag == "resolvent" and isinstance(kernel, DistributedOrder)):
        if not isinstance(kernel, DistributedOrder):
            raise ValidationError(f"{tag} probe needs a distributed-order kernel")
        a0, eps = kernel.alpha0, kernel.eps
        return {"S0mu": (a0 - eps - 1, a0), "S1mu": (a0 - eps - 1, a0 - 1),
                "resolvent": (-a0 + eps, -a0)}[tag]
    if tag in ("R0", "R1", "resolvent"):
        if not isinstance(kernel, MultiTerm):
            raise ValidationError(f"{tag} probe needs a multiterm kernel")
        a1, aN = kernel.alphas[0], kernel.alphas[-1]
        return {"R0": (aN - a1, 0.0), "R1": (aN - 1, 0.0), "resolvent": (-aN,)}[tag]
    raise ValidationError(f"unknown operator tag {tag!r}; choose from {TAGS}")


def modal_kernels(kernel, lam, contour, t):
    """Scalar amplitudes ``(a0, a1)`` of shape ``(len(t), len(lam))``.

    ``a0 = (1/2 pi i) int e^{tp} Phi/(p (lam + Phi)) dp`` and
    ``a1 = (1/2 pi i) int e^{tp} /(lam + Phi) dp``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    spec = _resolve_contour(contour, float(t.min()), float(t.max()))
    phi = kernel.symbol_many(spec.nodes)[:, :1]
    r = 1.0 / (np.asarray(lam)[None, :] + phi)
    e = np.exp(np.multiply.outer(t, spec.nodes)) * spec.weights
    a0 = (e @ (r * phi / spec.nodes[:, None])).imag / math.pi
    a1 = (e @ r).imag / math.pi
    return a0, a1


def operator_matrices(tag, prob, kernel, contour, samples):
    """Dense matrices of the probed operator at every sample, shape ``(k, n, n)``."""
    samples = np.asarray(samples, dtype=float)
    eye = np.eye(prob.n)
    if tag in ("S0", "R0"):
        return np.moveaxis(apply_S0(prob, kernel, contour, samples, eye), 0, 0)
    if tag in ("S1", "R1"):
        return apply_S1(prob, kernel, contour, samples, eye)
    if tag in ("S0mu", "S1mu"):
        basis = eigensolve(prob, prob.n)
        a0, a1 = modal_kernels(kernel, basis.eigenvalues, contour, samples)
        V = basis.vectors
        # S0mu psi = sum a0_n <psi, phi_n>_rho phi_n; S1mu psi = sum a1_n <rho^-1 psi, phi_n>_rho phi_n
        right = (V * prob.rho_field[:, None]).T * prob.cell if tag == "S0mu" else V.T * prob.cell
        amp = a0 if tag == "S0mu" else a1
        return np.einsum("ik,tk,kj->tij", V, amp, right)
    if tag == "resolvent":
        theta = (contour or ContourConfig()).theta if not hasattr(contour, "nodes") else contour.theta
        out = []
        for r in samples:
            z = r * complex(math.cos(theta), math.sin(theta))
            shift = prob.rho_field * np.broadcast_to(kernel.symbol(z), (prob.n,))
            out.append(ShiftedFactor(prob, shift, z).solve(eye.astype(complex)))
        return np.array(out)
    raise ValidationError(f"unknown operator tag {tag!r}; choose from {TAGS}")


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def norm_slope_probe(tag, prob, kernel, contour=None, samples=None, slack=DEFAULT_SLACK,
                     fit_decades=3.0):
    """Fit log-log slopes of the operator norm for small and large argument.

    Small-argument samples (``<= 1``) must satisfy ``slope >= min(e) - slack``
    and large-argument samples (``>= 1``) ``slope <= max(e) + slack``, where
    ``e`` are the envelope exponents.  Each side is fitted on its outermost
    ``fit_decades`` decades.
    """
    samples = np.logspace(-6, 6, 49) if samples is None else np.asarray(samples, dtype=float)
    exps = bound_exponents(tag, kernel)
    mats = operator_matrices(tag, prob, kernel, contour, samples)
    rep = VerificationReport(f"norm_slope:{tag}", digest(samples, prob.A.data))
    norms = []
    for s, M in zip(samples, mats):
        val, ok = power_norm(M)
        if not ok:
            rep.flag(f"x={s:.3g}", "power iteration did not converge")
        norms.append(val)
    norms = np.array(norms)
    rep.details.update(samples=samples, norms=norms, exponents=exps)
    lo = samples[(samples <= 1) & (samples >= samples.min() * (1 - 1e-12))]
    small = (samples <= 1) & (samples <= samples.min() * 10**fit_decades * (1 + 1e-12))
    large = (samples >= 1) & (samples >= samples.max() / 10**fit_decades * (1 - 1e-12))
    if lo.size and small.sum() >= 2:
        s = _slope(samples[small], norms[small])
        rep.details["slope_small"] = s
        rep.add("small-argument slope", s, min(exps) - slack, mode="ge")
    if large.sum() >= 2:
        s = _slope(samples[large], norms[large])
        rep.details["slope_large"] = s
        rep.add("large-argument slope", s, max(exps) + slack)
    return rep


def b_operator_norm(prob, kernel: MultiTerm, contour=None, sample_vectors=None, radii=None,
                    tol=1e-8, slope_slack=0.2, nodes_per_panel=10):
    """``B_R h = (1/2 pi i) int_{gamma(delta, R, theta)} p^{-1} (A + rho Phi(p))^{-1} h dp``.

    The integral over the full contour vanishes; on the truncated contour its
    size is governed by the tail ``R^{-alpha_N}``.  Reports ``|B_R h|`` at every
    radius and the fitted decay slope.
    """
    if not isinstance(kernel, MultiTerm):
        raise ValidationError("the B operator is defined for multiterm kernels")
    cfg = ContourConfig() if contour is None else contour
    delta = 1.0 if cfg.delta is None else cfg.delta
    radii = np.logspace(2, 16, 8) if radii is None else np.asarray(radii, dtype=float)
    H = np.atleast_2d(np.zeros(prob.n) if sample_vectors is None else sample_vectors)
    H = np.asarray(H, dtype=float)
    rep = VerificationReport("b_operator", digest(H, radii))
    an = kernel.alphas[-1]
    norms = np.zeros((radii.size, H.shape[0]))
    for i, R in enumerate(radii):
        spec = build_contour(delta, cfg.theta, R, cfg.n_arc, None, True, math.inf,
                             nodes_per_panel)
        shift = prob.rho_field[None, :] * np.broadcast_to(kernel.symbol_many(spec.nodes),
                                                         (spec.size, prob.n))
        acc = np.zeros((prob.n, H.shape[0]), dtype=complex)
        if np.any(H):
            for j, p in enumerate(spec.nodes):
                x = ShiftedFactor(prob, shift[j], p).solve(H.T.astype(complex))
                acc += spec.weights[j] / p * x
        B = acc.imag / math.pi
        norms[i] = prob.norm(B.T)
    rep.details.update(radii=radii, norms=norms)
    for k in range(H.shape[0]):
        rep.add(f"h{k}: |B h| at R={radii[-1]:.1e}", norms[-1, k], tol)
        if norms[-1, k] > 0:
            s = _slope(radii, norms[:, k])
            rep.add(f"h{k}: decay slope", s, -an + slope_slack)
    return rep
