"""Independent reference values: Mittag-Leffler functions and eigenmode amplitudes.

Evaluation uses mpmath so that the oracle shares no arithmetic with the contour
solvers it checks.
"""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.integrate import quad

from ..errors import DomainError

SERIES_RADIUS = 5.0
MAX_EXTRA_DIGITS = 200


def _check(alpha, beta, z):
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if not z <= 0:
        raise DomainError(f"only the decay branch z <= 0 is supported, got z={z}")


def mittag_leffler_series(alpha, beta, z):
    """Power series sum z**k / Gamma(alpha k + beta) in extended precision."""
    _check(alpha, beta, z)
    x = -float(z)
    # the largest term is about exp(x**(1/alpha)); carry that many extra digits
    lost = _series_digits(alpha, x)
    with mp.workdps(int(25 + lost)):
        zz = mp.mpf(z)
        a, b = mp.mpf(alpha), mp.mpf(beta)
        total = mp.mpf(0)
        power = mp.mpf(1)
        floor = mp.mpf(10) ** -300
        eps = mp.mpf(10) ** -30
        k = 0
        while True:
            term = power * mp.rgamma(a * k + b)
            total += term
            if k > 10 and abs(term) < eps * max(abs(total), floor):
                break
            k += 1
            power *= zz
        return float(total)


def mittag_leffler_integral(alpha, beta, z):
    """Real-line form of the inverse Laplace integral, valid for alpha < 1, beta < 1 + alpha.

    E(-x) = (1/pi) int_0^inf e^{-r} r^{a-b} [r^a sin(pi b) - x sin(pi (a - b))]
            / (r^{2a} + 2 x r^a cos(pi a) + x^2) dr

    On [0, 1] the substitution ``r = u^(1/a)`` leaves an algebraic weight in u.
    """
    _check(alpha, beta, z)
    if not alpha < 1 or not beta < 1 + alpha:
        raise DomainError("integral form needs alpha < 1 and beta < 1 + alpha")
    x = -float(z)
    if x == 0:
        return float(mp.rgamma(beta))
    a, b = float(alpha), float(beta)
    s_b, s_ab, c_a = math.sin(math.pi * b), math.sin(math.pi * (a - b)), math.cos(math.pi * a)

    def g(r):
        ra = r**a
        return math.exp(-r) * (ra * s_b - x * s_ab) / (ra * ra + 2 * x * ra * c_a + x * x)

    def g_head(u):
        # r = u^(1/a) on [0, 1]; r^(a-b) dr folds into the weight u^((1-b)/a)
        return math.exp(-(u ** (1 / a))) * (u * s_b - x * s_ab) / (u * u + 2 * x * u * c_a + x * x) / a

    head, _ = quad(g_head, 0.0, 1.0, weight="alg", wvar=((1 - b) / a, 0.0), epsabs=0,
                   epsrel=2e-14, limit=200)
    peak = x ** (1 / a)
    pts = [p for p in (peak,) if 1 < p < 60]
    mid, _ = quad(lambda r: r ** (a - b) * g(r), 1.0, 60.0, points=pts or None, epsabs=0,
                  epsrel=2e-14, limit=200)
    tail, _ = quad(lambda r: r ** (a - b) * g(r), 60.0, np.inf, epsabs=1e-300, limit=200)
    return (head + mid + tail) / math.pi


def _series_digits(alpha, x):
    return x ** (1.0 / alpha) / math.log(10) if x > 0 else 0.0


def mittag_leffler(alpha, beta, z):
    """Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z <= 0."""
    _check(alpha, beta, z)
    if alpha == 1 and beta == 1:
        return math.exp(z)
    small = -z <= SERIES_RADIUS and _series_digits(alpha, -z) < MAX_EXTRA_DIGITS
    if small or alpha == 1 or beta >= 1 + alpha:
        return mittag_leffler_series(alpha, beta, z)
    return mittag_leffler_integral(alpha, beta, z)


def eigenmode_oracle(alpha, lam, t):
    """Exact constant-order mode amplitudes ``(s0, s1)`` at time t.

    ``s0 = E_alpha(-lam t^alpha)`` multiplies an eigenvector initial datum and
    ``s1 = t^(alpha-1) E_{alpha,alpha}(-lam t^alpha)`` is the source kernel.
    """
    if not (0 < alpha <= 1 and lam > 0 and t > 0):
        raise DomainError("eigenmode oracle needs 0 < alpha <= 1, lam > 0, t > 0")
    z = -lam * t**alpha
    return mittag_leffler(alpha, 1.0, z), t ** (alpha - 1) * mittag_leffler(alpha, alpha, z)


def eigenmode_step_response(alpha, lam, t):
    """Solution amplitude for a constant-in-time source along one eigenvector."""
    return (1.0 - mittag_leffler(alpha, 1.0, -lam * t**alpha)) / lam
