import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erfcx

from fracweak.errors import DomainError
from fracweak.verify.oracles import (eigenmode_oracle, eigenmode_step_response, mittag_leffler,
                                     mittag_leffler_integral, mittag_leffler_series)

# [DERIVED] E_{1/2}(-x) = exp(x^2) erfc(x), evaluated with mpmath at 30 digits
HALF_ORDER = [(0.5, 0.615690344192925874870793422684),
              (1.0, 0.427583576155807004410750344491),
              (2.0, 0.255395676310505743865088580909),
              (10.0, 0.0561409927438225858575173872205),
              (30.0, 0.0187958888614167514971253290494)]


@pytest.mark.parametrize("x,ref", HALF_ORDER)
def test_half_order_closed_form(x, ref):
    assert mittag_leffler(0.5, 1.0, -x) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("x,ref", [(1.0, 0.13660600739194928253732910707),
                                   (2.0, 0.0533982309267447992179022897436)])
def test_half_half_closed_form(x, ref):
    # [DERIVED] E_{1/2,1/2}(-x) = 1/sqrt(pi) - x exp(x^2) erfc(x)
    assert mittag_leffler(0.5, 0.5, -x) == pytest.approx(ref, rel=1e-12)


def test_exponential_and_beta_two():
    assert mittag_leffler(1.0, 1.0, -3.0) == math.exp(-3.0)
    # [DERIVED] E_{1,2}(z) = (e^z - 1)/z
    assert mittag_leffler(1.0, 2.0, -2.0) == pytest.approx(0.432332358381693654053, rel=1e-14)


@pytest.mark.parametrize("alpha,beta", [(0.3, 1.0), (0.5, 0.5), (0.8, 0.8), (0.9, 1.0)])
def test_series_and_integral_agree(alpha, beta):
    for x in (0.5, 2.0, 4.5):
        s = mittag_leffler_series(alpha, beta, -x)
        i = mittag_leffler_integral(alpha, beta, -x)
        assert abs(s - i) <= 1e-12 * abs(s)


def test_domain_errors():
    with pytest.raises(DomainError):
        mittag_leffler(1.5, 1.0, -1.0)
    with pytest.raises(DomainError):
        mittag_leffler(0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler_integral(0.5, 2.0, -1.0)
    with pytest.raises(DomainError):
        eigenmode_oracle(0.5, -1.0, 1.0)


def test_eigenmode_helpers():
    s0, s1 = eigenmode_oracle(0.5, 2.0, 0.25)
    assert s0 == pytest.approx(float(erfcx(1.0)), rel=1e-13)
    assert s1 == pytest.approx(2.0 * 0.13660600739194928, rel=1e-12)
    assert eigenmode_step_response(0.5, 2.0, 0.25) == pytest.approx((1 - s0) / 2.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 40.0))
def test_half_order_matches_erfcx(x):
    assert mittag_leffler(0.5, 1.0, -x) == pytest.approx(float(erfcx(x)), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 0.95), st.floats(0.0, 20.0), st.floats(0.01, 5.0))
def test_completely_monotone_decay(alpha, x, dx):
    # E_alpha(-x) is positive and decreasing on x >= 0 for 0 < alpha <= 1
    a = mittag_leffler(alpha, 1.0, -x)
    b = mittag_leffler(alpha, 1.0, -(x + dx))
    assert 0 < b < a <= 1.0
