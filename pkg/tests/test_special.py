import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp

from fdnet.special import adaptive_quad, gauss_2f1_neg, regularized_gamma_ccdf


@pytest.mark.trivial
def test_exponential_median():
    assert regularized_gamma_ccdf(1, 0.693147) == pytest.approx(0.5, abs=1e-6)


@pytest.mark.trivial
@pytest.mark.parametrize("n", [1, 2, 5, 30])
def test_ccdf_at_origin(n):
    assert regularized_gamma_ccdf(n, 0.0) == 1.0


def test_ccdf_series_value():
    direct = math.exp(-4.0) * sum(4.0 ** k / math.factorial(k) for k in range(4))
    assert regularized_gamma_ccdf(4, 4.0) == pytest.approx(direct, rel=1e-13)
    assert regularized_gamma_ccdf(4, 4.0) == pytest.approx(0.43347, abs=1e-5)


@pytest.mark.monotone
@given(st.integers(1, 40), st.floats(0, 100), st.floats(0, 10))
def test_ccdf_nonincreasing_in_unit_interval(n, x, dx):
    a, b = regularized_gamma_ccdf(n, x), regularized_gamma_ccdf(n, x + dx)
    assert 0.0 <= b <= a + 1e-15 <= 1.0 + 1e-15


@pytest.mark.trivial
def test_2f1_at_zero():
    assert gauss_2f1_neg(1.0, 0.5, 1.5, 0.0) == 1.0


@pytest.mark.parametrize("z2", [1.0, 193.9, 0.3, 1e4])
def test_2f1_arctan_identity(z2):
    z = math.sqrt(z2)
    assert gauss_2f1_neg(1.0, 0.5, 1.5, -z2) == pytest.approx(math.atan(z) / z, rel=1e-10)


def test_2f1_corollary_value():
    assert gauss_2f1_neg(1.0, 0.5, 1.5, -193.9) == pytest.approx(0.1077, abs=1e-4)


@given(st.floats(0.05, 0.95), st.floats(0, 1e4))
def test_2f1_matches_scipy(b, x):
    assert gauss_2f1_neg(1.0, b, 1.0 + b, -x) == pytest.approx(sp.hyp2f1(1.0, b, 1.0 + b, -x), rel=1e-9)


@pytest.mark.monotone
@given(st.floats(2.1, 8.0), st.floats(0, 1e3), st.floats(1e-3, 1e3))
def test_2f1_decreasing_to_zero(alpha, x, dx):
    d = 2.0 / alpha
    a, b = gauss_2f1_neg(1.0, d, 1.0 + d, -x), gauss_2f1_neg(1.0, d, 1.0 + d, -(x + dx))
    assert 0.0 < b < a <= 1.0
    assert gauss_2f1_neg(1.0, d, 1.0 + d, -1e24) < 1e-5


def test_2f1_rejects_positive_argument():
    with pytest.raises(ValueError):
        gauss_2f1_neg(1.0, 0.5, 1.5, 0.5)


@pytest.mark.trivial
def test_quad_gamma_two():
    r = adaptive_quad(lambda x: math.exp(-x) * x, 0.0, math.inf)
    assert r.converged and r.value == pytest.approx(1.0, rel=1e-12)


def test_quad_near_singular_against_midpoint():
    f = lambda p: 1.0 / (1.0 + math.cos(p) + 1.0001)
    r = adaptive_quad(f, 0.0, 2 * math.pi, tol=1e-10)
    n = 10_000_000
    phi = (np.arange(n) + 0.5) * (2 * math.pi / n)
    midpoint = np.sum(1.0 / (1.0 + np.cos(phi) + 1.0001)) * (2 * math.pi / n)
    assert r.value == pytest.approx(midpoint, rel=1e-8)
    assert r.value == pytest.approx(2 * math.pi / math.sqrt(2.0001 ** 2 - 1.0), rel=1e-9)


def test_quad_tail_truncation():
    # integrand decaying as r^(1 - alpha) with an analytic tail bound
    alpha = 4.0
    f = lambda r: r / (1.0 + r ** alpha)
    tail = lambda r: r ** (2.0 - alpha) / (alpha - 2.0)
    r = adaptive_quad(f, 0.0, math.inf, tol=1e-10, tail=tail)
    assert r.value == pytest.approx(math.pi / 4.0, rel=1e-8)


def test_quad_reports_budget_failure():
    r = adaptive_quad(lambda x: math.sin(1.0 / x) / x, 1e-9, 1.0, tol=1e-12, limit=3)
    assert not r.converged
