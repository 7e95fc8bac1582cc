import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from conftest import mp_cdf_bar, mp_isf
from wdfwer import gauss
from wdfwer.errors import DomainError

SMALLEST_NORMAL = np.finfo(float).tiny
SUBNORMAL = np.finfo(float).smallest_subnormal


def test_pdf_at_zero():
    assert gauss.pdf(0.0) == pytest.approx(0.3989422804014327, rel=1e-15)


def test_pdf_symmetric_and_positive():
    x = np.linspace(-10, 10, 101)
    assert np.array_equal(gauss.pdf(x), gauss.pdf(-x))
    assert np.all(gauss.pdf(x) > 0)


def test_pdf_extreme_tail_flushes():
    assert 0.0 <= gauss.pdf(40.0) < 1e-300


@pytest.mark.parametrize("fn", [gauss.pdf, gauss.cdf, gauss.cdf_bar, gauss.log_cdf])
@pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
def test_non_finite_rejected(fn, bad):
    with pytest.raises(DomainError):
        fn(bad)


def test_cdf_known_values():
    assert gauss.cdf(0.0) == 0.5
    assert gauss.cdf_bar(0.0) == 0.5
    assert gauss.cdf(1.6448536269514722) == pytest.approx(0.95, abs=1e-12)
    assert gauss.cdf(-8.0) == pytest.approx(6.220960574271784e-16, rel=1e-10)
    assert gauss.cdf_bar(10.0) == pytest.approx(7.619853024160526e-24, rel=1e-8)


def test_cdf_bar_relative_accuracy_normal_range():
    # the float64 normal range ends near x = 37.5
    for x in np.linspace(-38, 37.5, 302):
        truth = mp_cdf_bar(x)
        got = gauss.cdf_bar(float(x))
        assert float(abs(got - truth) / truth) <= 1e-10, x


def test_cdf_bar_subnormal_tail():
    # below the smallest normal double precision is lost bit by bit
    for x in np.linspace(37.55, 38, 10):
        truth = mp_cdf_bar(x)
        assert truth < SMALLEST_NORMAL
        err = float(abs(gauss.cdf_bar(float(x)) - truth))
        assert err <= max(1e-10 * float(truth), 4 * SUBNORMAL)


def test_saturation_beyond_38():
    assert gauss.cdf_bar(45.0) == 0.0
    assert gauss.cdf(45.0) == 1.0
    assert gauss.cdf(-45.0) == 0.0


def test_reflection_is_bitwise():
    x = np.linspace(-38, 38, 1001)
    assert np.array_equal(gauss.cdf_bar(x), gauss.cdf(-x))


def test_cdf_plus_cdf_bar_is_one():
    x = np.linspace(-38, 38, 1001)
    total = gauss.cdf(x) + gauss.cdf_bar(x)
    assert np.all(np.abs(total - 1.0) <= 2 * np.spacing(1.0))


def test_monotone_on_fine_grid():
    x = np.arange(-8.0, 8.0, 1e-6)
    assert np.all(np.diff(gauss.cdf(x)) >= 0)
    # steps fall below one ulp of 1.0 past |x| = 6
    assert np.all(np.diff(gauss.cdf(x[x < 6.0])) > 0)
    assert np.all(np.diff(gauss.cdf_bar(x[x > -6.0])) < 0)


@pytest.mark.parametrize("a,b", [(-1, 1), (0, 3), (-5, -2), (2.5, 7), (-0.3, 0.1)])
def test_quadrature_of_density(a, b):
    integral, _ = quad(gauss.pdf, a, b, epsabs=1e-12, epsrel=1e-12)
    assert integral == pytest.approx(gauss.cdf(b) - gauss.cdf(a), abs=1e-10)


def test_log_cdf_values():
    assert gauss.log_cdf(0.0) == pytest.approx(-math.log(2), rel=1e-15)
    assert gauss.log_cdf(10.0) == pytest.approx(-7.619853024160526e-24, rel=1e-8)
    assert gauss.log_cdf(-5.0) == pytest.approx(-15.064998393988726, rel=1e-8)


def test_log_cdf_finite_far_left():
    for x in (-38.0, -40.0, -100.0, -1e6):
        assert math.isfinite(gauss.log_cdf(x))
    truth = float(mp.log(mp_cdf_bar(60)))
    assert gauss.log_cdf(-60.0) == pytest.approx(truth, rel=1e-12)


def test_quantile_known_values():
    assert gauss.quantile(0.5) == 0.0
    assert gauss.quantile(0.95) == pytest.approx(1.6448536269514722, abs=1e-9)
    p = 1 - (-math.log(0.95)) / 100
    c = gauss.quantile(p)
    assert c == pytest.approx(3.28333524685654, abs=1e-9)
    assert abs(gauss.cdf(c) - p) <= 1e-12


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(bad):
    with pytest.raises(DomainError):
        gauss.quantile(bad)
    with pytest.raises(DomainError):
        gauss.isf(bad)


def test_quantile_round_trip_grid():
    ps = np.concatenate([np.logspace(-12, math.log10(0.5), 400),
                         1 - np.logspace(-12, math.log10(0.5), 400)])
    errs = [abs(gauss.cdf(gauss.quantile(p)) - p) for p in ps]
    assert max(errs) <= 1e-11


def test_isf_matches_bisection_oracle_deep_tail():
    for q in (1e-5, 1e-20, 1e-100, 1e-300):
        assert gauss.isf(q) == pytest.approx(float(mp_isf(q)), rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
def test_quantile_round_trip_property(p):
    assert abs(gauss.cdf(gauss.quantile(p)) - p) <= 1e-11


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-300, max_value=0.5))
def test_isf_inverts_upper_tail(q):
    x = gauss.isf(q)
    assert gauss.cdf_bar(x) == pytest.approx(q, rel=1e-12)


def test_log_interval_branches():
    lo = np.array([-1.0, 1.0, -3.0, 5.0, -40.0])
    hi = np.array([1.0, 2.0, -2.0, 6.0, -39.0])
    truth = [mp.log(mp_cdf_bar(-b) - mp_cdf_bar(-a)) for a, b in zip(lo, hi)]
    got = gauss._log_interval(lo, hi)
    for g, t in zip(got, truth):
        assert g == pytest.approx(float(t), rel=1e-10)
