import math

import mpmath as mp
import numpy as np
import pytest

from conftest import mp_isf, mp_poisson_below
from wdfwer import asym, depmodels, gauss
from wdfwer.errors import DomainError
from wdfwer.procedures import Family, ProcedureSpec

LR = Family.LEHMANN_ROMANO


def test_limiting_fwer_values():
    assert asym.limiting_fwer(ProcedureSpec(Family.SIDAK), 0.05) == 0.05
    assert asym.limiting_fwer(ProcedureSpec(Family.BONFERRONI, "two"), 0.1) == 0.1
    assert asym.limiting_fwer(ProcedureSpec(LR), 0.05) == pytest.approx(
        0.048770575499285991, rel=1e-14)
    assert asym.limiting_fwer(ProcedureSpec(LR, k=2), 0.05) == pytest.approx(
        0.004678840160444395, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.05, 0.1])
def test_lr_limit_against_series_and_decreasing(alpha):
    vals = []
    for k in range(1, 11):
        got = asym.limiting_fwer(ProcedureSpec(LR, k=k), alpha)
        truth = 1 - mp_poisson_below(k, k * alpha)
        assert got == pytest.approx(float(truth), rel=1e-10, abs=1e-300)
        vals.append(got)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_lr_k1_below_alpha():
    for alpha in np.linspace(0.01, 0.99, 50):
        assert asym.limiting_fwer(ProcedureSpec(LR), alpha) < alpha


def test_kth_max_limits():
    e = math.exp(-1)
    assert asym.kth_max_limit(1.0, 1) == pytest.approx(e, rel=1e-15)
    assert asym.kth_max_limit(1.0, 2) == pytest.approx(2 * e, rel=1e-14)
    assert asym.kth_max_limit(0.5, 1, two_sided=True) == pytest.approx(e, rel=1e-15)
    assert asym.kth_max_limit(0.25, 1) == pytest.approx(math.exp(-0.25), rel=1e-15)
    with pytest.raises(DomainError):
        asym.kth_max_limit(-1.0, 1)
    with pytest.raises(DomainError):
        asym.poisson_cdf_below(0, 1.0)


def _schedule_gamma():
    d = depmodels.diagnose(depmodels.build_schedule(0.5, 0.5, 10**6))
    return d.gamma, d.gamma_seq


def test_rate_bound_schedule_decreasing():
    gamma, seq = _schedule_gamma()
    vals = [asym.rate_bound(asym.RateParams(0.3, gamma, seq, 1.0, n))
            for n in (10**3, 10**4, 10**5, 10**6)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert not asym.RateParams(0.3, gamma, seq, 1.0, 1000).nu_admissible


def test_rate_bound_independent():
    seq = np.zeros(10**6)
    r3 = asym.rate_bound(asym.RateParams(0.5, 0.0, seq, 1.0, 10**3))
    r6 = asym.rate_bound(asym.RateParams(0.5, 0.0, seq, 1.0, 10**6))
    assert r6 < r3
    terms = asym.rate_terms(asym.RateParams(0.5, 0.0, seq, 1.0, 10**3))
    assert terms[1] == 0 and terms[2] == 0 and terms[3] == 1e-3
    assert terms[0] == pytest.approx(1000 ** -0.5 * math.log(1000), rel=1e-14)


def test_rate_bound_floor_from_alternatives():
    seq = np.zeros(10**6)
    for n in (10, 10**3, 10**6):
        assert asym.rate_bound(asym.RateParams(0.3, 0.0, seq, 0.9, n)) >= 0.1 - 1e-15


def test_rate_params_validation():
    seq = np.zeros(10)
    with pytest.raises(DomainError):
        asym.RateParams(0.0, 0.0, seq, 1.0, 100)
    with pytest.raises(DomainError):
        asym.RateParams(0.3, 1.0, seq, 1.0, 100)
    with pytest.raises(DomainError):
        asym.RateParams(0.3, 0.0, seq, 1.0, 1)
    with pytest.raises(DomainError):
        asym.rate_bound(asym.RateParams(0.9, 0.0, seq, 1.0, 10**4))


def test_cramer_regression_gap():
    beta = -math.log(0.95)
    exact = float(mp_isf(beta / 10**6))
    gap = abs(asym.cramer_quantile(beta, 10**6) - exact)
    assert gap < 0.02
    # frozen from the arbitrary-precision evaluation (0.008974)
    assert gap < 0.0090


def test_cramer_gap_shrinks():
    gaps = [abs(asym.cramer_quantile(1.0, n) - gauss.quantile(1 - 1 / n))
            for n in (10**3, 10**4, 10**6, 10**8)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_cramer_monotone_and_domain():
    vals = [asym.cramer_quantile(0.05, n) for n in (10, 10**2, 10**4, 10**8)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        asym.cramer_quantile(1.0, 2)
    with pytest.raises(DomainError):
        asym.cramer_quantile(0.0, 100)


def test_power_condition_max_ratio():
    n1 = 5000
    root = math.sqrt(2 * math.log(n1))
    assert asym.power_condition_t41(n1, 2 * root) == (pytest.approx(0.5), True)
    r = asym.power_condition_t41(n1, root)
    assert r.value == pytest.approx(1.0) and not r.satisfied_proxy
    r = asym.power_condition_t41(10**4, 4.0)
    assert r.value == pytest.approx(1.0729830131446736, rel=1e-14)
    assert not r.satisfied_proxy
    with pytest.raises(DomainError):
        asym.power_condition_t41(100, 0.0)


def test_power_condition_growth():
    r = asym.power_condition_t42(10**4, 100, 0.5)
    assert r.value == pytest.approx(0.08550297060723211, rel=1e-13)
    assert asym.power_condition_t42(10**4, 10**4, 0.3).satisfied_proxy
    # a fixed number of alternatives with a vanishing shift does not grow
    assert not asym.power_condition_t42(10**4, 10, 1e-3, n1_half=10).satisfied_proxy
    with pytest.raises(DomainError):
        asym.power_condition_t42(100, 200, 0.5)
    with pytest.raises(DomainError):
        asym.power_condition_t42(100, 10, -1.0)
