"""Closed-form asymptotics: limiting error rates, the convergence-rate bound,
the two-term extreme quantile expansion and finite-n power-condition proxies.

The power conditions are statements about limits and cannot be decided at a
finite size; the checkers return the computable quantity together with a
proxy flag whose name says what was actually compared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammainc

from .errors import DomainError
from .procedures import Family, ProcedureSpec, check_alpha


def poisson_cdf_below(k: int, mean: float) -> float:
    """P(N < k) for N ~ Poisson(mean)."""
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    if mean < 0:
        raise DomainError(f"mean must be non-negative, got {mean!r}")
    if mean == 0:
        return 1.0
    if k == 1:
        return math.exp(-mean)
    return 1.0 - float(gammainc(k, mean))


def kth_max_limit(tau: float, k: int, two_sided: bool = False) -> float:
    """lim P(k-th largest <= u_n) when d_n * cdf_bar(u_n) -> tau."""
    if tau < 0:
        raise DomainError(f"tau must be non-negative, got {tau!r}")
    if math.isinf(tau):
        return 0.0
    return poisson_cdf_below(k, 2.0 * tau if two_sided else tau)


def limiting_fwer(spec: ProcedureSpec, alpha: float) -> float:
    alpha = check_alpha(alpha)
    if spec.family is Family.LEHMANN_ROMANO:
        ka = spec.k * alpha
        if spec.k == 1:
            return -math.expm1(-ka)
        return float(gammainc(spec.k, ka))
    return alpha


@dataclass(frozen=True)
class RateParams:
    """Inputs of the rate bound.

    ``gamma_seq[m - 1]`` holds sup_{j >= m} rho_j.  ``nu_admissible`` reports
    whether 0 < nu < (1 - gamma) / (1 + gamma); the bound is still evaluated
    when it is not.
    """

    nu: float
    gamma: float
    gamma_seq: np.ndarray
    n0_frac: float
    n: int

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu!r}")
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {self.gamma!r}")
        if not 0.0 <= self.n0_frac <= 1.0:
            raise DomainError(f"n0_frac must lie in [0, 1], got {self.n0_frac!r}")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "gamma_seq", np.asarray(self.gamma_seq, dtype=float))

    @property
    def nu_admissible(self) -> bool:
        return self.nu < (1.0 - self.gamma) / (1.0 + self.gamma)


def rate_terms(params: RateParams) -> tuple:
    n, nu, g = params.n, params.nu, params.gamma
    log_n = math.log(n)
    m = int(math.floor(n ** nu))
    if m < 1 or m > params.gamma_seq.size:
        raise DomainError(f"floor(n ** nu) = {m} is outside gamma_seq (length {params.gamma_seq.size})")
    return (
        n ** ((1.0 + nu - 2.0) / (1.0 + g)) * log_n ** (1.0 / (1.0 + g)),
        float(params.gamma_seq[m - 1]) * nu * log_n,
        1.0 - params.n0_frac,
        1.0 / n,
    )


def rate_bound(params: RateParams) -> float:
    return max(rate_terms(params))


def cramer_quantile(beta: float, n: int) -> float:
    """Two-term expansion of isf(beta / n) around sqrt(2 log n).

    The beta term enters as 2 log(beta): matching phi(x)/x to beta/n gives
    x^2 = 2 log n - log log n - log 4 pi - 2 log beta + o(1).
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    if int(n) != n or n < 3:
        raise DomainError(f"n must be an integer >= 3, got {n!r}")
    log_n = math.log(n)
    root = math.sqrt(2.0 * log_n)
    return root - (math.log(log_n) + math.log(4.0 * math.pi) + 2.0 * math.log(beta)) / (2.0 * root)


class PowerCheck(NamedTuple):
    value: float
    satisfied_proxy: bool


def power_condition_t41(n1: int, mu_max: float) -> PowerCheck:
    """Ratio sqrt(2 log n1) / max mu; the proxy is ``ratio < 1`` at this n1."""
    if int(n1) != n1 or n1 < 2:
        raise DomainError(f"n1 must be an integer >= 2, got {n1!r}")
    if not mu_max > 0:
        raise DomainError(f"mu_max must be positive, got {mu_max!r}")
    ratio = math.sqrt(2.0 * math.log(n1)) / mu_max
    return PowerCheck(ratio, ratio < 1.0)


def _growth(n: float, n1: float, mu: float) -> float:
    return (n1 / n) * math.exp(mu * math.sqrt(2.0 * math.log(n)))


def power_condition_t42(n: int, n1: int, mu_min: float, n1_half=None) -> PowerCheck:
    """(n1 / n) * exp(mu sqrt(2 log n)); the proxy asks whether it grew
    from size n / 2 to n.

    ``n1_half`` is the number of alternatives at size n / 2 and defaults to
    n1 / 2 (proportional scaling).  Passing ``n1`` itself models a fixed
    number of alternatives, i.e. a vanishing fraction.
    """
    if int(n) != n or int(n1) != n1 or not 1 <= n1 <= n:
        raise DomainError(f"need integers 1 <= n1 <= n, got n1={n1!r}, n={n!r}")
    if not mu_min > 0:
        raise DomainError(f"mu_min must be positive, got {mu_min!r}")
    if n < 2:
        raise DomainError("n must be at least 2")
    n1_half = n1 / 2.0 if n1_half is None else float(n1_half)
    if not 0 < n1_half <= n / 2.0:
        raise DomainError(f"n1_half must lie in (0, n / 2], got {n1_half!r}")
    here = _growth(n, n1, mu_min)
    half = _growth(n / 2.0, n1_half, mu_min)
    return PowerCheck(here, here > half)
