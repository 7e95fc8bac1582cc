"""Correlation models for unit-variance Gaussian vectors.

Four model kinds are provided: ``Independent``, ``Equicorrelated``,
``ProductFactor`` (corr_ij = lambda_i * lambda_j) and ``Explicit``.  The first
three admit a single-factor representation

    X_i = mu_i + lambda_i * Z + sqrt(1 - lambda_i^2) * eps_i

which is what the conditional Monte-Carlo estimators exploit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, FactorizationError, ModelError

LAMBDA_CLAMP = 0.99
EXPLICIT_SIZE_LIMIT = 2000
WEAK_DEP_M0 = 100


@dataclass(frozen=True)
class Independent:
    n: int
    kind = "independent"

    def __post_init__(self):
        _check_size(self.n)

    def loadings(self) -> np.ndarray:
        return np.zeros(self.n)

    def correlation(self) -> np.ndarray:
        return np.eye(self.n)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n}

    def summary(self) -> str:
        return "independent"


@dataclass(frozen=True)
class Equicorrelated:
    rho: float
    n: int
    kind = "equicorrelated"

    def __post_init__(self):
        _check_size(self.n)
        if not 0.0 <= self.rho < 1.0:
            raise DomainError(f"rho must lie in [0, 1), got {self.rho!r}")

    def loadings(self) -> np.ndarray:
        return np.full(self.n, math.sqrt(self.rho))

    def correlation(self) -> np.ndarray:
        c = np.full((self.n, self.n), float(self.rho))
        np.fill_diagonal(c, 1.0)
        return c

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rho": self.rho, "n": self.n}

    def summary(self) -> str:
        return f"equicorrelated(rho={self.rho!r})"


@dataclass(frozen=True, eq=False)
class ProductFactor:
    """corr_ij = lambdas[i] * lambdas[j].

    ``lambda1``/``delta`` are set when the loadings came from
    :func:`build_schedule`; ``clamped`` lists the 0-based positions whose
    schedule value was cut back to ``LAMBDA_CLAMP``.
    """

    lambdas: np.ndarray
    lambda1: Optional[float] = None
    delta: Optional[float] = None
    clamped: tuple = ()
    kind = "product"

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        _check_size(lam.size)
        if not np.all(np.abs(lam) < 1.0):
            raise DomainError("every lambda must lie strictly inside (-1, 1)")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def n(self) -> int:
        return self.lambdas.size

    def __eq__(self, other):
        return (isinstance(other, ProductFactor)
                and np.array_equal(self.lambdas, other.lambdas)
                and (self.lambda1, self.delta) == (other.lambda1, other.delta))

    def loadings(self) -> np.ndarray:
        return self.lambdas

    def correlation(self) -> np.ndarray:
        c = np.outer(self.lambdas, self.lambdas)
        np.fill_diagonal(c, 1.0)
        return c

    def to_dict(self) -> dict:
        if self.lambda1 is not None and self.delta is not None:
            return {"kind": self.kind, "lambda1": self.lambda1, "delta": self.delta, "n": self.n}
        return {"kind": self.kind, "lambdas": self.lambdas.tolist()}

    def summary(self) -> str:
        if self.lambda1 is not None:
            return f"product(lambda1={self.lambda1!r},delta={self.delta!r})"
        return "product"


@dataclass(frozen=True, eq=False)
class Explicit:
    matrix: np.ndarray
    size_limit: int = EXPLICIT_SIZE_LIMIT
    kind = "explicit"
    _chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DomainError("correlation matrix must be square and non-empty")
        if m.shape[0] > self.size_limit:
            raise DomainError(f"explicit models are limited to n <= {self.size_limit}")
        if not np.all(np.isfinite(m)):
            raise DomainError("correlation matrix must be finite")
        if not np.array_equal(m, m.T):
            raise DomainError("correlation matrix must be symmetric")
        if not np.all(np.diag(m) == 1.0):
            raise DomainError("correlation matrix must have a unit diagonal")
        try:
            chol = np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise FactorizationError("correlation matrix is not positive definite") from None
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_chol", chol)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        return isinstance(other, Explicit) and np.array_equal(self.matrix, other.matrix)

    def loadings(self) -> np.ndarray:
        raise ModelError("explicit models have no single-factor form")

    def correlation(self) -> np.ndarray:
        return self.matrix

    def cholesky(self) -> np.ndarray:
        return self._chol

    def to_dict(self) -> dict:
        return {"kind": self.kind, "matrix": self.matrix.tolist()}

    def summary(self) -> str:
        return "explicit"


DependenceModel = (Independent, Equicorrelated, ProductFactor, Explicit)


def _check_size(n):
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")


def schedule_loadings(lambda1: float, delta: float, n: int) -> np.ndarray:
    """Raw schedule values: lambda1, then 1 / (log i) ** (1 + delta) for i >= 2."""
    i = np.arange(2, n + 1, dtype=float)
    return np.concatenate(([lambda1], np.log(i) ** -(1.0 + delta)))


def build_schedule(lambda1: float, delta: float, n: int,
                   clamp: float = LAMBDA_CLAMP) -> ProductFactor:
    if not 0.0 < lambda1 < 1.0:
        raise DomainError(f"lambda1 must lie in (0, 1), got {lambda1!r}")
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta!r}")
    _check_size(n)
    raw = schedule_loadings(lambda1, delta, int(n))
    over = np.flatnonzero(raw > clamp)
    lam = np.minimum(raw, clamp)
    return ProductFactor(lam, lambda1=float(lambda1), delta=float(delta),
                         clamped=tuple(over.tolist()))


def model_from_dict(d: dict):
    kind = str(d.get("kind", "")).lower()
    if kind == "independent":
        return Independent(int(d["n"]))
    if kind in ("equicorrelated", "equi"):
        return Equicorrelated(float(d["rho"]), int(d["n"]))
    if kind == "product":
        if "lambdas" in d:
            return ProductFactor(d["lambdas"])
        return build_schedule(float(d["lambda1"]), float(d["delta"]), int(d["n"]))
    if kind == "explicit":
        return Explicit(d["matrix"])
    raise DomainError(f"unknown model kind {d.get('kind')!r}")


def model_to_json(model) -> str:
    return json.dumps(model.to_dict())


def model_from_json(text: str):
    return model_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# weak-dependence diagnostics


@dataclass(frozen=True)
class WeakDepDiagnostic:
    """Lag statistics of a correlation model; arrays are indexed by lag m - 1."""

    rho_m: np.ndarray
    gamma: float
    gamma_seq: np.ndarray
    rho_log_m: np.ndarray
    m0: int
    tail_max: float
    trend: int
    clamped: tuple = ()

    @property
    def weakly_dependent(self) -> bool:
        """Finite-n proxy: rho_m * log m is not increasing over [m0, n - 1]."""
        return self.trend <= 0

    def rho(self, m: int) -> float:
        return float(self.rho_m[m - 1])

    def gamma_at(self, m: int) -> float:
        return float(self.gamma_seq[m - 1])


def _lag_max_products(lam: np.ndarray) -> np.ndarray:
    """max_i |lam_i * lam_{i+m}| for m = 1..n-1.

    Past the first index from which |lam| is nonincreasing, the maximum over
    i is attained at that index, so only the prefix needs a scan.
    """
    a = np.abs(lam)
    n = a.size
    if n < 2:
        return np.zeros(0)
    rises = np.flatnonzero(np.diff(a) > 0)
    start = int(rises[-1]) + 1 if rises.size else 0
    out = np.zeros(n - 1)
    for i in range(min(start + 1, n - 1)):
        prods = a[i] * a[i + 1:]
        m_max = prods.size
        np.maximum(out[:m_max], prods, out=out[:m_max])
    return out


def _lag_max_matrix(c: np.ndarray) -> np.ndarray:
    n = c.shape[0]
    return np.array([np.max(np.abs(np.diagonal(c, offset=m))) for m in range(1, n)])


def lag_correlations(model, n: Optional[int] = None) -> np.ndarray:
    n = model.n if n is None else n
    if n != model.n:
        raise DomainError(f"model has size {model.n}, diagnostic requested at n={n}")
    if isinstance(model, Independent):
        return np.zeros(n - 1)
    if isinstance(model, Equicorrelated):
        return np.full(n - 1, float(model.rho))
    if isinstance(model, ProductFactor):
        return _lag_max_products(model.lambdas)
    return _lag_max_matrix(model.matrix)


def diagnose(model, n: Optional[int] = None, m0: int = WEAK_DEP_M0) -> WeakDepDiagnostic:
    rho_m = lag_correlations(model, n)
    size = rho_m.size
    if size == 0:
        empty = np.zeros(0)
        return WeakDepDiagnostic(empty, 0.0, empty, empty, 1, 0.0, 0,
                                 getattr(model, "clamped", ()))
    # running sup from the right: gamma_m = sup_{j >= m} rho_j
    gamma_seq = np.maximum.accumulate(rho_m[::-1])[::-1]
    lags = np.arange(1, size + 1, dtype=float)
    rho_log = rho_m * np.log(lags)
    lo = min(m0, size)
    tail = rho_log[lo - 1:]
    diff = tail[-1] - tail[0]
    trend = 0 if diff == 0 else (1 if diff > 0 else -1)
    return WeakDepDiagnostic(
        rho_m=rho_m,
        gamma=float(gamma_seq[0]),
        gamma_seq=gamma_seq,
        rho_log_m=rho_log,
        m0=lo,
        tail_max=float(tail.max()),
        trend=trend,
        clamped=getattr(model, "clamped", ()),
    )


# ---------------------------------------------------------------------------
# sampling


def sample_many(model, means, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent draws, shape (size, n)."""
    mu = np.asarray(getattr(means, "mu", means), dtype=float)
    if mu.shape != (model.n,):
        raise DomainError(f"means have length {mu.size}, model has size {model.n}")
    if isinstance(model, Explicit):
        eps = rng.standard_normal((size, model.n))
        return eps @ model.cholesky().T + mu
    lam = model.loadings()
    z = rng.standard_normal((size, 1))
    eps = rng.standard_normal((size, model.n))
    return lam * z + np.sqrt(1.0 - lam * lam) * eps + mu


def sample(model, means, rng: np.random.Generator) -> np.ndarray:
    """One draw of (X_1, ..., X_n)."""
    return sample_many(model, means, rng, 1)[0]
