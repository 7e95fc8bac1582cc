"""Monte-Carlo estimation of FWER, k-FWER and AnyPwr.

The conditional estimators draw only the shared factor ``Z`` and evaluate the
conditional probability given ``Z`` in closed form; for a single-factor model
the exceedance indicators are independent given ``Z``.  The brute-force
estimators simulate whole vectors and apply the procedure's decision rule, and
serve as an independent check.

Reproducibility: replicates are grouped in fixed blocks of ``BLOCK``; block
``b`` always draws from the substream ``SeedSequence(seed, spawn_key=(b,))``.
Per-replicate values are assembled in replicate order before any reduction, so
results do not depend on the number of worker threads.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import asym, depmodels, gauss, procedures
from .errors import DegenerateModelError, DomainError, ModelError
from .procedures import Family, ProcedureSpec

BLOCK = 256
# matrix cells per evaluation chunk in the conditional estimators
_CELLS = 1 << 21
DEFAULT_REPLICATES = 10000
CI_REPLICATES = 2000
MAX_SEED = 2 ** 64


class Metric(str, enum.Enum):
    FWER = "fwer"
    KFWER = "kfwer"
    POWER = "power"


@dataclass(frozen=True, eq=False)
class MeanConfig:
    mu: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        if mu.size == 0 or not np.all(np.isfinite(mu)):
            raise DomainError("means must be a non-empty vector of finite values")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def null(cls, n: int) -> "MeanConfig":
        return cls(np.zeros(n))

    @classmethod
    def shifted(cls, n: int, n1: int, shift: float) -> "MeanConfig":
        """The first ``n1`` means equal ``shift``, the rest are zero."""
        if not 0 <= n1 <= n:
            raise DomainError(f"n1 must lie in [0, n], got {n1!r}")
        mu = np.zeros(n)
        mu[:n1] = shift
        return cls(mu)

    @property
    def n(self) -> int:
        return self.mu.size

    @property
    def null_mask(self) -> np.ndarray:
        return self.mu == 0.0

    @property
    def n0(self) -> int:
        return int(np.count_nonzero(self.null_mask))

    @property
    def n1(self) -> int:
        return self.n - self.n0

    def summary(self) -> str:
        return f"n0={self.n0},n1={self.n1}"


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float
    replicates: int
    seed: int
    meta: dict = field(default_factory=dict)

    def record(self) -> dict:
        """Flat record in the CSV column order."""
        m = self.meta
        return {
            "procedure": m.get("procedure"),
            "sided": m.get("sided"),
            "k": m.get("k"),
            "metric": m.get("metric"),
            "n": m.get("n"),
            "alpha": m.get("alpha"),
            "lambda1": m.get("lambda1"),
            "delta": m.get("delta"),
            "model": m.get("model"),
            "reps": self.replicates,
            "seed": self.seed,
            "estimate": self.value,
            "std_error": self.std_error,
        }


# ---------------------------------------------------------------------------
# streams and reductions


def check_seed(seed) -> int:
    if int(seed) != seed or not 0 <= seed < MAX_SEED:
        raise DomainError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def run_blocks(fn: Callable[[np.random.Generator, int], np.ndarray], replicates: int,
               seed: int, workers: int = 1) -> np.ndarray:
    """Per-replicate values, in replicate order, from ``fn(rng, count)``."""
    if int(replicates) != replicates or replicates < 1:
        raise DomainError(f"replicates must be a positive integer, got {replicates!r}")
    seed = check_seed(seed)
    counts = [min(BLOCK, replicates - start) for start in range(0, int(replicates), BLOCK)]

    def one(b):
        return np.asarray(fn(block_rng(seed, b), counts[b]), dtype=float)

    if workers > 1 and len(counts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(one, range(len(counts))))
    else:
        parts = [one(b) for b in range(len(counts))]
    return np.concatenate(parts)


def draw_factor(replicates: int, seed: int) -> np.ndarray:
    """The shared factor Z for every replicate, in replicate order."""
    return run_blocks(lambda rng, count: rng.standard_normal(count), replicates, seed)


def summarize(values: np.ndarray) -> tuple:
    """Mean and standard error, computed on values shifted by the first one
    so that a constant sample gives exactly (value, 0)."""
    shift = values[0]
    d = values - shift
    mean = shift + d.mean()
    if values.size < 2:
        return float(mean), 0.0
    se = d.std(ddof=1) / math.sqrt(values.size)
    return float(min(max(mean, 0.0), 1.0)), float(se)


# ---------------------------------------------------------------------------
# conditional (single-factor) estimators


def _factor_loadings(model) -> np.ndarray:
    if isinstance(model, depmodels.Explicit):
        raise ModelError("conditional estimators need a single-factor model")
    lam = np.asarray(model.loadings(), dtype=float)
    if np.any(np.abs(lam) >= 1.0):
        raise DegenerateModelError("a loading of +-1 leaves no idiosyncratic noise")
    return lam


def _as_means(means, n: int) -> MeanConfig:
    if means is None:
        means = MeanConfig.null(n)
    elif not isinstance(means, MeanConfig):
        means = MeanConfig(means)
    if means.n != n:
        raise DomainError(f"means have length {means.n}, model has size {n}")
    return means


class _Conditional:
    """Given Z, exceedance probabilities of the selected coordinates."""

    def __init__(self, lam, mu, tau, two_sided):
        scale = np.sqrt(1.0 - lam * lam)
        self.hi_base = (tau - mu) / scale
        self.lo_base = (-tau - mu) / scale
        self.slope = lam / scale
        self.two_sided = two_sided

    def _args(self, z):
        shift = np.outer(z, self.slope)
        hi = self.hi_base - shift
        lo = self.lo_base - shift if self.two_sided else None
        return lo, hi

    def log_stay(self, z) -> np.ndarray:
        """sum_i log P(coordinate i is not rejected | Z), per row of z."""
        lo, hi = self._args(z)
        terms = gauss._log_interval(lo, hi) if self.two_sided else gauss._log_cdf(hi)
        return terms.sum(axis=1)

    def exceed_prob(self, z) -> np.ndarray:
        lo, hi = self._args(z)
        q = gauss._cdf_bar(hi)
        if self.two_sided:
            q = q + gauss._cdf_bar(-lo)
        return q


def at_least_k(q: np.ndarray, k: int) -> np.ndarray:
    """Row-wise P(at least k successes) for independent Bernoulli(q[r, i]).

    Truncated Poisson-binomial recursion over P(S = j), j < k.  The state is
    rescaled as it goes and the scale kept in log form.
    """
    rows, cols = q.shape
    state = np.zeros((rows, k))
    state[:, 0] = 1.0
    log_scale = np.zeros(rows)
    for i in range(cols):
        p = q[:, i:i + 1]
        carry = state[:, :-1] * p
        state *= 1.0 - p
        state[:, 1:] += carry
        if i % 32 == 31:
            top = state.max(axis=1)
            top = np.where(top > 0, top, 1.0)
            state /= top[:, None]
            log_scale += np.log(top)
    below = state.sum(axis=1) * np.exp(log_scale)
    return 1.0 - below


def conditional_tail(model, tau: float, two_sided: bool, means=None, k: int = 1,
                     target: str = "null", replicates: int = DEFAULT_REPLICATES,
                     seed: int = 0, workers: int = 1) -> tuple:
    """Mean and s.e. of P(at least k rejections in the target set | Z).

    ``target`` is ``"null"`` (true nulls, the FWER side) or ``"alt"`` (false
    nulls, the power side).  Returns ``(value, std_error)``.
    """
    lam = _factor_loadings(model)
    means = _as_means(means, model.n)
    mask = means.null_mask if target == "null" else ~means.null_mask
    size = int(np.count_nonzero(mask))
    if size == 0:
        raise DomainError(f"no {'true' if target == 'null' else 'false'} nulls to evaluate")
    if k > size:
        raise DomainError(f"k={k} exceeds the number of target hypotheses ({size})")
    cond = _Conditional(lam[mask], means.mu[mask], float(tau), two_sided)
    z = draw_factor(replicates, seed)
    if k == 1:
        rows = max(1, _CELLS // size)

        def fn(chunk):
            return -np.expm1(cond.log_stay(chunk))
    else:
        rows = max(1, 8 * _CELLS // size)

        def fn(chunk):
            return at_least_k(cond.exceed_prob(chunk), k)

    return summarize(_map_rows(fn, z, rows, workers))


def _map_rows(fn, z, rows, workers):
    # each row is evaluated independently, so chunking never changes a value
    chunks = [z[i:i + rows] for i in range(0, z.size, rows)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    return np.concatenate(parts)


def _meta(model, spec: ProcedureSpec, alpha, metric: Metric, means: MeanConfig,
          method: str) -> dict:
    return {
        "procedure": spec.family.value,
        "sided": spec.sided.value,
        "k": spec.k,
        "metric": metric.value,
        "n": model.n,
        "alpha": float(alpha),
        "lambda1": getattr(model, "lambda1", None),
        "delta": getattr(model, "delta", None),
        "model": model.kind,
        "model_summary": model.summary(),
        "means": means.summary(),
        "method": method,
        "p0": spec.p0,
    }


def fwer_conditional(model, spec: ProcedureSpec, alpha: float, means=None,
                     replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                     workers: int = 1) -> Estimate:
    means = _as_means(means, model.n)
    tau = procedures.cutoff(spec, model.n, alpha).value
    value, se = conditional_tail(model, tau, spec.two_sided, means, 1, "null",
                                 replicates, seed, workers)
    return Estimate(value, se, int(replicates), int(seed),
                    _meta(model, spec, alpha, Metric.FWER, means, "conditional"))


def kfwer_conditional(model, k: int, spec: ProcedureSpec, alpha: float, means=None,
                      replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                      workers: int = 1) -> Estimate:
    if spec.family is not Family.LEHMANN_ROMANO:
        raise DomainError("k-FWER estimation uses the Lehmann-Romano procedure")
    if spec.k != k:
        spec = ProcedureSpec(spec.family, spec.sided, k, spec.p0)
    means = _as_means(means, model.n)
    if k > means.n0:
        raise DomainError(f"k={k} exceeds the number of true nulls n0={means.n0}")
    tau = procedures.cutoff(spec, model.n, alpha).value
    value, se = conditional_tail(model, tau, spec.two_sided, means, k, "null",
                                 replicates, seed, workers)
    return Estimate(value, se, int(replicates), int(seed),
                    _meta(model, spec, alpha, Metric.KFWER, means, "conditional"))


def power_conditional(model, spec: ProcedureSpec, alpha: float, means,
                      replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                      workers: int = 1) -> Estimate:
    means = _as_means(means, model.n)
    if means.n1 == 0:
        raise DomainError("power needs at least one false null (n1 = 0)")
    tau = procedures.cutoff(spec, model.n, alpha).value
    value, se = conditional_tail(model, tau, spec.two_sided, means, 1, "alt",
                                 replicates, seed, workers)
    return Estimate(value, se, int(replicates), int(seed),
                    _meta(model, spec, alpha, Metric.POWER, means, "conditional"))


# ---------------------------------------------------------------------------
# brute-force oracle


def _bruteforce(model, spec, alpha, means, replicates, seed, workers, metric):
    means = _as_means(means, model.n)
    tau = procedures.cutoff(spec, model.n, alpha).value
    if metric is Metric.POWER:
        mask, k = ~means.null_mask, 1
        if not mask.any():
            raise DomainError("power needs at least one false null (n1 = 0)")
    else:
        mask, k = means.null_mask, spec.k
        if k > means.n0:
            raise DomainError(f"k={k} exceeds the number of true nulls n0={means.n0}")

    def fn(rng, count):
        x = depmodels.sample_many(model, means, rng, count)
        hits = procedures.exceeds(x[:, mask], tau, spec.two_sided)
        return (hits.sum(axis=1) >= k).astype(float)

    values = run_blocks(fn, replicates, seed, workers)
    value, se = summarize(values)
    return Estimate(value, se, int(replicates), int(seed),
                    _meta(model, spec, alpha, metric, means, "bruteforce"))


def fwer_bruteforce(model, spec: ProcedureSpec, alpha: float, means=None,
                    replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                    workers: int = 1) -> Estimate:
    """Full-vector simulation; with a Lehmann-Romano spec this is the k-FWER."""
    metric = Metric.KFWER if spec.k > 1 else Metric.FWER
    return _bruteforce(model, spec, alpha, means, replicates, seed, workers, metric)


def power_bruteforce(model, spec: ProcedureSpec, alpha: float, means,
                     replicates: int = DEFAULT_REPLICATES, seed: int = 0,
                     workers: int = 1) -> Estimate:
    return _bruteforce(model, spec, alpha, means, replicates, seed, workers, Metric.POWER)


def agree(a: Estimate, b: Estimate, z: float = 3.0) -> bool:
    return abs(a.value - b.value) <= z * math.hypot(a.std_error, b.std_error)


# ---------------------------------------------------------------------------
# extreme-value limit check


class KthMaxCheck(NamedTuple):
    empirical: float
    limit: float
    std_error: float
    threshold: float


def verify_kth_max_limit(model, d_n: int, tau: float, k: int = 1,
                         replicates: int = 5000, seed: int = 0,
                         two_sided: bool = False, workers: int = 1) -> KthMaxCheck:
    """Empirical P(k-th largest of the first d_n coordinates <= u_n) with
    d_n * cdf_bar(u_n) = tau, next to its Poisson limit."""
    if int(d_n) != d_n or d_n < 1:
        raise DomainError(f"d_n must be a positive integer, got {d_n!r}")
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau!r}")
    if tau / d_n >= 1.0:
        raise DomainError(f"tau / d_n = {tau / d_n!r} is not below 1")
    if not 1 <= k <= d_n:
        raise DomainError(f"k must lie in [1, d_n], got {k!r}")
    if model.n < d_n:
        raise DomainError(f"model has size {model.n} < d_n = {d_n}")
    if model.n > d_n:
        if isinstance(model, depmodels.Explicit):
            model = depmodels.Explicit(model.matrix[:d_n, :d_n])
        else:
            model = depmodels.ProductFactor(model.loadings()[:d_n])
    u = gauss.isf(tau / d_n)
    zero = np.zeros(d_n)

    def fn(rng, count):
        x = depmodels.sample_many(model, zero, rng, count)
        return (procedures.exceeds(x, u, two_sided).sum(axis=1) < k).astype(float)

    values = run_blocks(fn, replicates, seed, workers)
    value, se = summarize(values)
    return KthMaxCheck(value, asym.kth_max_limit(tau, k, two_sided), se, u)
