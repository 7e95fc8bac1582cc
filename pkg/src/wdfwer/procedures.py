"""Single-step cutoffs and rejection rules.

Three cutoff families are supported, each one- or two-sided:

* adjusted Bonferroni, ``isf(-log(1 - alpha) / m)``
* Sidak, ``isf(1 - (1 - alpha) ** (1 / m))``
* Lehmann-Romano, ``isf(k * alpha / m)``

where ``m = n * p0`` (one-sided) or ``2 * n * p0`` (two-sided).  Statistics
are z-scores; a hypothesis is rejected only on strict exceedance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import gauss
from .errors import DomainError, InfeasibleCutoffError


class Family(str, enum.Enum):
    BONFERRONI = "bonferroni"
    SIDAK = "sidak"
    LEHMANN_ROMANO = "lr"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        aliases = {
            "bonferroni": cls.BONFERRONI, "bon": cls.BONFERRONI,
            "adjbonferroni": cls.BONFERRONI, "adj-bonferroni": cls.BONFERRONI,
            "sidak": cls.SIDAK, "sid": cls.SIDAK,
            "lr": cls.LEHMANN_ROMANO, "lehmann-romano": cls.LEHMANN_ROMANO,
            "lehmannromano": cls.LEHMANN_ROMANO,
        }
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise DomainError(f"unknown procedure {value!r}") from None


class Sided(str, enum.Enum):
    ONE = "one"
    TWO = "two"

    @classmethod
    def parse(cls, value) -> "Sided":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"sided must be 'one' or 'two', got {value!r}") from None


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


@dataclass(frozen=True)
class ProcedureSpec:
    family: Family
    sided: Sided = Sided.ONE
    k: int = 1
    p0: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "sided", Sided.parse(self.sided))
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if self.k != 1 and self.family is not Family.LEHMANN_ROMANO:
            raise DomainError("k is only meaningful for the Lehmann-Romano procedure")
        if self.p0 is not None and not 0.0 < self.p0 <= 1.0:
            raise DomainError(f"p0 must lie in (0, 1], got {self.p0!r}")

    @property
    def two_sided(self) -> bool:
        return self.sided is Sided.TWO

    def label(self) -> str:
        return self.family.value


@dataclass(frozen=True)
class Cutoff:
    value: float
    spec: ProcedureSpec
    n: int
    alpha: float


@dataclass(frozen=True)
class RejectionSet:
    """Rejected hypotheses as 0-based positions into the statistics vector."""

    indices: np.ndarray
    cutoff: Cutoff

    def __len__(self):
        return len(self.indices)

    def __contains__(self, i):
        return bool(np.any(self.indices == i))

    def issubset(self, other: "RejectionSet") -> bool:
        return set(self.indices.tolist()) <= set(other.indices.tolist())


def _effective_count(spec: ProcedureSpec, n: int) -> float:
    m = n * (1.0 if spec.p0 is None else spec.p0)
    if m < 1.0:
        raise DomainError(f"n * p0 must be at least 1, got {m!r}")
    return 2.0 * m if spec.two_sided else m


def tail_level(spec: ProcedureSpec, n: int, alpha: float) -> float:
    """Per-hypothesis upper-tail probability ``cdf_bar(cutoff)``."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    alpha = check_alpha(alpha)
    m = _effective_count(spec, int(n))
    if spec.family is Family.BONFERRONI:
        return -math.log1p(-alpha) / m
    if spec.family is Family.SIDAK:
        return -math.expm1(math.log1p(-alpha) / m)
    if spec.k > n:
        raise InfeasibleCutoffError(f"k={spec.k} exceeds the number of hypotheses n={n}")
    level = spec.k * alpha / m
    if level >= 1.0:
        raise InfeasibleCutoffError(f"k * alpha / m = {level!r} is not below 1")
    return level


def cutoff(spec: ProcedureSpec, n: int, alpha: float) -> Cutoff:
    q = tail_level(spec, n, alpha)
    if q >= 1.0:
        raise InfeasibleCutoffError(f"tail level {q!r} is not below 1")
    return Cutoff(value=gauss.isf(q), spec=spec, n=int(n), alpha=float(alpha))


def apply(spec: ProcedureSpec, alpha: float, statistics) -> RejectionSet:
    x = np.asarray(statistics, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("statistics must be a non-empty vector")
    if not np.all(np.isfinite(x)):
        raise DomainError("statistics must be finite")
    c = cutoff(spec, x.size, alpha)
    return RejectionSet(indices=np.flatnonzero(exceeds(x, c.value, spec.two_sided)),
                        cutoff=c)


def exceeds(x, value: float, two_sided: bool) -> np.ndarray:
    """Elementwise rejection indicator for a common cutoff."""
    return np.abs(x) > value if two_sided else x > value


def cutoff_gap(n: int, alpha: float) -> float:
    """Sidak cutoff minus adjusted-Bonferroni cutoff (one-sided)."""
    sid = cutoff(ProcedureSpec(Family.SIDAK), n, alpha).value
    bon = cutoff(ProcedureSpec(Family.BONFERRONI), n, alpha).value
    return sid - bon
