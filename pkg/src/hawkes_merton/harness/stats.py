"""Kolmogorov-Smirnov normality checks for the limit theorems."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import ndtr
from scipy.stats import kstwobign


def normal_cdf(x: ArrayLike):
    """Standard normal CDF (``scipy.special.ndtr``, accurate to double precision)."""
    return ndtr(np.asarray(x, dtype=np.float64))


def ks_statistic(sample: ArrayLike, cdf=normal_cdf) -> float:
    """Two-sided ``sup_x |F_n(x) - F(x)|``.

    The supremum is attained at a sample point, either just before or just
    after the jump of the empirical CDF.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64).reshape(-1))
    n = x.size
    if n == 0:
        raise ValueError("sample must be non-empty")
    F = cdf(x)
    k = np.arange(1, n + 1)
    return float(max(np.max(k / n - F), np.max(F - (k - 1) / n)))


def ks_critical_value(n: int, level: float) -> float:
    """Asymptotic critical value ``K_{1-level} / sqrt(n)`` of the KS statistic."""
    return float(kstwobign.isf(level)) / math.sqrt(n)


MEAN_BOUND = 0.15
VAR_RANGE = (0.8, 1.25)


@dataclass(frozen=True)
class NormalityReport:
    n: int
    ks: float
    critical_value: float
    level: float
    mean: float
    variance: float
    passed: bool  # KS test alone
    moments_ok: bool

    @property
    def ok(self) -> bool:
        return self.passed and self.moments_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def normality_check(statistics: ArrayLike, level: float = 0.01) -> NormalityReport:
    """KS test against N(0, 1) plus mean/variance sanity bounds.

    ``passed`` is the KS verdict; ``moments_ok`` requires ``|mean| < 0.15``
    and variance in ``[0.8, 1.25]``.
    """
    s = np.asarray(statistics, dtype=np.float64).reshape(-1)
    if s.size < 100:
        raise ValueError(f"need at least 100 statistics, got {s.size}")
    ks = ks_statistic(s)
    crit = ks_critical_value(s.size, level)
    mean = float(s.mean())
    var = float(s.var(ddof=1))
    moments_ok = abs(mean) < MEAN_BOUND and VAR_RANGE[0] <= var <= VAR_RANGE[1]
    return NormalityReport(int(s.size), ks, crit, level, mean, var, ks < crit, moments_ok)
