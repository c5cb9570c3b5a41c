"""Empirical latency-tail statistics.

The headline figure of a run is the outage latency: the value exceeded only
with a small target probability (e.g. 1e-3).  It is read off the empirical
CCDF as an order statistic, with a binomial confidence interval from the
order-statistic sampling distribution, and a warning when the tail beyond
the target holds fewer than 100 samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

MIN_TAIL_SUPPORT = 100


def ccdf(samples) -> tuple[np.ndarray, np.ndarray]:
    """Empirical exceedance function: returns (sorted values, P(X > value))."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    exceed = (n - np.arange(1, n + 1)) / n
    return x, exceed


def exceedance_at(samples, threshold: float) -> float:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    return float(np.count_nonzero(x > threshold)) / x.size


@dataclass(frozen=True)
class OutageEstimate:
    """Order-statistic estimate of the latency exceeded with probability q."""

    probability: float
    value_ms: float
    ci_low_ms: float
    ci_high_ms: float
    n_samples: int
    tail_count: int
    insufficient_support: bool

    @property
    def half_width_ms(self) -> float:
        return 0.5 * (self.ci_high_ms - self.ci_low_ms)


def outage_latency(samples, q: float, confidence: float = 0.95) -> OutageEstimate:
    """Latency exceeded with probability ``q``, with a binomial CI on the rank."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("no samples for quantile extraction")
    rank = min(n, max(1, math.ceil(n * (1.0 - q))))
    value = float(x[rank - 1])
    alpha = 1.0 - confidence
    lo_rank = int(binom.ppf(alpha / 2.0, n, 1.0 - q))
    hi_rank = int(binom.ppf(1.0 - alpha / 2.0, n, 1.0 - q)) + 1
    lo_rank = min(n, max(1, lo_rank))
    hi_rank = min(n, max(1, hi_rank))
    insufficient = n * q < MIN_TAIL_SUPPORT
    if insufficient:
        warnings.warn(
            f"tail support n*q = {n * q:.1f} < {MIN_TAIL_SUPPORT}; "
            f"the {q:g} outage estimate is unstable", stacklevel=2)
    return OutageEstimate(probability=q, value_ms=value,
                          ci_low_ms=float(x[lo_rank - 1]), ci_high_ms=float(x[hi_rank - 1]),
                          n_samples=n, tail_count=n - rank,
                          insufficient_support=insufficient)


def confidently_below(a: OutageEstimate, b: OutageEstimate) -> bool:
    """True when a's outage sits below b's by more than either CI half-width."""
    margin = b.value_ms - a.value_ms
    return margin > max(a.half_width_ms, b.half_width_ms)


def ccdf_table(samples, max_rows: int = 4000) -> tuple[np.ndarray, np.ndarray]:
    """CCDF downsampled for output: coarse body, full resolution deep tail."""
    x, exceed = ccdf(samples)
    n = x.size
    if n <= max_rows:
        return x, exceed
    tail_keep = max_rows // 2
    body = np.unique(np.linspace(0, n - tail_keep - 1, max_rows - tail_keep).astype(int))
    idx = np.concatenate([body, np.arange(n - tail_keep, n)])
    return x[idx], exceed[idx]
