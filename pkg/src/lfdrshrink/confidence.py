"""Per-feature confidence posterior for a normal mean from paired differences.

A feature's replicate differences reduce to a one-sample t summary; the
induced distribution over the mean is the location-scale t with center at
the sample mean, scale equal to the standard error, and n - 1 degrees of
freedom. Its CDF acts as a significance function: a CDF in theta for fixed
data, uniformly distributed at the true theta across repeated samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DomainError
from .numerics import student_t_cdf, student_t_quantile

__all__ = [
    "PairedSample",
    "TSummary",
    "ConditionalPosterior",
    "summarize",
    "conditional_posterior",
    "conditional_cdf",
    "conditional_quantile",
    "conditional_interval",
]


@dataclass(frozen=True)
class PairedSample:
    """Replicate treatment-minus-control differences for one feature."""

    diffs: tuple[float, ...]
    feature_id: str = ""

    def __init__(self, diffs, feature_id: str = ""):
        object.__setattr__(self, "diffs", tuple(float(d) for d in diffs))
        object.__setattr__(self, "feature_id", str(feature_id))


@dataclass(frozen=True)
class TSummary:
    """Sufficient statistics of a paired sample for t-based inference."""

    mean: float
    sd: float
    n: int
    se: float
    t: float
    df: float


@dataclass(frozen=True)
class ConditionalPosterior:
    """Location-scale t distribution over the mean, given the data."""

    center: float
    scale: float
    df: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise DomainError("ConditionalPosterior requires scale > 0")
        if not self.df > 0.0:
            raise DomainError("ConditionalPosterior requires df > 0")


def summarize(sample: PairedSample) -> TSummary:
    """Reduce one feature's differences to its t summary.

    Raises DataError for fewer than two replicates, non-finite values, or
    a zero-variance (degenerate) sample.
    """
    diffs = np.asarray(sample.diffs, dtype=np.float64)
    label = f" (feature {sample.feature_id!r})" if sample.feature_id else ""
    if diffs.ndim != 1 or diffs.size < 2:
        raise DataError(f"need at least 2 replicate differences{label}")
    if not np.all(np.isfinite(diffs)):
        raise DataError(f"non-finite replicate difference{label}")
    n = int(diffs.size)
    mean = float(np.mean(diffs))
    sd = float(np.std(diffs, ddof=1))
    if sd == 0.0:
        raise DataError(f"replicate differences are all equal{label}")
    se = sd / math.sqrt(n)
    return TSummary(mean=mean, sd=sd, n=n, se=se, t=mean / se, df=float(n - 1))


def conditional_posterior(summary: TSummary) -> ConditionalPosterior:
    """The confidence posterior determined by a t summary."""
    return ConditionalPosterior(center=summary.mean, scale=summary.se, df=summary.df)


def conditional_cdf(cp: ConditionalPosterior, theta):
    """P(mean <= theta | data); strictly increasing in theta."""
    return student_t_cdf((np.asarray(theta, dtype=np.float64) - cp.center) / cp.scale, cp.df)


def conditional_quantile(cp: ConditionalPosterior, p):
    """Inverse of conditional_cdf; requires 0 < p < 1."""
    return cp.center + cp.scale * student_t_quantile(p, cp.df)


def conditional_interval(
    cp: ConditionalPosterior, alpha1: float, alpha2: float
) -> tuple[float, float]:
    """Central-coverage interval [q(alpha1), q(1 - alpha2)]."""
    if not (0.0 < alpha1 < 1.0 and 0.0 < alpha2 < 1.0):
        raise DomainError("conditional_interval requires alpha1, alpha2 in (0, 1)")
    if not alpha1 + alpha2 < 1.0:
        raise DomainError("conditional_interval requires alpha1 + alpha2 < 1")
    return (
        conditional_quantile(cp, alpha1),
        conditional_quantile(cp, 1.0 - alpha2),
    )
