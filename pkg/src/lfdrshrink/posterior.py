"""Marginal confidence posterior: a null-value atom mixed with the
conditional t posterior, weighted by the feature's local false discovery
rate. Shrunken quantiles, intervals, medians, and observed confidence
levels all derive from inverting its CDF.

The quantile uses the generalized-inverse convention
inf{theta : cdf(theta) >= alpha}, which the closed three-case form below
matches exactly: the lower branch applies when the rescaled lower
probability inverts strictly below the null value, the upper branch when
the rescaled upper probability inverts strictly above it, and the atom
absorbs everything in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .confidence import (
    ConditionalPosterior,
    conditional_cdf,
    conditional_quantile,
)
from .errors import DomainError
from .numerics import student_t_quantile

__all__ = [
    "MarginalPosterior",
    "ShrunkenInterval",
    "ObservedConfidenceLevels",
    "marginal_cdf",
    "marginal_quantile",
    "marginal_quantile_batch",
    "shrunken_interval",
    "posterior_median",
    "posterior_mean",
    "observed_confidence_levels",
]


@dataclass(frozen=True)
class MarginalPosterior:
    """Atom-plus-continuous mixture for one feature."""

    lfdr: float
    theta0: float
    conditional: ConditionalPosterior

    def __post_init__(self):
        if not 0.0 <= self.lfdr <= 1.0:
            raise DomainError("MarginalPosterior requires lfdr in [0, 1]")


@dataclass(frozen=True)
class ShrunkenInterval:
    level: float
    lower: float
    upper: float
    degenerate: bool


@dataclass(frozen=True)
class ObservedConfidenceLevels:
    """Posterior probabilities below, at, and above the null value."""

    below: float
    at_null: float
    above: float


def marginal_cdf(mp: MarginalPosterior, theta):
    """Right-continuous mixture CDF with a jump of height lfdr at theta0."""
    theta_arr = np.asarray(theta, dtype=np.float64)
    atom = np.where(theta_arr >= mp.theta0, mp.lfdr, 0.0)
    out = atom + (1.0 - mp.lfdr) * conditional_cdf(mp.conditional, theta_arr)
    return float(out) if np.ndim(theta) == 0 else out


def marginal_quantile(mp: MarginalPosterior, alpha: float) -> float:
    """Generalized inverse of the marginal CDF at alpha in (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("marginal_quantile requires 0 < alpha < 1")
    lf = mp.lfdr
    if lf >= 1.0:
        return mp.theta0
    keep = 1.0 - lf
    p_low = alpha / keep
    if p_low < 1.0:
        candidate = conditional_quantile(mp.conditional, p_low)
        if candidate < mp.theta0:
            return candidate
    p_high = 1.0 - (1.0 - alpha) / keep
    if p_high > 0.0:
        candidate = conditional_quantile(mp.conditional, p_high)
        if candidate > mp.theta0:
            return candidate
    return mp.theta0


def marginal_quantile_batch(
    lfdr,
    center,
    scale,
    df: float,
    theta0: float,
    alpha: float,
) -> np.ndarray:
    """Vectorized marginal_quantile over features sharing df and theta0.

    Matches the scalar function elementwise; used by the batch analysis
    paths where thousands of features share one experiment.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("marginal_quantile_batch requires 0 < alpha < 1")
    lf, center, scale = np.broadcast_arrays(
        np.asarray(lfdr, dtype=np.float64),
        np.asarray(center, dtype=np.float64),
        np.asarray(scale, dtype=np.float64),
    )
    out = np.full(lf.shape, float(theta0))
    keep = 1.0 - lf

    with np.errstate(divide="ignore", over="ignore"):
        p_low = np.where(keep > 0.0, alpha / keep, np.inf)
        p_high = np.where(keep > 0.0, 1.0 - (1.0 - alpha) / keep, -np.inf)

    low_mask = p_low < 1.0
    if np.any(low_mask):
        cand = center[low_mask] + scale[low_mask] * student_t_quantile(
            p_low[low_mask], df
        )
        take = cand < theta0
        idx = np.flatnonzero(low_mask)[take]
        out[idx] = cand[take]

    high_mask = p_high > 0.0
    if np.any(high_mask):
        cand = center[high_mask] + scale[high_mask] * student_t_quantile(
            p_high[high_mask], df
        )
        take = cand > theta0
        idx = np.flatnonzero(high_mask)[take]
        out[idx] = cand[take]
    return out


def shrunken_interval(
    mp: MarginalPosterior, alpha1: float, alpha2: float
) -> ShrunkenInterval:
    """Interval [q(alpha1), q(1 - alpha2)] of the marginal posterior."""
    if not (0.0 < alpha1 < 1.0 and 0.0 < alpha2 < 1.0):
        raise DomainError("shrunken_interval requires alpha1, alpha2 in (0, 1)")
    if not alpha1 + alpha2 < 1.0:
        raise DomainError("shrunken_interval requires alpha1 + alpha2 < 1")
    lower = marginal_quantile(mp, alpha1)
    upper = marginal_quantile(mp, 1.0 - alpha2)
    return ShrunkenInterval(
        level=1.0 - alpha1 - alpha2,
        lower=lower,
        upper=upper,
        degenerate=(lower == mp.theta0 and upper == mp.theta0),
    )


def posterior_median(mp: MarginalPosterior) -> float:
    """Shrunken point estimate: the 50% quantile of the mixture."""
    return marginal_quantile(mp, 0.5)


def posterior_mean(mp: MarginalPosterior) -> float:
    """Mixture mean; undefined (DomainError) when df <= 1."""
    if not mp.conditional.df > 1.0:
        raise DomainError("posterior mean requires df > 1 (heavy-tailed otherwise)")
    return mp.lfdr * mp.theta0 + (1.0 - mp.lfdr) * mp.conditional.center


def observed_confidence_levels(mp: MarginalPosterior) -> ObservedConfidenceLevels:
    """Posterior probabilities that the mean is below/at/above theta0."""
    f_at_null = conditional_cdf(mp.conditional, mp.theta0)
    keep = 1.0 - mp.lfdr
    return ObservedConfidenceLevels(
        below=keep * f_at_null,
        at_null=mp.lfdr,
        above=keep * (1.0 - f_at_null),
    )
