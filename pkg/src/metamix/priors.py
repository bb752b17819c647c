"""Prior distributions for the overall effect and the heterogeneity scale.

Heterogeneity priors live on [0, inf). PointMass is handled symbolically by the
engine and cannot be evaluated as a density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .errors import DomainError
from .numerics import SQRT_2PI, normal_cdf, normal_quantile


@dataclass(frozen=True)
class ImproperUniform:
    """Flat (improper) prior on the effect."""


@dataclass(frozen=True)
class Normal:
    """Conjugate normal prior on the effect."""

    mean: float
    sd: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sd) and self.sd > 0.0):
            raise DomainError("normal effect prior requires sd > 0")


EffectPrior = Union[ImproperUniform, Normal]


@dataclass(frozen=True)
class HalfNormal:
    scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DomainError("half-normal prior requires scale > 0")


@dataclass(frozen=True)
class HalfCauchy:
    scale: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise DomainError("half-Cauchy prior requires scale > 0")


@dataclass(frozen=True)
class Uniform:
    upper: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.upper) and self.upper > 0.0):
            raise DomainError("uniform prior requires upper > 0")


@dataclass(frozen=True)
class LogNormal:
    mu_log: float
    sd_log: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sd_log) and self.sd_log > 0.0):
            raise DomainError("log-normal prior requires sd_log > 0")


@dataclass(frozen=True)
class PointMass:
    value: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise DomainError("point-mass prior requires value >= 0")


HeterogeneityPrior = Union[HalfNormal, HalfCauchy, Uniform, LogNormal, PointMass]


def tau_prior_log_density(prior: HeterogeneityPrior, tau: float) -> float:
    """Log density of the heterogeneity prior; -inf outside the support."""
    if tau < 0.0:
        raise DomainError(f"heterogeneity is nonnegative, got tau={tau}")
    if isinstance(prior, HalfNormal):
        s = prior.scale
        return math.log(2.0 / (SQRT_2PI * s)) - 0.5 * (tau / s) ** 2
    if isinstance(prior, HalfCauchy):
        s = prior.scale
        return math.log(2.0 * s / math.pi) - math.log(s * s + tau * tau)
    if isinstance(prior, Uniform):
        return -math.log(prior.upper) if tau <= prior.upper else -math.inf
    if isinstance(prior, LogNormal):
        if tau == 0.0:
            return -math.inf
        z = (math.log(tau) - prior.mu_log) / prior.sd_log
        return -math.log(tau * prior.sd_log * SQRT_2PI) - 0.5 * z * z
    raise DomainError("point-mass prior has no density")


def tau_prior_density(prior: HeterogeneityPrior, tau: float) -> float:
    """Density of the heterogeneity prior at tau >= 0."""
    logd = tau_prior_log_density(prior, tau)
    return math.exp(logd) if logd > -math.inf else 0.0


def tau_prior_cdf(prior: HeterogeneityPrior, tau: float) -> float:
    if tau < 0.0:
        raise DomainError(f"heterogeneity is nonnegative, got tau={tau}")
    if isinstance(prior, HalfNormal):
        return 2.0 * normal_cdf(tau / prior.scale) - 1.0
    if isinstance(prior, HalfCauchy):
        return 2.0 / math.pi * math.atan(tau / prior.scale)
    if isinstance(prior, Uniform):
        return min(tau / prior.upper, 1.0)
    if isinstance(prior, LogNormal):
        if tau == 0.0:
            return 0.0
        return normal_cdf((math.log(tau) - prior.mu_log) / prior.sd_log)
    raise DomainError("point-mass prior has no continuous CDF")


def tau_prior_quantile(prior: HeterogeneityPrior, q: float) -> float:
    """Quantile of the heterogeneity prior. PointMass returns its value for all q."""
    if isinstance(prior, PointMass):
        return prior.value
    if not 0.0 < q < 1.0:
        raise DomainError(f"tau_prior_quantile requires 0 < q < 1, got {q}")
    if isinstance(prior, HalfNormal):
        return prior.scale * normal_quantile(0.5 * (1.0 + q))
    if isinstance(prior, HalfCauchy):
        return prior.scale * math.tan(0.5 * math.pi * q)
    if isinstance(prior, Uniform):
        return prior.upper * q
    return math.exp(prior.mu_log + prior.sd_log * normal_quantile(q))
