"""Frequentist meta-analysis counterparts: common-effect pooling, DerSimonian-Laird
and REML heterogeneity estimates, Q-profile intervals for tau, and normal or
Hartung-Knapp-Sidik-Jonkman effect intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .data import Dataset
from .errors import DataError, DomainError
from .numerics import (
    Interval,
    chisq_quantile,
    find_root,
    minimize_scalar,
    normal_quantile,
    student_t_quantile,
)

REML_TOL = 1e-8


@dataclass(frozen=True)
class FrequentistResult:
    method: str
    mu_hat: float
    se_mu: float
    interval: Interval
    level: float
    tau_hat: float
    tau_interval: Interval
    q_statistic: float
    degenerate: bool = False


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must be in (0, 1), got {level}")


def _require_k(dataset: Dataset, minimum: int, what: str) -> None:
    if dataset.k < minimum:
        raise DataError(f"{what} needs at least {minimum} studies, got k={dataset.k}")


def _pooled(dataset: Dataset, tau: float) -> tuple[float, float]:
    # inverse-variance pooling with weights 1/(sigma_i^2 + tau^2)
    t2 = tau * tau
    sw = 0.0
    swy = 0.0
    for s in dataset.studies:
        w = 1.0 / (s.sigma * s.sigma + t2)
        sw += w
        swy += w * s.y
    return swy / sw, 1.0 / math.sqrt(sw)


def q_statistic(dataset: Dataset, tau: float = 0.0) -> float:
    """Generalized heterogeneity statistic Q(tau)."""
    _require_k(dataset, 2, "q_statistic")
    if tau < 0.0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    t2 = tau * tau
    mu_hat, _ = _pooled(dataset, tau)
    return sum((s.y - mu_hat) ** 2 / (s.sigma * s.sigma + t2) for s in dataset.studies)


def common_effect(dataset: Dataset, level: float = 0.95) -> FrequentistResult:
    """Fixed-effect inverse-variance pooling (the tau = 0 analysis)."""
    _check_level(level)
    mu_hat, se = _pooled(dataset, 0.0)
    z = normal_quantile(0.5 * (1.0 + level))
    q = q_statistic(dataset, 0.0) if dataset.k >= 2 else 0.0
    return FrequentistResult(
        method="common", mu_hat=mu_hat, se_mu=se,
        interval=Interval(mu_hat - z * se, mu_hat + z * se), level=level,
        tau_hat=0.0, tau_interval=Interval(0.0, 0.0), q_statistic=q)


def dl_tau(dataset: Dataset) -> float:
    """DerSimonian-Laird moment estimate of tau, truncated at zero."""
    _require_k(dataset, 2, "dl_tau")
    q = q_statistic(dataset, 0.0)
    s1 = sum(1.0 / s.sigma ** 2 for s in dataset.studies)
    s2 = sum(1.0 / s.sigma ** 4 for s in dataset.studies)
    tau2 = (q - (dataset.k - 1)) / (s1 - s2 / s1)
    return math.sqrt(tau2) if tau2 > 0.0 else 0.0


def _restricted_loglik(dataset: Dataset, tau: float) -> float:
    t2 = tau * tau
    mu_hat, _ = _pooled(dataset, tau)
    sum_log = 0.0
    sw = 0.0
    q = 0.0
    for s in dataset.studies:
        v = s.sigma * s.sigma + t2
        sum_log += math.log(v)
        sw += 1.0 / v
        q += (s.y - mu_hat) ** 2 / v
    return -0.5 * (sum_log + math.log(sw) + q)


def reml_tau(dataset: Dataset, tol: float = REML_TOL) -> float:
    """Restricted maximum-likelihood estimate of tau (0 at the boundary)."""
    _require_k(dataset, 2, "reml_tau")
    ys = dataset.ys
    tau_hi = 10.0 * (max(dataset.sigmas) + (max(ys) - min(ys))) + 1.0
    tau_star = minimize_scalar(lambda t: -_restricted_loglik(dataset, t),
                               Interval(0.0, tau_hi), tol=tol)
    if _restricted_loglik(dataset, 0.0) >= _restricted_loglik(dataset, tau_star):
        return 0.0
    return tau_star


def _tau_estimate(dataset: Dataset, tau_method: str) -> float:
    if tau_method == "dl":
        return dl_tau(dataset)
    if tau_method == "reml":
        return reml_tau(dataset)
    raise DomainError(f"unknown tau estimator {tau_method!r}")


def random_effects_normal(dataset: Dataset, tau_method: str = "dl",
                          level: float = 0.95) -> FrequentistResult:
    """Random-effects pooling with a normal-approximation confidence interval.

    With an estimated tau of zero this reduces exactly to common_effect.
    """
    _check_level(level)
    _require_k(dataset, 2, "random_effects_normal")
    tau_hat = _tau_estimate(dataset, tau_method)
    mu_hat, se = _pooled(dataset, tau_hat)
    z = normal_quantile(0.5 * (1.0 + level))
    return FrequentistResult(
        method=tau_method, mu_hat=mu_hat, se_mu=se,
        interval=Interval(mu_hat - z * se, mu_hat + z * se), level=level,
        tau_hat=tau_hat, tau_interval=q_profile_interval(dataset, level),
        q_statistic=q_statistic(dataset, 0.0))


def hksj_interval(dataset: Dataset, tau_method: str = "dl", level: float = 0.95,
                  modified: bool = False) -> FrequentistResult:
    """Hartung-Knapp-Sidik-Jonkman interval: Student-t quantile, rescaled variance.

    The point estimate matches random_effects_normal for the same tau estimator.
    With modified=True the variance ratio q is floored at 1. Homogeneous data
    give q = 0 and a zero-width interval, flagged as degenerate.
    """
    _check_level(level)
    _require_k(dataset, 2, "hksj_interval")
    tau_hat = _tau_estimate(dataset, tau_method)
    t2 = tau_hat * tau_hat
    mu_hat, _ = _pooled(dataset, tau_hat)
    sw = sum(1.0 / (s.sigma ** 2 + t2) for s in dataset.studies)
    q = sum((s.y - mu_hat) ** 2 / (s.sigma ** 2 + t2) for s in dataset.studies) / (dataset.k - 1)
    if modified:
        q = max(q, 1.0)
    se = math.sqrt(q / sw)
    degenerate = se == 0.0
    t_crit = student_t_quantile(0.5 * (1.0 + level), dataset.k - 1)
    return FrequentistResult(
        method="hksj", mu_hat=mu_hat, se_mu=se,
        interval=Interval(mu_hat - t_crit * se, mu_hat + t_crit * se), level=level,
        tau_hat=tau_hat, tau_interval=q_profile_interval(dataset, level),
        q_statistic=q_statistic(dataset, 0.0), degenerate=degenerate)


def q_profile_interval(dataset: Dataset, level: float = 0.95) -> Interval:
    """Confidence interval for tau by profiling Q(tau) against chi-squared quantiles.

    Q is non-increasing in tau, so each bound is a unique root; bounds with no
    solution (Q(0) already below the target) are set to zero.
    """
    _check_level(level)
    _require_k(dataset, 2, "q_profile_interval")
    dof = dataset.k - 1
    q0 = q_statistic(dataset, 0.0)

    def bound(target: float) -> float:
        if q0 <= target:
            return 0.0
        hi = max(dataset.sigmas) + (max(dataset.ys) - min(dataset.ys)) + 1.0
        while q_statistic(dataset, hi) > target:
            hi *= 4.0
        return find_root(lambda t: q_statistic(dataset, t) - target,
                         Interval(0.0, hi), tol=1e-10)

    lower = bound(chisq_quantile(0.5 * (1.0 + level), dof))
    upper = bound(chisq_quantile(0.5 * (1.0 - level), dof))
    return Interval(lower, upper)
