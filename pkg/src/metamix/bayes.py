"""Exact Bayesian inference for the normal-normal hierarchical model.

The heterogeneity posterior is tabulated on an adaptively refined grid; the
marginal effect posterior is then an explicit weighted mixture of the
conditional normal posteriors at the grid nodes. Refinement continues until
adjacent conditional components are nearly indistinguishable (symmetrized KL)
and no grid cell carries more than a small share of the posterior mass, which
makes "exact up to a stated discretization tolerance" a checkable contract.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from .data import Dataset
from .errors import ConvergenceError, DomainError
from .numerics import (
    Interval,
    find_root,
    integrate,
    minimize_scalar,
    normal_cdf,
    normal_pdf,
    normal_quantile,
)
from .priors import (
    EffectPrior,
    HeterogeneityPrior,
    ImproperUniform,
    Normal,
    PointMass,
    Uniform,
    tau_prior_log_density,
    tau_prior_quantile,
)

KL_REFINE_TOL = 1e-3       # symmetrized KL between adjacent conditional components
MASS_REFINE_TOL = 0.01     # max posterior-mass share of one grid cell
MAX_GRID_NODES = 10_000
NORMALIZATION_REL_TOL = 1e-8
WEIGHT_PRUNE_TOL = 1e-12
QUANTILE_X_TOL = 1e-9
SHORTEST_ALPHA_TOL = 1e-6
TAIL_PROB = 1e-7           # prior tail excluded from the grid domain


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    mean: float
    sd: float


@dataclass(frozen=True)
class NormalMixture:
    """Weighted mixture of normal distributions; weights sum to one."""

    components: tuple[MixtureComponent, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise DomainError("mixture needs at least one component")
        total = 0.0
        for c in self.components:
            if not (c.weight > 0.0 and math.isfinite(c.mean) and c.sd > 0.0):
                raise DomainError(f"bad mixture component {c}")
            total += c.weight
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"mixture weights sum to {total}, expected 1")


@dataclass(frozen=True)
class TauPosterior:
    """Normalized heterogeneity posterior tabulated on an increasing grid.

    log densities are stored shifted so that their maximum is 0; the density is
    exp(log_density) / normalization_constant. A single-node grid represents a
    point-mass (degenerate) posterior.
    """

    grid: tuple[tuple[float, float], ...]
    normalization_constant: float
    log_density_fn: Optional[Callable[[float], float]] = field(
        default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        taus = [t for t, _ in self.grid]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise DomainError("tau grid must be strictly increasing")
        if not self.normalization_constant > 0.0:
            raise DomainError("normalization constant must be positive")

    @property
    def is_degenerate(self) -> bool:
        return len(self.grid) == 1

    def log_density_at(self, tau: float) -> float:
        """Shifted unnormalized log density, interpolated if no callable is attached."""
        if self.log_density_fn is not None:
            return self.log_density_fn(tau)
        taus = [t for t, _ in self.grid]
        logs = [ld for _, ld in self.grid]
        if not taus[0] <= tau <= taus[-1]:
            return -math.inf
        i = bisect.bisect_right(taus, tau) - 1
        if i >= len(taus) - 1:
            return logs[-1]
        frac = (tau - taus[i]) / (taus[i + 1] - taus[i])
        lo, hi = logs[i], logs[i + 1]
        if lo == -math.inf or hi == -math.inf:
            return -math.inf
        return lo + frac * (hi - lo)


@dataclass(frozen=True)
class PosteriorSummary:
    mean: float
    sd: float
    median: float
    interval: Interval
    level: float
    interval_kind: str


def conditional_mu_moments(dataset: Dataset, tau: float,
                           effect_prior: EffectPrior = ImproperUniform()) -> tuple[float, float]:
    """Mean and variance of the effect posterior conditional on tau.

    Inverse-variance weights 1/(sigma_i^2 + tau^2); a normal effect prior
    enters as one extra pseudo-study at its own mean and sd.
    """
    t2 = tau * tau
    sw = 0.0
    swy = 0.0
    for s in dataset.studies:
        w = 1.0 / (s.sigma * s.sigma + t2)
        sw += w
        swy += w * s.y
    if isinstance(effect_prior, Normal):
        w0 = 1.0 / (effect_prior.sd * effect_prior.sd)
        sw += w0
        swy += w0 * effect_prior.mean
    return swy / sw, 1.0 / sw


def log_marginal_likelihood(dataset: Dataset, tau: float,
                            effect_prior: EffectPrior = ImproperUniform()) -> float:
    """log p(data | tau) with the effect integrated out, up to a constant."""
    t2 = tau * tau
    mu_hat, _ = conditional_mu_moments(dataset, tau, effect_prior)
    sum_log = 0.0
    sw = 0.0
    q = 0.0
    for s in dataset.studies:
        v = s.sigma * s.sigma + t2
        w = 1.0 / v
        sum_log += math.log(v)
        sw += w
        q += w * (s.y - mu_hat) ** 2
    if isinstance(effect_prior, Normal):
        w0 = 1.0 / (effect_prior.sd * effect_prior.sd)
        sw += w0
        q += w0 * (effect_prior.mean - mu_hat) ** 2
    return -0.5 * (sum_log + math.log(sw) + q)


def tau_log_marginal_posterior(dataset: Dataset, tau_prior: HeterogeneityPrior,
                               effect_prior: EffectPrior, tau: float) -> float:
    """Unnormalized log posterior of the heterogeneity scale."""
    if isinstance(tau_prior, PointMass):
        raise DomainError("point-mass heterogeneity prior has no marginal posterior")
    log_prior = tau_prior_log_density(tau_prior, tau)
    if log_prior == -math.inf:
        return -math.inf
    return log_prior + log_marginal_likelihood(dataset, tau, effect_prior)


def _sym_kl(m1: float, v1: float, m2: float, v2: float) -> float:
    dm2 = (m1 - m2) ** 2
    return 0.5 * (v1 / v2 + v2 / v1) - 1.0 + 0.5 * dm2 * (1.0 / v1 + 1.0 / v2)


def build_tau_posterior(dataset: Dataset, tau_prior: HeterogeneityPrior,
                        effect_prior: EffectPrior = ImproperUniform(), *,
                        kl_tol: float = KL_REFINE_TOL, mass_tol: float = MASS_REFINE_TOL,
                        max_nodes: int = MAX_GRID_NODES) -> TauPosterior:
    """Tabulate the heterogeneity posterior on an adaptively refined grid.

    The grid spans [0, tau_max] with tau_max covering both the prior tail
    (quantile 1 - 1e-7) and the data scale (10 times max sigma plus the sample
    range of the estimates), truncated to the prior's support. Cells are bisected
    until adjacent conditional components differ by at most kl_tol in symmetrized
    KL and no cell holds more than mass_tol of the posterior mass.
    """
    if isinstance(tau_prior, PointMass):
        return TauPosterior(grid=((tau_prior.value, 0.0),), normalization_constant=1.0)

    ys = dataset.ys
    sigmas = dataset.sigmas
    spread = max(ys) - min(ys)
    tau_max = max(tau_prior_quantile(tau_prior, 1.0 - TAIL_PROB),
                  10.0 * (max(sigmas) + spread))
    if isinstance(tau_prior, Uniform):
        # the posterior has no support beyond the prior bound
        tau_max = min(tau_max, tau_prior.upper)

    def raw_log_post(t: float) -> float:
        return tau_log_marginal_posterior(dataset, tau_prior, effect_prior, t)

    taus = {0.0, tau_max}
    for q in (1e-6, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75,
              0.9, 0.95, 0.99, 0.999, 0.9999, 1.0 - 1e-6):
        t = tau_prior_quantile(tau_prior, q)
        if 0.0 < t < tau_max:
            taus.add(t)

    def make_node(t: float) -> tuple[float, float, float, float]:
        mean, var = conditional_mu_moments(dataset, t, effect_prior)
        return (t, raw_log_post(t), mean, var)

    nodes = [make_node(t) for t in sorted(taus)]
    while True:
        peak = max(ld for _, ld, _, _ in nodes)
        if peak == -math.inf:
            raise ConvergenceError("tau posterior vanished on the whole grid")
        dens = [math.exp(ld - peak) if ld > -math.inf else 0.0 for _, ld, _, _ in nodes]
        masses = [0.5 * (dens[i] + dens[i + 1]) * (nodes[i + 1][0] - nodes[i][0])
                  for i in range(len(nodes) - 1)]
        total = sum(masses)
        inserts = []
        for i in range(len(nodes) - 1):
            t0, _, m0, v0 = nodes[i]
            t1, _, m1, v1 = nodes[i + 1]
            if _sym_kl(m0, v0, m1, v1) > kl_tol or masses[i] > mass_tol * total:
                inserts.append((i, 0.5 * (t0 + t1)))
        if not inserts:
            break
        if len(nodes) + len(inserts) > max_nodes:
            raise ConvergenceError(
                f"tau grid refinement exceeded {max_nodes} nodes")
        for offset, (i, t) in enumerate(inserts):
            nodes.insert(i + 1 + offset, make_node(t))

    peak = max(ld for _, ld, _, _ in nodes)

    def shifted_log_post(t: float) -> float:
        return raw_log_post(t) - peak

    def shifted_density(t: float) -> float:
        ld = shifted_log_post(t)
        return math.exp(ld) if ld > -math.inf else 0.0

    z = 0.0
    for i in range(len(nodes) - 1):
        z += integrate(shifted_density, Interval(nodes[i][0], nodes[i + 1][0]),
                       rel_tol=NORMALIZATION_REL_TOL)
    if not z > 0.0:
        raise ConvergenceError("tau posterior normalization came out nonpositive")
    grid = tuple((t, ld - peak) for t, ld, _, _ in nodes)
    return TauPosterior(grid=grid, normalization_constant=z,
                        log_density_fn=shifted_log_post)


def _node_weights(tp: TauPosterior) -> list[float]:
    # Trapezoidal mass attributed to each grid node, normalized to sum 1.
    if tp.is_degenerate:
        return [1.0]
    taus = [t for t, _ in tp.grid]
    dens = [math.exp(ld) if ld > -math.inf else 0.0 for _, ld in tp.grid]
    n = len(taus)
    masses = []
    for i in range(n):
        left = taus[i] - taus[i - 1] if i > 0 else 0.0
        right = taus[i + 1] - taus[i] if i < n - 1 else 0.0
        masses.append(0.5 * dens[i] * (left + right))
    total = sum(masses)
    return [m / total for m in masses]


def _mixture_over_tau(tp: TauPosterior,
                      component_at: Callable[[float], tuple[float, float]], *,
                      prune_tol: float = WEIGHT_PRUNE_TOL) -> NormalMixture:
    weights = _node_weights(tp)
    kept = []
    for (tau, _), w in zip(tp.grid, weights):
        if w > prune_tol:
            mean, sd = component_at(tau)
            kept.append((w, mean, sd))
    total = sum(w for w, _, _ in kept)
    comps = tuple(MixtureComponent(w / total, m, s) for w, m, s in kept)
    return NormalMixture(comps)


def mu_marginal_mixture(dataset: Dataset, tau_prior: HeterogeneityPrior,
                        effect_prior: EffectPrior = ImproperUniform(),
                        tau_posterior: TauPosterior | None = None) -> NormalMixture:
    """Marginal posterior of the overall effect as an explicit normal mixture."""
    tp = tau_posterior if tau_posterior is not None else \
        build_tau_posterior(dataset, tau_prior, effect_prior)

    def component_at(tau: float) -> tuple[float, float]:
        mean, var = conditional_mu_moments(dataset, tau, effect_prior)
        return mean, math.sqrt(var)

    return _mixture_over_tau(tp, component_at)


def predictive_mixture(dataset: Dataset, tau_prior: HeterogeneityPrior,
                       effect_prior: EffectPrior = ImproperUniform(),
                       tau_posterior: TauPosterior | None = None) -> NormalMixture:
    """Posterior predictive distribution of a new study's true effect."""
    tp = tau_posterior if tau_posterior is not None else \
        build_tau_posterior(dataset, tau_prior, effect_prior)

    def component_at(tau: float) -> tuple[float, float]:
        mean, var = conditional_mu_moments(dataset, tau, effect_prior)
        return mean, math.sqrt(var + tau * tau)

    return _mixture_over_tau(tp, component_at)


def shrinkage_mixture(dataset: Dataset, tau_prior: HeterogeneityPrior,
                      effect_prior: EffectPrior, study_index: int,
                      tau_posterior: TauPosterior | None = None) -> NormalMixture:
    """Posterior of one study's true effect, shrunk toward the overall effect."""
    if not 0 <= study_index < dataset.k:
        raise DomainError(f"study index {study_index} out of range for k={dataset.k}")
    tp = tau_posterior if tau_posterior is not None else \
        build_tau_posterior(dataset, tau_prior, effect_prior)
    study = dataset.studies[study_index]
    s2 = study.sigma * study.sigma

    def component_at(tau: float) -> tuple[float, float]:
        mu_mean, mu_var = conditional_mu_moments(dataset, tau, effect_prior)
        t2 = tau * tau
        b = t2 / (s2 + t2)
        mean = b * study.y + (1.0 - b) * mu_mean
        var = s2 * b + (1.0 - b) ** 2 * mu_var
        return mean, math.sqrt(var)

    return _mixture_over_tau(tp, component_at)


def mixture_density(mixture: NormalMixture, x: float) -> float:
    total = 0.0
    for c in mixture.components:
        total += c.weight / c.sd * normal_pdf((x - c.mean) / c.sd)
    return total


def mixture_cdf(mixture: NormalMixture, x: float) -> float:
    total = 0.0
    for c in mixture.components:
        total += c.weight * normal_cdf((x - c.mean) / c.sd)
    return total


def mixture_quantile(mixture: NormalMixture, p: float,
                     tol: float = QUANTILE_X_TOL) -> float:
    """Invert the mixture CDF; bracketed by the extreme component quantiles."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"mixture_quantile requires 0 < p < 1, got {p}")
    comps = mixture.components
    z = normal_quantile(p)
    if len(comps) == 1:
        return comps[0].mean + comps[0].sd * z
    lo = min(c.mean + c.sd * z for c in comps)
    hi = max(c.mean + c.sd * z for c in comps)
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    return find_root(lambda x: mixture_cdf(mixture, x) - p, Interval(lo, hi), tol=tol)


def credible_interval(mixture: NormalMixture, level: float,
                      kind: str = "shortest") -> Interval:
    """Central (equal-tail) or shortest credible interval at the given level."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"credible level must be in (0, 1), got {level}")
    if kind not in ("shortest", "central"):
        raise DomainError(f"unknown interval kind {kind!r}")
    alpha = 1.0 - level
    if kind == "central" or len(mixture.components) == 1:
        # a single normal component is symmetric: shortest == central, exactly
        return Interval(mixture_quantile(mixture, 0.5 * alpha),
                        mixture_quantile(mixture, 1.0 - 0.5 * alpha))
    eps = 1e-9 * alpha

    def width(a1: float) -> float:
        return mixture_quantile(mixture, a1 + level) - mixture_quantile(mixture, a1)

    a1_best = minimize_scalar(width, Interval(eps, alpha - eps),
                              tol=SHORTEST_ALPHA_TOL)
    return Interval(mixture_quantile(mixture, a1_best),
                    mixture_quantile(mixture, a1_best + level))


def moment_matched_normal(mixture: NormalMixture) -> tuple[float, float]:
    """Mean and sd of the normal sharing the mixture's first two moments."""
    mean = sum(c.weight * c.mean for c in mixture.components)
    # law of total variance in shifted form (no large-square cancellation)
    var = sum(c.weight * (c.sd * c.sd + (c.mean - mean) ** 2) for c in mixture.components)
    return mean, math.sqrt(var)


def tau_posterior_summary(tp: TauPosterior, level: float = 0.95) -> PosteriorSummary:
    """Mean, sd, median and central interval of the heterogeneity posterior."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"credible level must be in (0, 1), got {level}")
    if tp.is_degenerate:
        t = tp.grid[0][0]
        return PosteriorSummary(mean=t, sd=0.0, median=t,
                                interval=Interval(t, t), level=level,
                                interval_kind="central")

    def dens(t: float) -> float:
        ld = tp.log_density_at(t)
        return math.exp(ld) if ld > -math.inf else 0.0

    taus = [t for t, _ in tp.grid]
    seg_mass = []
    seg_t1 = []
    seg_t2 = []
    for a, b in zip(taus, taus[1:]):
        seg = Interval(a, b)
        seg_mass.append(integrate(dens, seg, rel_tol=1e-9))
        seg_t1.append(integrate(lambda t: t * dens(t), seg, rel_tol=1e-9))
        seg_t2.append(integrate(lambda t: t * t * dens(t), seg, rel_tol=1e-9))
    z = sum(seg_mass)
    mean = sum(seg_t1) / z
    second = sum(seg_t2) / z
    sd = math.sqrt(max(second - mean * mean, 0.0))

    prefix = [0.0]
    for m in seg_mass:
        prefix.append(prefix[-1] + m)

    def quantile(q: float) -> float:
        target = q * z
        i = next(j for j in range(len(seg_mass)) if prefix[j + 1] >= target)
        lo, hi = taus[i], taus[i + 1]

        def g(t: float) -> float:
            return prefix[i] + integrate(dens, Interval(lo, t), rel_tol=1e-9) - target

        if g(hi) <= 0.0:
            return hi
        return find_root(g, Interval(lo, hi), tol=1e-10 * max(1.0, taus[-1]))

    alpha = 1.0 - level
    return PosteriorSummary(mean=mean, sd=sd, median=quantile(0.5),
                            interval=Interval(quantile(0.5 * alpha),
                                              quantile(1.0 - 0.5 * alpha)),
                            level=level, interval_kind="central")
