import math

import pytest

from metamix.errors import DomainError
from metamix.priors import (
    HalfCauchy,
    HalfNormal,
    LogNormal,
    Normal,
    PointMass,
    Uniform,
    tau_prior_cdf,
    tau_prior_density,
    tau_prior_quantile,
)

HN_05_Q95 = 0.9799819922726588  # 0.5 * Phi^-1(0.975), mpmath


class TestDensity:
    def test_half_normal_at_zero(self):
        assert tau_prior_density(HalfNormal(0.5), 0.0) == pytest.approx(
            math.sqrt(2.0 / math.pi) / 0.5, abs=1e-12)

    def test_uniform(self):
        assert tau_prior_density(Uniform(2.0), 1.0) == 0.5
        assert tau_prior_density(Uniform(2.0), 2.5) == 0.0

    def test_half_cauchy(self):
        assert tau_prior_density(HalfCauchy(1.0), 1.0) == pytest.approx(
            (2.0 / math.pi) / 2.0, abs=1e-12)

    def test_point_mass_has_no_density(self):
        with pytest.raises(DomainError):
            tau_prior_density(PointMass(0.3), 0.3)

    def test_negative_tau_rejected(self):
        with pytest.raises(DomainError):
            tau_prior_density(HalfNormal(0.5), -0.1)

    @pytest.mark.parametrize("prior", [
        HalfNormal(0.5), HalfCauchy(1.0), Uniform(2.0), LogNormal(-0.5, 0.7),
    ])
    def test_density_integrates_to_one(self, prior):
        from metamix.numerics import Interval, integrate
        tail = 1e-8 if isinstance(prior, HalfCauchy) else 1e-12
        # piecewise at prior quantiles so the quadrature never misses the bump
        cuts = [0.0] + [tau_prior_quantile(prior, q)
                        for q in (0.1, 0.25, 0.5, 0.75, 0.9, 1 - tail)]
        mass = sum(integrate(lambda t: tau_prior_density(prior, t),
                             Interval(a, b), 1e-10)
                   for a, b in zip(cuts, cuts[1:]))
        assert mass == pytest.approx(1.0, abs=1e-7)


class TestQuantile:
    def test_half_normal_95(self):
        assert tau_prior_quantile(HalfNormal(0.5), 0.95) == pytest.approx(HN_05_Q95, abs=1e-10)

    def test_half_normal_mass_below_one(self):
        # 95% of a HalfNormal(0.5) sits below tau = 0.98
        assert tau_prior_quantile(HalfNormal(0.5), 0.95) <= 0.98

    def test_half_cauchy_median(self):
        assert tau_prior_quantile(HalfCauchy(1.0), 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_uniform(self):
        assert tau_prior_quantile(Uniform(2.0), 0.25) == 0.5

    def test_point_mass_returns_value(self):
        for q in (0.01, 0.5, 0.99):
            assert tau_prior_quantile(PointMass(0.7), q) == 0.7

    @pytest.mark.parametrize("q", [0.0, 1.0, -0.5])
    def test_domain(self, q):
        with pytest.raises(DomainError):
            tau_prior_quantile(HalfNormal(0.5), q)

    @pytest.mark.parametrize("prior", [
        HalfNormal(0.5), HalfNormal(1.0), HalfCauchy(0.3), Uniform(2.0),
        LogNormal(0.0, 1.0), LogNormal(-0.674, 0.5),
    ])
    def test_quantile_cdf_roundtrip(self, prior):
        for q in (0.001, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999):
            t = tau_prior_quantile(prior, q)
            assert tau_prior_cdf(prior, t) == pytest.approx(q, abs=1e-8)
            assert tau_prior_quantile(prior, tau_prior_cdf(prior, t)) == pytest.approx(t, rel=1e-8)

    def test_scale_family_scaling_exact(self):
        # powers of two scale without rounding
        for q in (0.1, 0.5, 0.95):
            assert (tau_prior_quantile(HalfNormal(2.0 * 0.5), q)
                    == 2.0 * tau_prior_quantile(HalfNormal(0.5), q))
            assert (tau_prior_quantile(HalfCauchy(4.0 * 0.25), q)
                    == 4.0 * tau_prior_quantile(HalfCauchy(0.25), q))

    def test_scale_family_scaling_general(self):
        for q in (0.1, 0.5, 0.95):
            assert tau_prior_quantile(HalfNormal(3.7 * 0.5), q) == pytest.approx(
                3.7 * tau_prior_quantile(HalfNormal(0.5), q), rel=1e-15)


class TestValidation:
    @pytest.mark.parametrize("build", [
        lambda: HalfNormal(0.0), lambda: HalfCauchy(-1.0), lambda: Uniform(0.0),
        lambda: LogNormal(0.0, 0.0), lambda: PointMass(-0.1), lambda: Normal(0.0, 0.0),
    ])
    def test_bad_parameters(self, build):
        with pytest.raises(DomainError):
            build()
