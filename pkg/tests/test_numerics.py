import math

import numpy as np
import pytest
import scipy.stats

from metamix.errors import BracketError, ConvergenceError, DomainError
from metamix.numerics import (
    Interval,
    chisq_cdf,
    chisq_quantile,
    find_root,
    gamma_p,
    incomplete_beta,
    integrate,
    minimize_scalar,
    normal_cdf,
    normal_quantile,
    student_t_cdf,
    student_t_quantile,
)

# Reference values computed with mpmath (30 digits) before implementation.
PHI_1 = 0.8413447460685429
Z_975 = 1.959963984540054
CHISQ_975_1 = 5.023886187314889
CHISQ_95_2 = 5.991464547107982
T_975_1 = 12.7062047361747
T_975_11 = 2.20098516009164
DOTTIE = 0.7390851332151606


class TestNormalCdf:
    def test_zero_is_half(self):
        assert normal_cdf(0.0) == 0.5

    def test_reference_value(self):
        assert abs(normal_cdf(1.0) - PHI_1) <= 1e-12

    @pytest.mark.parametrize("x", [0.1, 0.7, 1.3, 2.9, 4.5, 7.0])
    def test_symmetry(self, x):
        assert abs(normal_cdf(x) + normal_cdf(-x) - 1.0) <= 1e-15

    def test_monotone(self):
        xs = np.linspace(-8.0, 8.0, 2001)
        vals = [normal_cdf(float(x)) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_against_scipy(self):
        for x in np.linspace(-6, 6, 121):
            assert abs(normal_cdf(float(x)) - scipy.stats.norm.cdf(x)) <= 1e-14


class TestNormalQuantile:
    def test_median(self):
        assert normal_quantile(0.5) == 0.0

    def test_reference_value(self):
        assert abs(normal_quantile(0.975) - Z_975) <= 1e-9

    @pytest.mark.parametrize("p", [0.01, 0.1, 0.3, 0.45, 0.6, 0.9, 0.999])
    def test_antisymmetry(self, p):
        assert abs(normal_quantile(p) + normal_quantile(1.0 - p)) <= 1e-12

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            normal_quantile(p)

    def test_roundtrip_identity(self):
        # Near +6 the stored cdf value itself cannot pin x below ulp(p)/pdf(x)
        # (about 9e-9 at x = 6), so that quantization floor is allowed for.
        for x in np.linspace(-6.0, 6.0, 241):
            x = float(x)
            p = normal_cdf(x)
            quantization = math.ulp(p) / (math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi))
            assert abs(normal_quantile(p) - x) <= 1e-9 + quantization

    def test_cdf_residual(self):
        for p in [1e-10, 1e-6, 0.025, 0.5, 0.975, 1 - 1e-6]:
            assert abs(normal_cdf(normal_quantile(p)) - p) <= 1e-12


class TestIncompleteGammaBeta:
    def test_gamma_p_against_scipy(self):
        for a in (0.25, 0.5, 1.0, 3.5, 10.0, 50.0):
            for x in (0.01, 0.5, a, 2 * a, 5 * a):
                assert gamma_p(a, x) == pytest.approx(scipy.special.gammainc(a, x), abs=1e-13)

    def test_incomplete_beta_against_scipy(self):
        for a, b in ((0.5, 0.5), (2.0, 3.0), (5.5, 0.5), (10.0, 10.0)):
            for x in (0.01, 0.2, 0.5, 0.8, 0.99):
                assert incomplete_beta(a, b, x) == pytest.approx(
                    scipy.special.betainc(a, b, x), abs=1e-13)

    def test_edges(self):
        assert gamma_p(2.0, 0.0) == 0.0
        assert incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert incomplete_beta(2.0, 3.0, 1.0) == 1.0


class TestChisqQuantile:
    def test_closed_form_dof2(self):
        assert abs(chisq_quantile(0.5, 2) - 2.0 * math.log(2.0)) <= 1e-10
        assert abs(chisq_quantile(0.95, 2) - CHISQ_95_2) <= 1e-10

    def test_reference_value(self):
        assert abs(chisq_quantile(0.975, 1) - CHISQ_975_1) / CHISQ_975_1 <= 1e-10

    def test_strictly_increasing_in_p(self):
        for dof in (1, 2, 5, 11.5):
            qs = [chisq_quantile(p, dof) for p in np.linspace(0.01, 0.99, 50)]
            assert all(b > a for a, b in zip(qs, qs[1:]))

    def test_cdf_inversion(self):
        for dof in (0.5, 1, 3, 7, 30):
            for p in (0.01, 0.1, 0.5, 0.9, 0.99):
                x = chisq_quantile(p, dof)
                assert abs(chisq_cdf(x, dof) - p) <= 1e-10 * p

    def test_domain(self):
        with pytest.raises(DomainError):
            chisq_quantile(0.0, 2)
        with pytest.raises(DomainError):
            chisq_quantile(0.5, 0.0)


class TestStudentTQuantile:
    def test_median_any_dof(self):
        for dof in (0.7, 1, 4, 100):
            assert student_t_quantile(0.5, dof) == 0.0

    def test_cauchy_closed_form(self):
        assert abs(student_t_quantile(0.975, 1) - T_975_1) <= 1e-8
        assert abs(student_t_quantile(0.975, 1)
                   - math.tan(math.pi * 0.475)) / T_975_1 <= 1e-10

    def test_reference_value(self):
        assert abs(student_t_quantile(0.975, 11) - T_975_11) <= 1e-8

    def test_symmetry(self):
        for dof in (1, 5, 20):
            for p in (0.6, 0.9, 0.99):
                assert abs(student_t_quantile(p, dof)
                           + student_t_quantile(1.0 - p, dof)) <= 1e-10

    def test_cdf_inversion(self):
        for dof in (1, 2, 11, 50):
            for p in (0.025, 0.3, 0.7, 0.995):
                t = student_t_quantile(p, dof)
                assert abs(student_t_cdf(t, dof) - p) <= 1e-10 * min(p, 1 - p) + 1e-14

    def test_domain(self):
        with pytest.raises(DomainError):
            student_t_quantile(1.0, 5)
        with pytest.raises(DomainError):
            student_t_quantile(0.5, -1)


class TestFindRoot:
    def test_sqrt2(self):
        x = find_root(lambda x: x * x - 2.0, Interval(0.0, 2.0), 1e-12)
        assert abs(x - math.sqrt(2.0)) <= 1e-10

    def test_linear(self):
        for c in (-3.7, 0.0, 12.25):
            x = find_root(lambda x: x - c, Interval(c - 1.0, c + 1.0), 1e-12)
            assert abs(x - c) <= 1e-10

    def test_dottie(self):
        x = find_root(lambda x: math.cos(x) - x, Interval(0.0, 1.0), 1e-12)
        assert abs(x - DOTTIE) <= 1e-10

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1.0, Interval(-1.0, 1.0), 1e-10)

    def test_root_at_endpoint(self):
        assert find_root(lambda x: x, Interval(0.0, 1.0), 1e-10) == 0.0

    def test_bracketing_guarantee(self):
        f = lambda x: math.tanh(3.0 * (x - 0.3))
        tol = 1e-7
        x = find_root(f, Interval(-2.0, 2.0), tol)
        assert f(x - tol) * f(x + tol) <= 0.0 or abs(f(x)) <= 1e-12


class TestMinimizeScalar:
    def test_parabola(self):
        assert abs(minimize_scalar(lambda x: (x - 2.0) ** 2, Interval(0.0, 5.0), 1e-9) - 2.0) <= 1e-8

    def test_abs(self):
        assert abs(minimize_scalar(abs, Interval(-1.0, 3.0), 1e-9)) <= 1e-8

    def test_xlogx(self):
        x = minimize_scalar(lambda x: x * math.log(x), Interval(0.1, 1.0), 1e-10)
        assert abs(x - math.exp(-1.0)) <= 1e-8


class TestIntegrate:
    def test_polynomial(self):
        assert integrate(lambda x: x * x, Interval(0.0, 1.0), 1e-10) == pytest.approx(1 / 3, abs=1e-12)

    def test_sine(self):
        assert integrate(math.sin, Interval(0.0, math.pi), 1e-10) == pytest.approx(2.0, abs=1e-10)

    def test_normal_density_normalizes(self):
        dens = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
        assert abs(integrate(dens, Interval(-8.0, 8.0), 1e-12) - 1.0) <= 1e-10

    def test_linearity_on_polynomials(self):
        f = lambda x: x ** 3 - x
        g = lambda x: 2.0 * x * x + 1.0
        iv = Interval(-1.0, 2.0)
        lhs = integrate(lambda x: 3.0 * f(x) - 0.5 * g(x), iv, 1e-11)
        rhs = 3.0 * integrate(f, iv, 1e-11) - 0.5 * integrate(g, iv, 1e-11)
        assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_empty_interval(self):
        assert integrate(math.exp, Interval(1.0, 1.0), 1e-10) == 0.0

    def test_depth_limit(self):
        step = lambda x: 1.0 if x > math.pi / 10.0 else 0.0
        with pytest.raises(ConvergenceError):
            integrate(step, Interval(0.0, 1.0), 1e-12, max_depth=8)
