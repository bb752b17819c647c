"""Self-contained scalar numerics: special functions, root finding, minimization,
adaptive quadrature.

Everything here is pure and reentrant. Default tolerances are module constants
and can be overridden per call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import BracketError, ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)
SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI

QUANTILE_TOL = 1e-12          # |cdf(x) - p| target for normal_quantile
GAMMA_BETA_TOL = 1e-15        # series / continued-fraction termination
CHISQ_T_REL_TOL = 1e-12       # |cdf(x) - p| relative target for chi^2 / t quantiles
ROOT_TOL = 1e-12              # default bracket width for find_root
MIN_TOL = 1e-8                # default bracket width for minimize_scalar
INTEGRATE_REL_TOL = 1e-10     # default relative error for integrate
MAX_SIMPSON_DEPTH = 60
_FPMIN = 1e-300


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with lo <= hi."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise DomainError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise DomainError(f"interval requires lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __iter__(self):
        return iter((self.lo, self.hi))


def normal_pdf(x: float) -> float:
    """Standard normal density."""
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the erfc kernel; accurate to ~1 ulp."""
    return 0.5 * math.erfc(-x / SQRT2)


# Acklam's rational approximation to the inverse normal CDF (|rel err| < 1.2e-9
# before refinement).
_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)


def _acklam(p: float) -> float:
    a, b, c, d = _ACK_A, _ACK_B, _ACK_C, _ACK_D
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if p > 0.97575:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
                ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def normal_quantile(p: float, tol: float = QUANTILE_TOL) -> float:
    """Inverse standard normal CDF: rational first guess plus Newton refinement.

    Refinement runs on the smaller tail (the complement 1-p is exact for
    p >= 0.5), so the result is accurate to the precision the double p itself
    carries. Raises DomainError unless 0 < p < 1.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal_quantile requires 0 < p < 1, got {p}")
    if p == 0.5:
        return 0.0
    flip = p > 0.5
    comp = 1.0 - p if flip else p
    x = _acklam(comp)
    for _ in range(4):
        err = normal_cdf(x) - comp
        if abs(err) <= tol * comp:
            break
        dens = normal_pdf(x)
        if dens <= _FPMIN:
            break
        x -= err / dens
    return -x if flip else x


def _lower_gamma_series(a: float, x: float) -> float:
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(800):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * GAMMA_BETA_TOL:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ConvergenceError("incomplete gamma series failed to converge")


def _upper_gamma_cf(a: float, x: float) -> float:
    # Modified Lentz continued fraction for Q(a, x), x > a + 1 regime.
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, 800):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < GAMMA_BETA_TOL:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ConvergenceError("incomplete gamma continued fraction failed to converge")


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if a <= 0.0:
        raise DomainError(f"gamma_p requires a > 0, got {a}")
    if x < 0.0:
        raise DomainError(f"gamma_p requires x >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _lower_gamma_series(a, x)
    return 1.0 - _upper_gamma_cf(a, x)


def _beta_cf(a: float, b: float, x: float) -> float:
    # Lentz continued fraction for the incomplete beta kernel.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, 500):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < GAMMA_BETA_TOL:
            return h
    raise ConvergenceError("incomplete beta continued fraction failed to converge")


def incomplete_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError("incomplete_beta requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                     + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def chisq_cdf(x: float, dof: float) -> float:
    """Chi-squared CDF with dof degrees of freedom."""
    if dof <= 0.0:
        raise DomainError(f"chisq_cdf requires dof > 0, got {dof}")
    if x <= 0.0:
        return 0.0
    return gamma_p(0.5 * dof, 0.5 * x)


def _chisq_pdf(x: float, dof: float) -> float:
    a = 0.5 * dof
    if x <= 0.0:
        return 0.0
    logp = (a - 1.0) * math.log(x) - 0.5 * x - math.lgamma(a) - a * math.log(2.0)
    return math.exp(logp)


def chisq_quantile(p: float, dof: float, rel_tol: float = CHISQ_T_REL_TOL) -> float:
    """Inverse chi-squared CDF via safeguarded Newton, Wilson-Hilferty start."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"chisq_quantile requires 0 < p < 1, got {p}")
    if dof <= 0.0:
        raise DomainError(f"chisq_quantile requires dof > 0, got {dof}")
    z = normal_quantile(p)
    wh = dof * (1.0 - 2.0 / (9.0 * dof) + z * math.sqrt(2.0 / (9.0 * dof))) ** 3
    x = wh if wh > 0.0 else 0.5 * dof * 1e-3
    lo, hi = 0.0, max(4.0 * x, dof + 10.0 * math.sqrt(2.0 * dof))
    while chisq_cdf(hi, dof) < p:
        hi *= 4.0
    return _invert_cdf(lambda t: chisq_cdf(t, dof), lambda t: _chisq_pdf(t, dof),
                       p, x, lo, hi, rel_tol)


def student_t_cdf(t: float, dof: float) -> float:
    """Student-t CDF via the regularized incomplete beta."""
    if dof <= 0.0:
        raise DomainError(f"student_t_cdf requires dof > 0, got {dof}")
    if t == 0.0:
        return 0.5
    ib = incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t))
    return 1.0 - 0.5 * ib if t > 0.0 else 0.5 * ib


def _student_t_pdf(t: float, dof: float) -> float:
    logp = (math.lgamma(0.5 * (dof + 1.0)) - math.lgamma(0.5 * dof)
            - 0.5 * math.log(dof * math.pi)
            - 0.5 * (dof + 1.0) * math.log1p(t * t / dof))
    return math.exp(logp)


def student_t_quantile(p: float, dof: float, rel_tol: float = CHISQ_T_REL_TOL) -> float:
    """Inverse Student-t CDF via safeguarded Newton on the incomplete-beta CDF."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"student_t_quantile requires 0 < p < 1, got {p}")
    if dof <= 0.0:
        raise DomainError(f"student_t_quantile requires dof > 0, got {dof}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -student_t_quantile(1.0 - p, dof, rel_tol)
    z = normal_quantile(p)
    guess = z + (z ** 3 + z) / (4.0 * dof)   # Cornish-Fisher first correction
    hi = max(2.0 * abs(guess), 1.0)
    while student_t_cdf(hi, dof) < p:
        hi *= 4.0
    x = min(max(guess, 0.0), hi)
    return _invert_cdf(lambda t: student_t_cdf(t, dof), lambda t: _student_t_pdf(t, dof),
                       p, x, 0.0, hi, rel_tol)


def _invert_cdf(cdf: Callable[[float], float], pdf: Callable[[float], float],
                p: float, x: float, lo: float, hi: float, rel_tol: float) -> float:
    # Newton iteration kept inside a shrinking [lo, hi] bracket; bisection fallback.
    target = rel_tol * min(p, 1.0 - p)
    for _ in range(200):
        f = cdf(x) - p
        if abs(f) <= target:
            return x
        if f > 0.0:
            hi = x
        else:
            lo = x
        dens = pdf(x)
        step_ok = dens > _FPMIN
        if step_ok:
            x_new = x - f / dens
            step_ok = lo < x_new < hi
        if not step_ok:
            x_new = 0.5 * (lo + hi)
        if x_new == x or hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi))):
            return x
        x = x_new
    raise ConvergenceError("quantile inversion failed to converge")


def find_root(f: Callable[[float], float], bracket: Interval, tol: float = ROOT_TOL) -> float:
    """Brent's method. Requires f(lo) and f(hi) of opposite sign (or zero).

    Returns x with the final bracket width at most tol (never worse than
    bisection). Raises BracketError when the bracket has no sign change.
    """
    if tol <= 0.0:
        raise DomainError(f"find_root requires tol > 0, got {tol}")
    a, b = bracket.lo, bracket.hi
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        raise BracketError(f"no sign change on [{a}, {b}]: f(lo)={fa}, f(hi)={fb}")
    c, fc = a, fa
    e = d = b - a
    for _ in range(400):
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * math.ulp(abs(b)) + 0.5 * tol
        m = 0.5 * (c - b)
        if abs(m) <= tol1 or fb == 0.0:
            return b
        if abs(e) < tol1 or abs(fa) <= abs(fb):
            e = d = m
        else:
            s = fb / fa
            if a == c:
                p_ = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p_ = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p_ > 0.0:
                q = -q
            else:
                p_ = -p_
            s = e
            e = d
            if 2.0 * p_ < 3.0 * m * q - abs(tol1 * q) and p_ < abs(0.5 * s * q):
                d = p_ / q
            else:
                e = d = m
        a, fa = b, fb
        if abs(d) > tol1:
            b += d
        else:
            b += tol1 if m > 0.0 else -tol1
        fb = f(b)
        if (fb > 0.0) == (fc > 0.0):
            c, fc = a, fa
            e = d = b - a
    raise ConvergenceError("find_root exceeded its iteration budget")


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def minimize_scalar(f: Callable[[float], float], bracket: Interval, tol: float = MIN_TOL) -> float:
    """Golden-section search; returns a minimizer located to within tol.

    On a non-unimodal function this converges to some local minimizer.
    """
    if tol <= 0.0:
        raise DomainError(f"minimize_scalar requires tol > 0, got {tol}")
    a, b = bracket.lo, bracket.hi
    if b - a <= tol:
        return 0.5 * (a + b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def integrate(f: Callable[[float], float], interval: Interval,
              rel_tol: float = INTEGRATE_REL_TOL, max_depth: int = MAX_SIMPSON_DEPTH) -> float:
    """Adaptive Simpson quadrature with estimated relative error <= rel_tol.

    Raises ConvergenceError if the subdivision depth limit is reached.
    """
    if rel_tol <= 0.0:
        raise DomainError(f"integrate requires rel_tol > 0, got {rel_tol}")
    a, b = interval.lo, interval.hi
    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    eps = rel_tol * max(abs(whole), 1e-15)
    return _simpson(f, a, b, fa, fm, fb, whole, eps, max_depth)


def _simpson(f, a, b, fa, fm, fb, whole, eps, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * eps:
        return left + right + delta / 15.0
    if depth <= 0:
        raise ConvergenceError("integrate hit the subdivision depth limit")
    return (_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
            + _simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1))
