"""Parametric heavy-tailed severity (loss-size) distributions.

Every model exposes the scalar functionals needed by the single-loss
approximations: density, distribution and survival functions (the latter
evaluated directly, never as ``1 - cdf``), quantiles for both tails, mean,
hazard rate, the integrated survival function and tail-index metadata.

All public methods accept scalars or numpy arrays unless stated otherwise.

Note on the log-normal survival function: the closed form printed in some
references, ``1/2 + 1/2 erf((ln x - mu) / sqrt(2 sigma^2))``, is the
distribution function. The survival function used here is its complement,
``1/2 erfc((ln x - mu) / sqrt(2 sigma^2))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, HazardOverflowError, NumericError, ParameterError

__all__ = [
    "Regime",
    "TailIndexInfo",
    "Severity",
    "LogNormal",
    "InverseGaussian",
    "Pareto",
    "HeavyWeibull",
]

_SQRT2 = math.sqrt(2.0)
_LOG_2PI = math.log(2.0 * math.pi)


class Regime(enum.Enum):
    REGULARLY_VARYING = "regularly_varying"
    SUBEXPONENTIAL_NON_RV = "subexponential_non_rv"
    LIGHT_TAIL = "light_tail"


@dataclass(frozen=True)
class TailIndexInfo:
    """Tail classification of a severity model.

    ``rho`` is the (positive) regular-variation index of the survival
    function and is ``None`` unless ``regime`` is regularly varying.
    """

    regime: Regime
    has_finite_mean: bool
    rho: float | None = None


def _as_float_array(x):
    return np.asarray(x, dtype=float)


def _check_level(p, name="p"):
    p = _as_float_array(p)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DomainError(f"{name} must lie in the open interval (0, 1)")
    return p


class Severity:
    """Common behaviour for positive-support severity models.

    Subclasses implement ``logpdf``, ``logcdf``, ``logsf``, ``mean``,
    ``tail_info`` and ``sample``; they may override ``quantile``/``isf``
    with closed forms, otherwise a safeguarded Newton root finder is used.
    """

    # -- densities and tails ------------------------------------------------
    def pdf(self, x):
        x = _as_float_array(x)
        if np.any(x < 0):
            raise DomainError("x must be nonnegative")
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        x = _as_float_array(x)
        if np.any(x < 0):
            raise DomainError("x must be nonnegative")
        return np.exp(self.logcdf(x))

    def sf(self, x):
        x = _as_float_array(x)
        if np.any(x < 0):
            raise DomainError("x must be nonnegative")
        return np.exp(self.logsf(x))

    def hazard(self, x):
        """Hazard rate ``pdf(x) / sf(x)``, evaluated in log space.

        Raises
        ------
        HazardOverflowError
            If the survival function underflows to zero at some ``x``.
        """
        x = _as_float_array(x)
        if np.any(x < 0):
            raise DomainError("x must be nonnegative")
        lsf = self.logsf(x)
        bad = np.isneginf(lsf)
        if np.any(bad):
            raise HazardOverflowError(float(np.atleast_1d(x)[np.atleast_1d(bad)][0]))
        return np.exp(self.logpdf(x) - lsf)

    # -- quantiles ------------------------------------------------------------
    def quantile(self, p):
        """Generalized inverse of the distribution function at level ``p``."""
        p = _check_level(p)
        return self._vector_solve(p, upper=False)

    def isf(self, q):
        """Inverse survival function: ``x`` with ``sf(x) = q``.

        Preferred over ``quantile(1 - q)`` when ``q`` is small.
        """
        q = _check_level(q, "q")
        return self._vector_solve(q, upper=True)

    def _vector_solve(self, levels, upper):
        out = np.empty_like(levels)
        flat = out.reshape(-1)
        for i, lv in enumerate(levels.reshape(-1)):
            flat[i] = self._solve(float(lv), upper)
        return out if out.ndim else float(out)

    def _solve(self, level, upper):
        # Work on the tail holding the smaller mass so the log target is well conditioned.
        if upper and level > 0.5:
            return self._solve(1.0 - level, upper=False)
        if not upper and level > 0.5:
            return self._solve(1.0 - level, upper=True)
        log_target = math.log(level)
        if upper:
            def h(x):
                return float(self.logsf(x)) - log_target

            def dh(x):
                return -float(self.hazard(x))
        else:
            def h(x):
                return float(self.logcdf(x)) - log_target

            def dh(x):
                return float(np.exp(self.logpdf(x) - self.logcdf(x)))

        return _safeguarded_newton(h, dh, self._initial_guess(), increasing=not upper)

    def _initial_guess(self):
        m = self.mean()
        return m if math.isfinite(m) else 1.0

    # -- moments ----------------------------------------------------------------
    def integrated_sf(self, x):
        """``int_0^x sf(s) ds`` by adaptive Gauss-Kronrod quadrature.

        The range is split at severity quantiles and at decades so that
        the bulk of the mass is never straddled by a single panel.
        """
        if np.ndim(x):
            return np.array([self.integrated_sf(float(v)) for v in np.ravel(x)]).reshape(np.shape(x))
        x = float(x)
        if x < 0:
            raise DomainError("x must be nonnegative")
        if x == 0.0:
            return 0.0
        tol = 1e-10 * max(1.0, x)
        knots = [float(v) for v in self.quantile(np.array([0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.9999]))]
        knots += [10.0 ** k for k in range(-6, 16)]
        pts = sorted({0.0, x, *[k for k in knots if 0.0 < k < x]})
        total = 0.0
        err = 0.0
        panel_tol = tol / len(pts)
        for a, b in zip(pts[:-1], pts[1:]):
            val, e = integrate.quad(lambda s: float(self.sf(s)), a, b,
                                    epsabs=panel_tol, epsrel=1e-13, limit=200)
            total += val
            err += e
        if err > 10 * tol:
            raise NumericError(f"integrated_sf quadrature did not converge (err={err:.3g})")
        return total

    def mean(self):
        raise NotImplementedError

    def tail_info(self) -> TailIndexInfo:
        raise NotImplementedError

    def sample(self, rng, size=None):
        raise NotImplementedError


def _safeguarded_newton(h, dh, x0, increasing, maxiter=300):
    """Root of the monotone function ``h`` on ``(0, inf)``.

    Newton steps are accepted while they stay inside the current bracket;
    otherwise the bracket is bisected (geometrically when it spans more
    than a factor of four). Stops at 1e-12 relative in x or 1e-14 relative
    in the tail mass being matched.
    """
    sign = 1.0 if increasing else -1.0
    lo, hi = 0.0, max(x0, 1e-300)
    # expand the upper end until the root is bracketed
    for _ in range(2000):
        if sign * h(hi) >= 0:
            break
        lo, hi = hi, hi * 2.0
    else:
        raise NumericError("could not bracket quantile", bracket=(lo, hi))
    x = hi if lo == 0.0 else 0.5 * (lo + hi)
    for _ in range(maxiter):
        hx = h(x)
        if hx == 0.0 or abs(math.expm1(hx)) <= 1e-14:
            return x
        if sign * hx > 0:
            hi = x
        else:
            lo = x
        d = dh(x)
        step = hx / d if d != 0 and math.isfinite(d) else math.nan
        xn = x - step
        if not (lo < xn < hi) or not math.isfinite(xn):
            if lo > 0 and hi / lo > 4.0:
                xn = math.sqrt(lo * hi)
            elif lo == 0.0:
                xn = hi / 4.0
            else:
                xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 1e-12 * abs(xn):
            return xn
        x = xn
    raise NumericError("quantile root finder did not converge", bracket=(lo, hi))


@dataclass(frozen=True)
class LogNormal(Severity):
    """Log-normal severity, ``log X ~ N(mu, sigma^2)``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ParameterError("LogNormal mu must be finite")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ParameterError("LogNormal sigma must be positive")

    def _z(self, x):
        with np.errstate(divide="ignore"):
            return (np.log(x) - self.mu) / self.sigma

    def logpdf(self, x):
        x = _as_float_array(x)
        z = self._z(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -0.5 * z * z - np.log(x) - math.log(self.sigma) - 0.5 * _LOG_2PI
        return np.where(x > 0, out, -np.inf)

    def logcdf(self, x):
        return special.log_ndtr(self._z(_as_float_array(x)))

    def logsf(self, x):
        return special.log_ndtr(-self._z(_as_float_array(x)))

    def quantile(self, p):
        p = _check_level(p)
        return np.exp(self.mu + self.sigma * special.ndtri(p))

    def isf(self, q):
        q = _check_level(q, "q")
        return np.exp(self.mu - self.sigma * special.ndtri(q))

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma**2)

    def tail_info(self):
        return TailIndexInfo(Regime.SUBEXPONENTIAL_NON_RV, True)

    def sample(self, rng, size=None):
        return np.exp(self.mu + self.sigma * rng.standard_normal(size))


@dataclass(frozen=True)
class InverseGaussian(Severity):
    """Inverse-Gaussian severity with mean ``mu_tilde`` and shape ``lambda_tilde``.

    The family is closed under convolution: the sum of ``n`` i.i.d. copies
    is ``InverseGaussian(n * mu_tilde, n**2 * lambda_tilde)``.
    """

    mu_tilde: float
    lambda_tilde: float

    def __post_init__(self):
        if not (self.mu_tilde > 0 and math.isfinite(self.mu_tilde)):
            raise ParameterError("InverseGaussian mu_tilde must be positive")
        if not (self.lambda_tilde > 0 and math.isfinite(self.lambda_tilde)):
            raise ParameterError("InverseGaussian lambda_tilde must be positive")

    def convolve(self, n: int) -> "InverseGaussian":
        return InverseGaussian(n * self.mu_tilde, n * n * self.lambda_tilde)

    def _ab(self, x):
        mu, lam = self.mu_tilde, self.lambda_tilde
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.sqrt(lam / x)
            return r * (x / mu - 1.0), r * (x / mu + 1.0)

    def logpdf(self, x):
        x = _as_float_array(x)
        mu, lam = self.mu_tilde, self.lambda_tilde
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (0.5 * (math.log(lam) - _LOG_2PI) - 1.5 * np.log(x)
                   - lam * (x - mu) ** 2 / (2.0 * mu * mu * x))
        return np.where(x > 0, out, -np.inf)

    def logcdf(self, x):
        x = _as_float_array(x)
        a, b = self._ab(x)
        # exp(2 lam / mu) * Phi(-b) is formed in log space to avoid overflow
        second = 2.0 * self.lambda_tilde / self.mu_tilde + special.log_ndtr(-b)
        out = np.logaddexp(special.log_ndtr(a), second)
        return np.where(x > 0, out, -np.inf)

    def logsf(self, x):
        x = _as_float_array(x)
        a, b = self._ab(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            # a > 0: Phi(-a) - e^{2 lam/mu} Phi(-b) = 1/2 e^{-a^2/2} [erfcx(a/sqrt2) - erfcx(b/sqrt2)]
            # because b^2 - a^2 = 4 lam / mu, so the exponential factors cancel exactly.
            diff = special.erfcx(a / _SQRT2) - special.erfcx(b / _SQRT2)
            upper = -0.5 * a * a + np.log(0.5 * diff)
            second = np.exp(2.0 * self.lambda_tilde / self.mu_tilde + special.log_ndtr(-b))
            lower = np.log(special.ndtr(-a) - second)
        out = np.where(a > 0, upper, lower)
        return np.where(x > 0, out, 0.0)

    def mean(self):
        return float(self.mu_tilde)

    def tail_info(self):
        return TailIndexInfo(Regime.SUBEXPONENTIAL_NON_RV, True)

    def sample(self, rng, size=None):
        """Two-root transformation of a chi-square(1) variate."""
        mu, lam = self.mu_tilde, self.lambda_tilde
        y = rng.standard_normal(size) ** 2
        u = rng.random(size)
        # larger root first; the smaller root mu^2/x2 avoids cancellation
        x2 = mu + mu * mu * y / (2.0 * lam) + mu / (2.0 * lam) * np.sqrt(4.0 * mu * lam * y + (mu * y) ** 2)
        x1 = mu * mu / x2
        return np.where(u <= mu / (mu + x1), x1, x2)


@dataclass(frozen=True)
class Pareto(Severity):
    """Pareto (Lomax form) severity with ``sf(x) = (c / (c + x))**alpha``."""

    c: float
    alpha: float

    def __post_init__(self):
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ParameterError("Pareto scale c must be positive")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ParameterError("Pareto tail index alpha must be positive")

    def logpdf(self, x):
        x = _as_float_array(x)
        c, a = self.c, self.alpha
        return math.log(a) + a * math.log(c) - (a + 1.0) * np.log(c + x)

    def logsf(self, x):
        x = _as_float_array(x)
        return -self.alpha * np.log1p(x / self.c)

    def logcdf(self, x):
        lsf = self.logsf(x)
        with np.errstate(divide="ignore"):
            return np.log(-np.expm1(lsf))

    def quantile(self, p):
        p = _check_level(p)
        return self.c * np.expm1(-np.log1p(-p) / self.alpha)

    def isf(self, q):
        q = _check_level(q, "q")
        return self.c * np.expm1(-np.log(q) / self.alpha)

    def hazard(self, x):
        x = _as_float_array(x)
        if np.any(x < 0):
            raise DomainError("x must be nonnegative")
        return self.alpha / (self.c + x)

    def mean(self):
        return self.c / (self.alpha - 1.0) if self.alpha > 1.0 else math.inf

    def tail_info(self):
        return TailIndexInfo(Regime.REGULARLY_VARYING, self.alpha > 1.0, rho=float(self.alpha))

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))


@dataclass(frozen=True)
class HeavyWeibull(Severity):
    """Weibull severity with shape below one, ``sf(x) = exp(-lambda_w * x**alpha_w)``."""

    lambda_w: float
    alpha_w: float

    def __post_init__(self):
        if not (self.lambda_w > 0 and math.isfinite(self.lambda_w)):
            raise ParameterError("HeavyWeibull rate lambda_w must be positive")
        if not (0.0 < self.alpha_w < 1.0):
            raise ParameterError("HeavyWeibull shape alpha_w must lie in (0, 1)")

    def logpdf(self, x):
        x = _as_float_array(x)
        a, lam = self.alpha_w, self.lambda_w
        with np.errstate(divide="ignore"):
            return math.log(a * lam) + (a - 1.0) * np.log(x) - lam * x**a

    def logsf(self, x):
        return -self.lambda_w * _as_float_array(x) ** self.alpha_w

    def logcdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(-np.expm1(self.logsf(x)))

    def quantile(self, p):
        p = _check_level(p)
        return (-np.log1p(-p) / self.lambda_w) ** (1.0 / self.alpha_w)

    def isf(self, q):
        q = _check_level(q, "q")
        return (-np.log(q) / self.lambda_w) ** (1.0 / self.alpha_w)

    def hazard(self, x):
        x = _as_float_array(x)
        if np.any(x < 0):
            raise DomainError("x must be nonnegative")
        with np.errstate(divide="ignore"):
            return self.alpha_w * self.lambda_w * x ** (self.alpha_w - 1.0)

    def mean(self):
        return self.lambda_w ** (-1.0 / self.alpha_w) * math.gamma(1.0 + 1.0 / self.alpha_w)

    def tail_info(self):
        return TailIndexInfo(Regime.SUBEXPONENTIAL_NON_RV, True)

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))
