"""Counting distributions for the annual number of losses."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, ParameterError

__all__ = ["Frequency", "Poisson", "NegativeBinomial"]


class Frequency:
    """Interface shared by the frequency models.

    ``pmf`` and ``sf`` accept integer scalars or arrays; ``sf(n)`` is
    ``P(N > n)``.
    """

    def pmf(self, n):
        n = np.asarray(n)
        if np.any(n < 0):
            raise DomainError("n must be a nonnegative integer")
        return np.exp(self.logpmf(n))

    def truncation_point(self, tail_mass=1e-14):
        """Smallest ``n`` with ``P(N > n) < tail_mass``."""
        n = max(int(self.mean()), 0)
        while self.sf(n) >= tail_mass:
            n = 2 * n + 1
        lo, hi = -1, n
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.sf(mid) < tail_mass:
                hi = mid
            else:
                lo = mid
        return hi


@dataclass(frozen=True)
class Poisson(Frequency):
    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ParameterError("Poisson rate must be positive")

    def logpmf(self, n):
        n = np.asarray(n, dtype=float)
        return -self.lam + n * math.log(self.lam) - special.gammaln(n + 1.0)

    def sf(self, n):
        return special.pdtrc(np.asarray(n, dtype=float), self.lam)

    def mean(self):
        return float(self.lam)

    def factorial_moment2(self):
        """``E[N(N-1)]``."""
        return float(self.lam) ** 2

    def pgf(self, v):
        return np.exp(self.lam * (np.asarray(v, dtype=float) - 1.0))

    def sample(self, rng, size=None):
        # numpy uses inversion for small rates and PTRS rejection above
        return rng.poisson(self.lam, size)


@dataclass(frozen=True)
class NegativeBinomial(Frequency):
    """Number of failures before the ``r``-th success, success probability ``p``."""

    r: float
    p: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ParameterError("NegativeBinomial size r must be positive")
        if not (0.0 < self.p < 1.0):
            raise ParameterError("NegativeBinomial p must lie in (0, 1)")

    def logpmf(self, n):
        n = np.asarray(n, dtype=float)
        r, p = self.r, self.p
        return (special.gammaln(n + r) - special.gammaln(r) - special.gammaln(n + 1.0)
                + r * math.log(p) + n * math.log1p(-p))

    def sf(self, n):
        n = np.asarray(n, dtype=float)
        # P(N > n) = I_{1-p}(n + 1, r)
        return np.where(n < 0, 1.0, special.betainc(np.maximum(n, 0.0) + 1.0, self.r, 1.0 - self.p))

    def mean(self):
        return self.r * (1.0 - self.p) / self.p

    def factorial_moment2(self):
        q = 1.0 - self.p
        return self.r * (self.r + 1.0) * q * q / (self.p * self.p)

    def pgf(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v >= 1.0 / (1.0 - self.p)):
            raise DomainError("pgf argument outside the radius of convergence 1/(1-p)")
        # written so that v = 1 gives exactly 1
        return (self.p / (self.p + (1.0 - self.p) * (1.0 - v))) ** self.r

    def sample(self, rng, size=None):
        # gamma-Poisson mixture
        rate = rng.gamma(self.r, (1.0 - self.p) / self.p, size)
        return rng.poisson(rate)
