"""Reference evaluation of the annual loss ``Z = X_1 + ... + X_N``.

Two oracles are provided: block-parallel Monte Carlo with confidence
intervals, and the exact Poisson / Inverse-Gaussian series obtained from
convolution closure of the Inverse-Gaussian family.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import streams
from .errors import AtomError, DomainError, InsufficientTailSamplesError, ParameterError
from .frequency import Frequency, Poisson
from .severity import InverseGaussian, Severity
from .spectral import SpectralWeight

__all__ = [
    "CompoundModel",
    "Method",
    "Estimate",
    "McConfig",
    "AnnualLossSample",
    "sample_annual_loss",
    "simulate_annual_losses",
    "annual_loss_sample",
    "mc_tail",
    "mc_var",
    "mc_es",
    "mc_srm",
    "exact_tail_poisson_ig",
    "exact_var_poisson_ig",
]


@dataclass(frozen=True)
class CompoundModel:
    frequency: Frequency
    severity: Severity

    def mean(self):
        return self.frequency.mean() * self.severity.mean()


class Method(str, enum.Enum):
    MONTE_CARLO = "monte_carlo"
    EXACT_SERIES = "exact_series"
    SLA1 = "sla1"
    SLA2 = "sla2"


@dataclass(frozen=True)
class Estimate:
    value: float
    method: Method
    ci_low: float | None = None
    ci_high: float | None = None
    level: float | None = None
    n_samples: int | None = None

    def __post_init__(self):
        has_ci = self.ci_low is not None
        if has_ci != (self.method == Method.MONTE_CARLO):
            raise ValueError("confidence interval present iff method is monte_carlo")
        if has_ci and not (self.ci_low <= self.value <= self.ci_high):
            raise ValueError("ci_low <= value <= ci_high violated")


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 1_000_000
    seed: int = 42
    n_workers: int = 1
    ci_level: float = 0.99

    def __post_init__(self):
        if self.n_samples < 10_000:
            raise ParameterError("n_samples must be at least 1e4")
        if not (0 <= self.seed < 2**64):
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.n_workers < 1:
            raise ParameterError("n_workers must be at least 1")
        if not (0.0 < self.ci_level < 1.0):
            raise ParameterError("ci_level must lie in (0, 1)")


def sample_annual_loss(model: CompoundModel, rng) -> float:
    n = int(model.frequency.sample(rng))
    if n == 0:
        return 0.0
    return float(np.sum(model.severity.sample(rng, n)))


def _simulate_block(model, seed, block, size):
    rng = streams.block_rng(seed, block)
    counts = np.asarray(model.frequency.sample(rng, size), dtype=np.int64)
    losses = np.asarray(model.severity.sample(rng, int(counts.sum())), dtype=float)
    owner = np.repeat(np.arange(size), counts)
    return np.bincount(owner, weights=losses, minlength=size)


def simulate_annual_losses(model: CompoundModel, cfg: McConfig) -> np.ndarray:
    """Annual losses in sample order; a pure function of ``(model, n_samples, seed)``."""
    blocks = streams.map_blocks(
        lambda b, m: _simulate_block(model, cfg.seed, b, m), cfg.n_samples, cfg.n_workers)
    return np.concatenate(blocks)


@functools.lru_cache(maxsize=4)
def _sorted_losses(model, n_samples, seed, n_workers):
    z = simulate_annual_losses(model, McConfig(n_samples, seed, n_workers))
    z.sort()
    z.setflags(write=False)
    return z


def annual_loss_sample(model: CompoundModel, cfg: McConfig) -> "AnnualLossSample":
    """Simulated sample for ``model``, cached on ``(model, n_samples, seed)``."""
    # keyed on n_workers as well so a changed worker count really re-simulates
    return AnnualLossSample(_sorted_losses(model, cfg.n_samples, cfg.seed, cfg.n_workers), cfg)


def _ceil_rank(n, level):
    """``ceil(n * level)`` robust to rounding of the product."""
    k = n * level
    r = round(k)
    if abs(k - r) <= 1e-9 * max(1.0, k):
        return int(r)
    return int(math.ceil(k))


class AnnualLossSample:
    """Sorted Monte Carlo sample of the annual loss with tail estimators.

    Quantiles follow the inverted empirical cdf, ``inf{z : F_n(z) >= s}``.
    """

    N_BOOTSTRAP = 200

    def __init__(self, sorted_losses, cfg: McConfig):
        self.z = sorted_losses
        self.n = len(sorted_losses)
        self.cfg = cfg

    # -- elementary estimators ---------------------------------------------------
    def quantile(self, s):
        """Empirical lower quantile at level(s) ``s`` in (0, 1]."""
        s = np.asarray(s, dtype=float)
        k = np.ceil(self.n * s - 1e-9 * self.n * s).astype(np.int64)
        return self.z[np.clip(k, 1, self.n) - 1]

    def _check_tail(self, alpha):
        if not (0.0 < alpha < 1.0):
            raise DomainError("alpha must lie in (0, 1)")
        if self.n * (1.0 - alpha) < 100:
            raise InsufficientTailSamplesError(
                f"only {self.n * (1.0 - alpha):.1f} expected samples beyond alpha={alpha}; need 100")

    def tail(self, x) -> Estimate:
        """``P(Z > x)`` with a Wilson score interval."""
        if x < 0:
            raise DomainError("x must be nonnegative")
        n = self.n
        exceed = n - int(np.searchsorted(self.z, x, side="right"))
        p = exceed / n
        zc = stats.norm.ppf(0.5 + 0.5 * self.cfg.ci_level)
        denom = 1.0 + zc * zc / n
        centre = (p + zc * zc / (2 * n)) / denom
        half = zc * math.sqrt(p * (1 - p) / n + zc * zc / (4 * n * n)) / denom
        return Estimate(p, Method.MONTE_CARLO, float(min(p, centre - half)), float(max(p, centre + half)),
                        self.cfg.ci_level, n)

    def var(self, alpha) -> Estimate:
        """Empirical VaR with a distribution-free order-statistic interval."""
        self._check_tail(alpha)
        n = self.n
        k = _ceil_rank(n, alpha)
        delta = 1.0 - self.cfg.ci_level
        lo = int(stats.binom.ppf(delta / 2, n, alpha))
        hi = int(stats.binom.ppf(1 - delta / 2, n, alpha)) + 1
        lo, hi = max(lo, 1), min(hi, n)
        value = float(self.z[k - 1])
        return Estimate(value, Method.MONTE_CARLO, float(min(self.z[lo - 1], value)),
                        float(max(self.z[hi - 1], value)), self.cfg.ci_level, n)

    def es(self, alpha) -> Estimate:
        """Threshold-corrected tail mean, equal to ``(1-alpha)^-1 int_alpha^1 q(s) ds``."""
        self._check_tail(alpha)
        return self._bootstrapped(lambda tail, n: _es_from_tail(tail, n, alpha), alpha)

    def srm(self, kappa, weight: SpectralWeight) -> Estimate:
        """Spectral risk measure ``int_kappa^1 phi_kappa(s) q(s) ds``.

        Trapezoidal rule on the grid ``s_i = 1 - (1-kappa) 2^(-i/8)`` while
        ``1 - s_i >= 10/n``; the remaining sliver up to one is integrated
        exactly against the empirical step quantile.
        """
        self._check_tail(kappa)
        return self._bootstrapped(lambda tail, n: _srm_from_tail(tail, n, kappa, weight), kappa)

    # -- bootstrap over the upper order statistics ------------------------------------
    def _bootstrapped(self, functional, level):
        n = self.n
        needed = n - _ceil_rank(n, level) + 2
        pool_size = min(n, 4 * needed + 1000)
        pool = self.z[n - pool_size:]
        value = float(functional(pool, n))
        rng = streams.block_rng(self.cfg.seed, 0, streams.BOOTSTRAP)
        reps = np.empty(self.N_BOOTSTRAP)
        for i in range(self.N_BOOTSTRAP):
            # A full resample puts Binomial(n, pool/n) draws into the pool, uniformly;
            # those are the resample's top order statistics.
            k = int(rng.binomial(n, pool_size / n)) if pool_size < n else n
            if k < needed:
                idx = rng.integers(0, n, n)
                tail = np.sort(self.z[idx])
            else:
                tail = np.sort(pool[rng.integers(0, pool_size, k)])
            reps[i] = functional(tail, n)
        a = 0.5 * (1.0 - self.cfg.ci_level)
        lo, hi = np.quantile(reps, [a, 1.0 - a])
        return Estimate(value, Method.MONTE_CARLO, float(min(lo, value)), float(max(hi, value)),
                        self.cfg.ci_level, n)


def _rank_value(tail, n, rank):
    """Order statistic of 1-based ``rank`` given the top ``len(tail)`` order statistics."""
    return tail[np.asarray(rank) - (n - len(tail)) - 1]


def _es_from_tail(tail, n, alpha):
    k = _ceil_rank(n, alpha)
    above = tail[k - (n - len(tail)):]
    total = above.sum() + (k - n * alpha) * _rank_value(tail, n, k)
    return total / (n * (1.0 - alpha))


def _srm_from_tail(tail, n, kappa, weight):
    w = 1.0 - kappa
    i_max = int(math.floor(8.0 * math.log2(w * n / 10.0))) if w * n >= 10 else 0
    s = 1.0 - w * 2.0 ** (-np.arange(i_max + 1) / 8.0)
    ranks = np.clip(np.ceil(n * s - 1e-9 * n * s).astype(np.int64), 1, n)
    f = weight.phi_kappa(s, kappa) * _rank_value(tail, n, ranks)
    body = float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(s)))
    # exact integral of the step quantile over [s_last, 1]
    s_last = s[-1]
    k0 = int(ranks[-1])
    edges = np.concatenate(([s_last], np.arange(k0, n + 1) / n))
    masses = weight.kappa_mass(edges[:-1], edges[1:], kappa)
    closure = float(np.dot(masses, _rank_value(tail, n, np.arange(k0, n + 1))))
    return body + closure


def _mc_sample(model, cfg):
    return annual_loss_sample(model, cfg)


def mc_tail(model: CompoundModel, x: float, cfg: McConfig) -> Estimate:
    return _mc_sample(model, cfg).tail(x)


def mc_var(model: CompoundModel, alpha: float, cfg: McConfig) -> Estimate:
    return _mc_sample(model, cfg).var(alpha)


def mc_es(model: CompoundModel, alpha: float, cfg: McConfig) -> Estimate:
    return _mc_sample(model, cfg).es(alpha)


def mc_srm(model: CompoundModel, kappa: float, weight: SpectralWeight, cfg: McConfig) -> Estimate:
    return _mc_sample(model, cfg).srm(kappa, weight)


# -- exact Poisson / Inverse-Gaussian series --------------------------------------------

def _check_tol(tol):
    if not (0.0 < tol <= 1e-6):
        raise DomainError("tol must lie in (0, 1e-6]")


def exact_tail_poisson_ig(lam, mu_tilde, lambda_tilde, x, tol=1e-12):
    """``P(Z > x)`` for Poisson(lam) counts and IG(mu_tilde, lambda_tilde) losses.

    Sums ``p_n * sf_{IG(n mu, n^2 lambda)}(x)`` until the Poisson mass left
    out is below ``tol``.
    """
    _check_tol(tol)
    if x < 0:
        raise DomainError("x must be nonnegative")
    freq = Poisson(lam)
    if x == 0:
        return -math.expm1(-lam)
    n_max = freq.truncation_point(tol)
    sev = InverseGaussian(mu_tilde, lambda_tilde)
    total = 0.0
    for n in range(1, n_max + 1):
        total += float(freq.pmf(n)) * float(sev.convolve(n).sf(x))
    return total


def exact_var_poisson_ig(lam, mu_tilde, lambda_tilde, alpha, tol=1e-12):
    """Quantile of the Poisson / IG annual loss by bisection on the exact series.

    Raises
    ------
    AtomError
        If ``alpha <= P(Z = 0) = exp(-lam)``.
    """
    _check_tol(tol)
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0, 1)")
    if alpha <= math.exp(-lam):
        raise AtomError(f"alpha={alpha} lies inside the atom P(Z=0)={math.exp(-lam):.6g}")
    target = 1.0 - alpha

    def excess(x):
        return exact_tail_poisson_ig(lam, mu_tilde, lambda_tilde, x, tol) - target

    lo, hi = 0.0, max(lam * mu_tilde, mu_tilde)
    while excess(hi) > 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
