"""First- and second-order single-loss approximations.

Tail approximations of the annual loss and the VaR, ES and spectral risk
measures derived from them. Throughout, ``tail_index`` is the
regular-variation index of the severity survival function (so that
``sf(x) ~ x**-tail_index``); it is never the confidence level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special

from .compound import CompoundModel
from .errors import (
    DegenerateSecondOrderError,
    DivergentKernelError,
    DomainError,
    NumericError,
    UnsupportedRegimeError,
)
from .severity import Pareto, Regime
from .spectral import SpectralWeight

__all__ = [
    "TailApprox",
    "SpectralWeight",
    "SecondOrderAux",
    "SubexpSeverityDominant",
    "RvSeverityDominant",
    "RvFrequencyDominant",
    "Balanced",
    "sla1_tail",
    "sla1_tail_regime",
    "sla2_tail",
    "sla2_tail_alt",
    "c_beta",
    "sla1_var",
    "sla2_var",
    "srm_kernel_K",
    "srm_kernel_M",
    "sla1_es",
    "sla1_srm",
    "sla2_es",
    "sla2_srm",
    "insurance_mitigated_tail",
]


class TailApprox(NamedTuple):
    """Approximate tail probability; ``valid`` is False when it had to be clamped to [0, 1]."""

    value: float
    valid: bool


def _clamp(v):
    v = float(v)
    if v > 1.0:
        return TailApprox(1.0, False)
    if v < 0.0:
        return TailApprox(0.0, False)
    return TailApprox(v, True)


# -- regimes of the first-order theorem ----------------------------------------------------

@dataclass(frozen=True)
class SubexpSeverityDominant:
    pass


@dataclass(frozen=True)
class RvSeverityDominant:
    rho: float


@dataclass(frozen=True)
class RvFrequencyDominant:
    beta: float


@dataclass(frozen=True)
class Balanced:
    c: float
    rho: float


def _need(**kw):
    for name, v in kw.items():
        if v is None:
            raise DomainError(f"regime requires input {name!r}")
        if not math.isfinite(v):
            raise DomainError(f"regime requires finite {name!r}")


def sla1_tail_regime(regime, *, mean_n=None, sf_x=None, sf_n=None, mean_x=None) -> float:
    """First-order compound tail for each regime of the first-order theorem.

    ``sf_x`` and ``sf_n`` are ``P(X > x)`` and ``P(N > x)`` at the point of
    interest. Severity-dominant regimes give ``E[N] sf_x``; frequency
    dominance gives ``E[X]**beta sf_n``; the balanced case gives
    ``sf_x (E[N] + c E[X]**rho)``.
    """
    if isinstance(regime, SubexpSeverityDominant):
        _need(mean_n=mean_n, sf_x=sf_x)
        return mean_n * sf_x
    if isinstance(regime, RvSeverityDominant):
        if not regime.rho > 0:
            raise DomainError("severity tail index must be positive")
        _need(mean_n=mean_n, sf_x=sf_x)
        return mean_n * sf_x
    if isinstance(regime, RvFrequencyDominant):
        if not regime.beta >= 0:
            raise DomainError("frequency tail index must be nonnegative")
        _need(mean_x=mean_x, sf_n=sf_n)
        return mean_x**regime.beta * sf_n
    if isinstance(regime, Balanced):
        if regime.rho < 1 or regime.c < 0:
            raise DomainError("balanced regime needs rho >= 1 and c >= 0")
        _need(mean_n=mean_n, sf_x=sf_x, mean_x=mean_x)
        return sf_x * (mean_n + regime.c * mean_x**regime.rho)
    raise DomainError(f"unknown regime {regime!r}")


# -- compound tail ---------------------------------------------------------------------------

def _check_subexp(model):
    info = model.severity.tail_info()
    if info.regime == Regime.LIGHT_TAIL:
        raise UnsupportedRegimeError("single-loss approximations need a subexponential severity")
    return info


def sla1_tail(model: CompoundModel, x) -> TailApprox:
    """``E[N] P(X > x)``, clamped to 1 (and flagged) where it exceeds one."""
    _check_subexp(model)
    if x < 0:
        raise DomainError("x must be nonnegative")
    return _clamp(model.frequency.mean() * float(model.severity.sf(x)))


def c_beta(beta) -> float:
    """Constant of the infinite-mean second-order correction.

    ``c_1 = 1`` and ``c_beta = (1 - beta) Gamma(1 - 1/beta)^2 / (2 Gamma(1 - 2/beta))``
    otherwise; the pole of ``Gamma(1 - 2/beta)`` at ``beta = 2`` gives 0.
    """
    if not beta >= 1:
        raise DomainError("beta must be at least 1")
    if beta == 1:
        return 1.0
    return float((1.0 - beta) * special.gamma(1.0 - 1.0 / beta) ** 2
                 * special.rgamma(1.0 - 2.0 / beta) / 2.0)


def sla2_tail(model: CompoundModel, x) -> TailApprox:
    """Second-order compound tail.

    Finite-mean severities: ``E[N] sf(x) + E[N(N-1)] E[X] f(x)``.
    Regularly varying infinite-mean severities with index ``rho <= 1``:
    ``E[N] sf(x) + c_beta E[N(N-1)] f(x) int_0^x sf``, ``beta = 1/rho``.
    """
    info = _check_subexp(model)
    if not x > 0:
        raise DomainError("x must be positive")
    sev, freq = model.severity, model.frequency
    first = freq.mean() * float(sev.sf(x))
    if info.has_finite_mean:
        corr = freq.factorial_moment2() * sev.mean() * float(sev.pdf(x))
    elif info.regime == Regime.REGULARLY_VARYING:
        corr = (c_beta(1.0 / info.rho) * freq.factorial_moment2()
                * float(sev.pdf(x)) * sev.integrated_sf(x))
    else:
        raise UnsupportedRegimeError("infinite-mean severity that is not regularly varying")
    return _clamp(first + corr)


def _alt_coefficient(rho):
    if rho == 1:
        return 2.0
    return -(2.0 - rho) * special.gamma(2.0 - rho) / ((rho - 1.0) * special.gamma(3.0 - 2.0 * rho))


def sla2_tail_alt(model: CompoundModel, x) -> TailApprox:
    """Alternate second-order tail for regularly varying severities with ``0 < rho <= 1``.

    Uses the branch constants stated directly in terms of ``rho``, applied to
    ``E[N(N-1)/2] f(x) int_0^x sf``. At ``rho = 1`` it coincides with
    :func:`sla2_tail`; for interior ``rho`` the two generally differ and both
    are reported by the experiment runner.
    """
    info = model.severity.tail_info()
    if info.regime != Regime.REGULARLY_VARYING or not (0 < info.rho <= 1):
        raise UnsupportedRegimeError("alternate form needs a regularly varying tail with 0 < rho <= 1")
    if not x > 0:
        raise DomainError("x must be positive")
    sev, freq = model.severity, model.frequency
    first = freq.mean() * float(sev.sf(x))
    corr = (_alt_coefficient(info.rho) * 0.5 * freq.factorial_moment2()
            * float(sev.pdf(x)) * sev.integrated_sf(x))
    return _clamp(first + corr)


# -- VaR --------------------------------------------------------------------------------------

def _tail_level(model, alpha):
    if not (0.0 < alpha < 1.0):
        raise DomainError("alpha must lie in (0, 1)")
    q = (1.0 - alpha) / model.frequency.mean()
    if not (0.0 < q < 1.0):
        raise DomainError(f"transformed level 1 - (1-alpha)/E[N] = {1 - q:.6g} is outside (0, 1)")
    return q


def sla1_var(model: CompoundModel, alpha) -> float:
    """Severity quantile at ``1 - (1 - alpha)/E[N]``."""
    _check_subexp(model)
    return float(model.severity.isf(_tail_level(model, alpha)))


def _second_order_var_terms(model):
    """``(c_tilde, g1)`` of the second-order VaR for the model's mean regime."""
    info = _check_subexp(model)
    sev, freq = model.severity, model.frequency
    ratio = freq.factorial_moment2() / freq.mean()
    if info.has_finite_mean:
        return sev.mean() * ratio, lambda x: float(sev.hazard(x))
    if info.regime != Regime.REGULARLY_VARYING:
        raise UnsupportedRegimeError("infinite-mean severity that is not regularly varying")
    return (c_beta(1.0 / info.rho) * ratio,
            lambda x: sev.integrated_sf(x) * float(sev.hazard(x)))


def sla2_var(model: CompoundModel, alpha) -> float:
    """Second-order VaR ``F^-1(1 - (1-alpha)/E[N] / (1 + c_tilde g1(F^-1(alpha_tilde))))``."""
    q = _tail_level(model, alpha)
    c_tilde, g1 = _second_order_var_terms(model)
    x1 = float(model.severity.isf(q))
    factor = 1.0 + c_tilde * g1(x1)
    if not factor > 0:
        raise DomainError("second-order correction factor is not positive")
    return float(model.severity.isf(q / factor))


# -- spectral kernels -------------------------------------------------------------------------

def _check_index(tail_index):
    if not tail_index > 1:
        raise DivergentKernelError(f"kernel diverges for tail index {tail_index} <= 1")


def _alg_quad(weight, power):
    """``int_0^1 u^power phi_1(1-u) du`` with the algebraic factor handled by QAWS."""
    return integrate.quad(weight.phi1_reflected, 0.0, 1.0, weight="alg",
                          wvar=(power, 0.0), epsabs=0.0, epsrel=1e-11, limit=200)


def srm_kernel_K(tail_index, weight: SpectralWeight) -> float:
    """``int_1^inf s^(1/a - 2) phi_1(1 - 1/s) ds`` as ``int_0^1 u^(-1/a) phi_1(1-u) du``."""
    _check_index(tail_index)
    val, err = _alg_quad(weight, -1.0 / tail_index)
    if err > 1e-9 * abs(val):
        raise NumericError(f"K kernel quadrature error {err:.3g}")
    return float(val)


def srm_kernel_M(tail_index, weight: SpectralWeight, rho2) -> float:
    """Second-order kernel ``(1/rho) int_1^inf t^(1/a-2) (t^rho - 1) phi_1(1-1/t) dt``.

    ``rho2 = 0`` returns the limit ``int_1^inf t^(1/a-2) ln t phi_1(1-1/t) dt``.
    """
    _check_index(tail_index)
    if rho2 > 0:
        raise DivergentKernelError("second-order index must be nonpositive")
    a = -1.0 / tail_index
    if abs(rho2) >= 1e-2:
        # (u^-rho - 1)/rho split into two algebraic-weight integrals
        hi, e1 = _alg_quad(weight, a - rho2)
        lo, e2 = _alg_quad(weight, a)
        val, err = (hi - lo) / rho2, (e1 + e2) / abs(rho2)
    else:
        # near rho = 0: -ln(u) * exprel(-rho ln u), with the log carried by the weight
        def f(u):
            y = -rho2 * math.log(u) if u > 0 else (-math.inf if rho2 < 0 else 0.0)
            return -special.exprel(y) * float(weight.phi1_reflected(u))

        val, err = integrate.quad(f, 0.0, 1.0, weight="alg-loga", wvar=(a, 0.0),
                                  epsabs=0.0, epsrel=1e-11, limit=200)
    if err > 1e-9 * max(abs(val), 1e-12):
        raise NumericError(f"M kernel quadrature error {err:.3g}")
    return float(val)


# -- ES / SRM -----------------------------------------------------------------------------------

def _rv_tail_index(model, tail_index):
    info = _check_subexp(model)
    if info.regime != Regime.REGULARLY_VARYING:
        raise UnsupportedRegimeError("ES/SRM approximations need a regularly varying severity")
    idx = info.rho if tail_index is None else tail_index
    if not idx > 1:
        raise DomainError(f"tail index {idx} <= 1: expected shortfall is infinite")
    return idx


def sla1_es(model: CompoundModel, alpha, tail_index=None) -> float:
    idx = _rv_tail_index(model, tail_index)
    return idx / (idx - 1.0) * sla1_var(model, alpha)


def sla1_srm(model: CompoundModel, alpha, weight: SpectralWeight, tail_index=None) -> float:
    idx = _rv_tail_index(model, tail_index)
    return srm_kernel_K(idx, weight) * sla1_var(model, alpha)


@dataclass(frozen=True)
class SecondOrderAux:
    """Second-order regular variation of the tail quantile function ``U_F``.

    ``A`` is regularly varying with index ``rho2 <= 0`` and measures how fast
    ``U_F(tx)/U_F(t)`` approaches ``x**(1/tail_index)``.
    """

    rho2: float
    A: Callable[[float], float]

    def __post_init__(self):
        if self.rho2 > 0:
            raise DomainError("second-order index rho2 must be nonpositive")

    @classmethod
    def exact_pareto(cls, severity: Pareto) -> "SecondOrderAux":
        """Exact auxiliary function for the Lomax tail, where ``U_F(t) = c (t^(1/a) - 1)``.

        Then ``U_F(tx)/U_F(t) - x^(1/a) = (x^(1/a) - 1)/(t^(1/a) - 1)`` which
        matches the second-order form with ``rho2 = -1/a`` and
        ``A(t) = 1 / (a (t^(1/a) - 1))``.
        """
        a = severity.alpha
        return cls(-1.0 / a, lambda t: 1.0 / (a * math.expm1(math.log(t) / a)))


def sla2_srm(model: CompoundModel, kappa, weight: SpectralWeight, aux: SecondOrderAux,
             tail_index=None) -> float:
    idx = _rv_tail_index(model, tail_index)
    q = _tail_level(model, kappa)
    factor = srm_kernel_K(idx, weight) + aux.A(1.0 / q) * srm_kernel_M(idx, weight, aux.rho2)
    return factor * float(model.severity.isf(q))


def es_second_order_coefficient(tail_index, rho2) -> float:
    """``a^2 / ((a - a rho - 1)(a - 1))``, the flat-weight second-order kernel in closed form."""
    a = tail_index
    denom = (a - a * rho2 - 1.0) * (a - 1.0)
    if denom == 0:
        raise DegenerateSecondOrderError("a - a*rho - 1 vanishes")
    return a * a / denom


def sla2_es(model: CompoundModel, kappa, aux: SecondOrderAux, tail_index=None) -> float:
    idx = _rv_tail_index(model, tail_index)
    q = _tail_level(model, kappa)
    factor = idx / (idx - 1.0) + es_second_order_coefficient(idx, aux.rho2) * aux.A(1.0 / q)
    return factor * float(model.severity.isf(q))


# -- insurance mitigation ------------------------------------------------------------------------

def insurance_mitigated_tail(weights, p, q, rho, sf_abs_x) -> float:
    """Tail of ``sum c_i X_i`` for a tail-balanced regularly varying loss.

    ``P(|X| > x) * sum_i [p (c_i^+)^rho + q (c_i^-)^rho]`` with
    ``c^+ = max(c, 0)`` and ``c^- = max(-c, 0)``; zero coefficients contribute nothing.
    """
    if p < 0 or q < 0 or abs(p + q - 1.0) > 1e-12:
        raise DomainError("tail-balance weights must satisfy p, q >= 0 and p + q = 1")
    if rho < 0:
        raise DomainError("rho must be nonnegative")
    if not (0.0 <= sf_abs_x <= 1.0):
        raise DomainError("sf_abs_x must lie in [0, 1]")
    c = np.asarray(weights, dtype=float)
    plus, minus = np.maximum(c, 0.0), np.maximum(-c, 0.0)
    with np.errstate(divide="ignore"):
        pos = np.where(plus > 0, plus**rho, 0.0)
        neg = np.where(minus > 0, minus**rho, 0.0)
    return float(sf_abs_x * np.sum(p * pos + q * neg))
