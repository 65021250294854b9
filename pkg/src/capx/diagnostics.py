"""Numerical checks of the heavy-tail properties the approximations rely on.

Reports are advisory: nothing in :mod:`capx.sla` consults them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import streams
from .compound import CompoundModel, McConfig
from .errors import DomainError, NumericError
from .severity import InverseGaussian, Regime, Severity

__all__ = [
    "DiagnosticReport",
    "default_grid",
    "two_fold_sf",
    "subexp_ratio",
    "rv_index_estimate",
    "big_jump_check",
]


@dataclass
class DiagnosticReport:
    """Values of a diagnostic on an increasing ``x`` grid.

    ``converged`` holds when every relative deviation from ``limit_target``
    over the last decile of the grid is below the tolerance used.
    """

    name: str
    grid: list = field(default_factory=list)
    limit_target: float = math.nan
    converged: bool = False
    max_deviation_at_tail: float = math.nan

    @classmethod
    def build(cls, name, xs, values, target, tol):
        xs = [float(v) for v in xs]
        values = [float(v) for v in values]
        if not xs:
            return cls(name, [], float(target), False, math.nan)
        k = max(1, math.ceil(len(xs) / 10))
        tail = np.asarray(values[-k:])
        if math.isfinite(target):
            dev = np.abs(tail / target - 1.0)
            max_dev = float(np.max(dev))
            converged = bool(np.all(dev < tol))
        else:
            max_dev, converged = math.nan, False
        return cls(name, list(zip(xs, values)), float(target), converged, max_dev)


def _check_grid(x_grid):
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise DomainError("x_grid must be strictly increasing and positive")
    return xs


def default_grid(severity: Severity, n_points=15, min_tail=1e-8):
    """Severity quantiles with tail mass log-spaced from 1e-1 to ``min_tail``."""
    q = np.logspace(-1, math.log10(min_tail), n_points)
    return np.asarray(severity.isf(q), dtype=float)


def _convolution_sf_quadrature(sev: Severity, x):
    # P(X1 + X2 > x) = 2 int_0^{x/2} sf(x - y) f(y) dy + sf(x/2)^2
    sf_x = float(sev.sf(x))
    half = 0.5 * x
    knots = [float(v) for v in sev.quantile(np.array([1e-6, 1e-3, 0.1, 0.5, 0.9, 0.99, 0.999]))]
    pts = sorted({0.0, half, *[k for k in knots if 0.0 < k < half]})
    tol = 1e-12 * sf_x / len(pts)
    total, err = 0.0, 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        v, e = integrate.quad(lambda y: float(sev.sf(x - y) * sev.pdf(y)), a, b,
                              epsabs=tol, epsrel=1e-12, limit=400)
        total += v
        err += e
    if err > 1e-6 * sf_x:
        raise NumericError(f"convolution quadrature error {err:.3g} at x={x}")
    return 2.0 * total + float(sev.sf(half)) ** 2


def two_fold_sf(sev: Severity, x, method="auto"):
    """``P(X1 + X2 > x)``; closed form for the Inverse-Gaussian when ``method`` allows."""
    if method not in ("auto", "closed_form", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    if method != "quadrature" and isinstance(sev, InverseGaussian):
        return float(sev.convolve(2).sf(x))
    if method == "closed_form":
        raise DomainError("closed-form convolution is only available for the Inverse-Gaussian")
    return _convolution_sf_quadrature(sev, x)


def subexp_ratio(model: Severity, x_grid, tol=0.01, method="auto") -> DiagnosticReport:
    """Ratio ``P(X1 + X2 > x) / P(X1 > x)`` against its subexponential limit 2."""
    xs = _check_grid(x_grid)
    values = [two_fold_sf(model, float(x), method) / float(model.sf(x)) for x in xs]
    return DiagnosticReport.build("subexp_ratio", xs, values, 2.0, tol)


def rv_index_estimate(model: Severity, x_grid, tol=1e-3, target=None) -> DiagnosticReport:
    """Local tail index ``-log(sf(2x)/sf(x)) / log 2``.

    The target defaults to the model's regular-variation index; for models
    that are not regularly varying it is NaN and the report never converges.
    """
    xs = _check_grid(x_grid)
    if target is None:
        info = model.tail_info()
        target = info.rho if info.regime == Regime.REGULARLY_VARYING else math.nan
    l1 = np.asarray(model.logsf(xs), dtype=float)
    l2 = np.asarray(model.logsf(2.0 * xs), dtype=float)
    ok = np.isfinite(l1) & np.isfinite(l2)
    if not np.all(ok):
        cut = int(np.argmin(ok))
        warnings.warn(f"survival function underflows beyond x={xs[cut]:.6g}; grid truncated")
        xs, l1, l2 = xs[:cut], l1[:cut], l2[:cut]
    values = -(l2 - l1) / math.log(2.0)
    return DiagnosticReport.build("rv_index", xs, values, target, tol)


def _big_jump_counts(sev, xs, n, seed, block, size):
    rng = streams.block_rng(seed, block, (streams.DIAGNOSTIC, n))
    draws = np.asarray(sev.sample(rng, (size, n)), dtype=float)
    sums = np.sort(draws.sum(axis=1))
    maxes = np.sort(draws.max(axis=1))
    return (size - np.searchsorted(sums, xs, side="right"),
            size - np.searchsorted(maxes, xs, side="right"))


def big_jump_check(model: CompoundModel, x_grid, cfg: McConfig, n_summands=(2, 5),
                   tol=0.1, min_exceedances=10):
    """Monte Carlo ratio ``P(X1+...+Xn > x) / P(max Xi > x)`` against the limit 1.

    Returns one report per entry of ``n_summands``. Grid points with fewer than
    ``min_exceedances`` maxima beyond ``x`` end the report, with a warning.
    """
    xs = _check_grid(x_grid)
    sev = model.severity
    if sev.tail_info().regime == Regime.LIGHT_TAIL:
        raise DomainError("big-jump check needs a subexponential severity")
    reports = []
    for n in n_summands:
        name = f"big_jump_n{n}"
        if n == 1:
            reports.append(DiagnosticReport.build(name, xs, np.ones_like(xs), 1.0, tol))
            continue
        parts = streams.map_blocks(
            lambda b, m: _big_jump_counts(sev, xs, n, cfg.seed, b, m), cfg.n_samples, cfg.n_workers)
        c_sum = np.sum([p[0] for p in parts], axis=0)
        c_max = np.sum([p[1] for p in parts], axis=0)
        keep = c_max >= min_exceedances
        if not np.all(keep):
            cut = int(np.argmin(keep))
            warnings.warn(f"{name}: fewer than {min_exceedances} exceedances beyond x={xs[cut]:.6g}; "
                          "grid truncated")
        else:
            cut = len(xs)
        reports.append(DiagnosticReport.build(name, xs[:cut], c_sum[:cut] / c_max[:cut], 1.0, tol))
    return reports
