"""Risk-aversion weight functions for spectral risk measures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = ["SpectralWeight"]


@dataclass(frozen=True)
class SpectralWeight:
    """Weight ``phi_1`` on ``[0, 1]`` integrating to one.

    ``kind`` is ``"flat"`` (recovers Expected Shortfall) or ``"cara"``,
    the constant-absolute-risk-aversion weight
    ``phi_1(t) = xi * exp(-xi (1 - t)) / (1 - exp(-xi))``.
    """

    kind: str = "flat"
    xi: float | None = None

    def __post_init__(self):
        if self.kind == "flat":
            if self.xi is not None:
                raise ParameterError("flat weight takes no risk-aversion coefficient")
        elif self.kind == "cara":
            if self.xi is None or not (self.xi > 0 and math.isfinite(self.xi)):
                raise ParameterError("CARA weight needs xi > 0")
        else:
            raise ParameterError(f"unknown spectral weight kind {self.kind!r}")

    @classmethod
    def flat(cls):
        return cls("flat")

    @classmethod
    def cara(cls, xi):
        return cls("cara", float(xi))

    def phi1(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "flat":
            return np.ones_like(t)
        return self.xi * np.exp(-self.xi * (1.0 - t)) / -math.expm1(-self.xi)

    def phi1_reflected(self, u):
        """``phi_1(1 - u)``, evaluated without forming ``1 - u``."""
        u = np.asarray(u, dtype=float)
        if self.kind == "flat":
            return np.ones_like(u)
        return self.xi * np.exp(-self.xi * u) / -math.expm1(-self.xi)

    def _antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "flat":
            return t
        return np.exp(-self.xi * (1.0 - t)) / -math.expm1(-self.xi)

    def phi_kappa(self, s, kappa):
        """Weight rescaled to ``[kappa, 1]``; zero below ``kappa``."""
        s = np.asarray(s, dtype=float)
        w = 1.0 - kappa
        return np.where(s >= kappa, self.phi1(1.0 - (1.0 - s) / w) / w, 0.0)

    def kappa_mass(self, a, b, kappa):
        """``int_a^b phi_kappa(s) ds`` for ``kappa <= a <= b <= 1``, in closed form."""
        w = 1.0 - kappa
        return (self._antiderivative(1.0 - (1.0 - np.asarray(b)) / w)
                - self._antiderivative(1.0 - (1.0 - np.asarray(a)) / w))
