"""Exception types raised across the package."""


class CapxError(Exception):
    """Base class for all package errors."""


class ParameterError(CapxError, ValueError):
    """A model parameter lies outside its admissible domain."""


class DomainError(CapxError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class AtomError(DomainError):
    """Requested level falls inside the probability atom of the annual loss at zero."""


class DivergentKernelError(DomainError):
    """A spectral kernel integral does not converge for the given tail index."""


class DegenerateSecondOrderError(DomainError):
    """The second-order ES factor has a vanishing denominator."""


class UnsupportedRegimeError(CapxError):
    """The severity's tail regime is not covered by the requested approximation."""


class InsufficientTailSamplesError(CapxError):
    """Too few Monte Carlo samples lie beyond the requested quantile."""


class NumericError(CapxError, ArithmeticError):
    """A numerical routine (root finder, quadrature) failed to converge.

    Parameters
    ----------
    message : str
    bracket : tuple of float, optional
        Last bracket held by the root finder, when applicable.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class HazardOverflowError(NumericError):
    """The survival function underflowed while evaluating the hazard rate."""

    def __init__(self, x):
        super().__init__(f"survival function underflows at x={x!r}")
        self.x = x


class ConfigError(CapxError):
    """Invalid experiment configuration.

    Parameters
    ----------
    message : str
    path : str
        Dotted path of the offending field, e.g. ``model.severity.sigma``.
    """

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
