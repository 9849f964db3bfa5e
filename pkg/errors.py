"""
Errors for the selfdecomp toolkit.
Every failure raised by the library derives from SelfDecompError so callers
(the CLI in particular) can map them onto exit codes.
"""


class SelfDecompError(Exception):
    """Base class for all toolkit errors"""


class DomainError(SelfDecompError, ValueError):
    """An argument lies outside the domain of the operation"""


class ConfigError(SelfDecompError, ValueError):
    """A configuration value violates its invariant"""


class ModelDescriptorError(SelfDecompError, ValueError):
    """A model descriptor could not be turned into a DistributionModel"""


class NonFiniteError(SelfDecompError, ArithmeticError):
    """A special function would have returned NaN or infinity"""


class SeriesConvergenceError(SelfDecompError, ArithmeticError):
    """A power series did not reach its cutoff within the term budget"""


class QuadratureError(SelfDecompError, ArithmeticError):
    """
    Adaptive quadrature did not converge.

    Args:
        message: Human readable description
        partial: The value accumulated so far
        residual: The error estimate attached to ``partial``
    """

    def __init__(self, message, partial=float("nan"), residual=float("inf")):
        super().__init__(message)
        self.partial = partial
        self.residual = residual

    def __str__(self):
        base = super().__str__()
        return f"{base} (partial={self.partial!r}, residual={self.residual!r})"
