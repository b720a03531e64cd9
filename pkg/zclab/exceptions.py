"""
Custom exceptions for the zclab package.

This module defines the hierarchy of exceptions raised by the numerical core,
the configuration layer and the file I/O helpers, so callers (and the CLI's
exit-code mapping) can react to a whole family at once.
"""


class ZclError(Exception):
    """Base exception class for all zclab-related errors."""
    pass


class ValidationError(ZclError):
    """Exception raised when an input violates an operation's preconditions."""
    pass


class ConfigError(ValidationError):
    """Exception raised for missing, unknown or malformed configuration keys."""
    pass


class GridMismatchError(ValidationError):
    """Exception raised when operands live on different grids or have the wrong shape."""
    pass


class NumericalError(ZclError):
    """Base exception for failures of a numerical procedure."""
    pass


class ProfileError(NumericalError):
    """Exception raised when the surface profile cannot be built or inverted."""
    pass


class ResolutionError(NumericalError):
    """Exception raised when a per-mode solve is too ill-conditioned for the grid."""
    pass


class IdentityError(NumericalError):
    """Exception raised when two evaluations of the same identity disagree."""

    def __init__(self, message, expected=None, actual=None):
        """
        Initialize IdentityError.

        Args:
            message (str): Error message
            expected (float, optional): Value of the reference evaluation
            actual (float, optional): Value of the checked evaluation
        """
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class StationarityError(NumericalError):
    """Exception raised when a flow is not stationary enough for a stationary-only formula."""

    def __init__(self, message, value=None, residual=None):
        """
        Initialize StationarityError.

        Args:
            message (str): Error message
            value (float, optional): The computed (unreliable) result
            residual (float, optional): Relative stationarity residual of the flow
        """
        super().__init__(message)
        self.value = value
        self.residual = residual


class ExportError(ZclError):
    """Exception raised when reading or writing a data file fails."""
    pass
