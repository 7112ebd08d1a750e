"""Exception hierarchy shared across the package.

Each class maps to one failure family surfaced by the CLI exit codes:
config errors -> 5, model/hypothesis violations -> 3, numerical
failures -> 4. Envelope violations are reported as data, not raised.
"""


class WfdensityError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(WfdensityError, ValueError):
    """Caller violated a documented precondition."""


class ConfigError(WfdensityError):
    """Experiment configuration is malformed or inconsistent."""


class NumericDegeneracyError(WfdensityError):
    """A matrix factorization failed beyond the jitter policy."""

    def __init__(self, message, minor=None):
        super().__init__(message)
        self.minor = minor


class NumericalBlowupError(WfdensityError):
    """A path simulation produced non-finite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ModelViolationError(WfdensityError):
    """A user-asserted model bound (|sigma| >= c, |m| <= M, ...) failed at runtime."""


class DegenerateSampleError(WfdensityError):
    """A coupling sample was zero to tolerance; the density formulas require it nonzero."""


class RegressionFailureError(WfdensityError):
    """Conditional-mean regression unusable (e.g. clamped on too many grid points)."""


class DegenerateDataError(WfdensityError):
    """Sample set has no spread; bandwidth selection impossible."""
