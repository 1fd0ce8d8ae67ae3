"""Exception hierarchy shared by all dualion modules.

The CLI maps these onto process exit codes: ConfigError -> 1,
DomainError (and subclasses) -> 2, ConvergenceError -> 3.
"""


class DualionError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(DualionError):
    """Invalid or inconsistent configuration input."""


class DomainError(DualionError):
    """Operation called outside its domain of validity."""


class ConvergenceError(DualionError):
    """Iterative solver failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoBridgeableTooth(DomainError):
    """No comb tooth can bridge the splitting within the AOM tuning span."""

    def __init__(self, message, nearest_tooth, residual):
        super().__init__(message)
        self.nearest_tooth = nearest_tooth
        self.residual = residual


class OutOfBand(DomainError):
    """A solved AOM frequency falls outside the configured band."""

    def __init__(self, message, frequency):
        super().__init__(message)
        self.frequency = frequency


class NotThermalizable(DomainError):
    """Sideband ratio >= 1, no finite thermal occupation reproduces it."""


class DegenerateModes(DomainError):
    """Gate design requires two distinct motional mode frequencies."""


class Uncalibratable(DomainError):
    """Amplitude calibration impossible (zero or wrong-sign base phase)."""


class InfeasibleObservation(DomainError):
    """Observed counts cannot be produced by any simplex distribution."""


class DegeneratePhases(DomainError):
    """Parity fit design matrix is rank deficient."""
