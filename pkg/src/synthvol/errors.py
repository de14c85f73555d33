"""Exception types shared across the package."""


class SynthvolError(Exception):
    """Base class for all package errors."""


class ValidationError(SynthvolError):
    """Malformed inputs: bad shapes, bad config values, bad files."""


class NonpositiveVariance(SynthvolError):
    """The variance recursion produced a value <= 0."""


class NonstationaryParams(SynthvolError):
    """sum(alpha) + sum(beta) >= 1 where stationarity is required."""


class InvalidShockWindow(SynthvolError):
    """Shock window falls outside the series."""


class InsufficientHistory(SynthvolError):
    """Not enough observations to supply the required lags or a fit."""


class NotConverged(SynthvolError):
    """Optimizer failed hard (fits normally report converged=False instead)."""


class DegenerateData(SynthvolError):
    """Input data carries no usable signal (e.g. zero-variance returns)."""


class DimensionMismatch(SynthvolError):
    """Vector/matrix dimensions do not agree."""


class BlockCountMismatch(SynthvolError):
    """Intraday data does not split into the expected number of blocks."""


class NonpositiveInput(SynthvolError):
    """Loss arguments must be strictly positive."""


class NonpositiveGroundTruth(SynthvolError):
    """APE requires a strictly positive ground truth."""


class DomainError(SynthvolError):
    """Argument outside the mathematical domain of the function."""


class ReplicationFailed(SynthvolError):
    """A Monte Carlo replication could not be completed."""


class ConfigurationInfeasible(SynthvolError):
    """A leave-one-out configuration cannot be evaluated."""
