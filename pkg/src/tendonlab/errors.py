"""Exception types shared across the package."""


class TendonLabError(Exception):
    """Base class for package errors."""


class NumericalDivergence(TendonLabError):
    """Simulation state exceeded the divergence bound or became non-finite.

    Carries the index of the offending output sample when raised from a
    rollout, so callers can keep the valid prefix.
    """

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index


class InvalidArchitecture(TendonLabError):
    """Network layer specification is unusable (width < 1, too few layers)."""


class LimitViolation(TendonLabError):
    """A reference trajectory leaves the configured joint limits."""


class LengthMismatch(TendonLabError):
    """Two time series that must be aligned have different lengths."""


class ConfigError(TendonLabError):
    """Experiment or parameter configuration is invalid."""
