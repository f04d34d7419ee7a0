"""Shared exception types."""


class ConfigurationError(ValueError):
    """A config value or combination of values is invalid."""


class CalibrationError(ValueError):
    """The requested link calibration target cannot be met."""


class EstimationError(RuntimeError):
    """A channel estimate could not be formed from the given samples."""
