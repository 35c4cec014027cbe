"""Exception types shared across the package."""


class InvariantError(ValueError):
    """A quantum-state or operator invariant was violated."""


class CalibrationError(RuntimeError):
    """The calibration could not be carried out in the requested regime."""


class ConfigError(ValueError):
    """An experiment configuration is malformed."""
