"""Pulse-level simulation of nonadiabatic holonomic gates on transmon qutrits."""

from . import calibration, device, holonomy, hilbert, lindblad, pulses, units
from .errors import CalibrationError, ConfigError, InvariantError

__all__ = [
    "calibration",
    "device",
    "holonomy",
    "hilbert",
    "lindblad",
    "pulses",
    "units",
    "CalibrationError",
    "ConfigError",
    "InvariantError",
]
