"""Unit conversion at the configuration boundary.

Internally every frequency is an angular frequency in rad/s and every time is
in seconds. Configs quote linear frequencies (nu = omega / 2pi) in MHz or kHz
and times in ns.
"""

import math

TWO_PI = 2.0 * math.pi


def mhz(nu):
    return TWO_PI * 1e6 * nu


def khz(nu):
    return TWO_PI * 1e3 * nu


def ns(t):
    return 1e-9 * t


def to_mhz(omega):
    return omega / (TWO_PI * 1e6)


def to_ns(t):
    return t * 1e9
