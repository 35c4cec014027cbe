"""Pulse envelopes, phase schedules and the cyclic-area condition."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

SHAPES = ("square", "sine_squared_ramp", "sampled")
AREA_RTOL = 1e-6

# integral of the sine-squared-ramp shape divided by (amplitude * duration)
RAMP_AREA_FACTOR = 0.75


@dataclass(frozen=True)
class Envelope:
    """Non-negative amplitude profile on [0, duration], zero outside.

    ``sine_squared_ramp`` rises as sin^2(2 pi t / T) over the first quarter,
    holds, and falls symmetrically over the last quarter. ``sampled`` linearly
    interpolates ``samples`` (pairs of time and value) and ignores
    ``amplitude``.
    """

    shape: str
    amplitude: float
    duration: float
    samples: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown envelope shape {self.shape!r}")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.shape == "sampled":
            if len(self.samples) < 2:
                raise ValueError("sampled envelope needs at least two samples")
            ts = np.array([s[0] for s in self.samples])
            vs = np.array([s[1] for s in self.samples])
            if np.any(np.diff(ts) <= 0):
                raise ValueError("sample times must be strictly increasing")
            if np.any(vs < 0):
                raise ValueError("sampled envelope values must be non-negative")
        elif self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        T = self.duration
        inside = (t >= 0.0) & (t <= T)
        if self.shape == "square":
            v = np.full(t.shape, self.amplitude)
        elif self.shape == "sine_squared_ramp":
            v = np.where(
                t < T / 4,
                np.sin(2 * np.pi * t / T) ** 2,
                np.where(t <= 3 * T / 4, 1.0, np.sin(2 * np.pi * (T - t) / T) ** 2),
            )
            v = self.amplitude * v
        else:
            ts = np.array([s[0] for s in self.samples])
            vs = np.array([s[1] for s in self.samples])
            v = np.interp(t, ts, vs, left=0.0, right=0.0)
        out = np.where(inside, v, 0.0)
        return float(out) if out.ndim == 0 else out

    def breakpoints(self) -> tuple[float, ...]:
        T = self.duration
        if self.shape == "sine_squared_ramp":
            return (0.0, T / 4, 3 * T / 4, T)
        if self.shape == "sampled":
            inner = [s[0] for s in self.samples if 0.0 < s[0] < T]
            return tuple([0.0, *inner, T])
        return (0.0, T)

    def peak(self) -> float:
        if self.shape == "sampled":
            return max(s[1] for s in self.samples)
        return self.amplitude


def envelope_area(e: Envelope) -> float:
    """Integral of the envelope over [0, T]."""
    if e.shape == "sampled":
        # piecewise linear: trapezoid rule is exact on the knots
        ts = np.array([0.0, *[s[0] for s in e.samples if 0 < s[0] < e.duration], e.duration])
        return float(np.trapezoid(e(ts), ts))
    knots = e.breakpoints()
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, _ = quad(e, a, b, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total


@dataclass(frozen=True)
class PhaseSchedule:
    """Piecewise-constant tone phases: segments of (t_start, t_end, phi_0, phi_1)."""

    segments: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        segs = tuple(tuple(float(x) for x in s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("phase schedule needs at least one segment")
        if segs[0][0] != 0.0:
            raise ValueError("phase schedule must start at t = 0")
        for s in segs:
            if not s[1] > s[0]:
                raise ValueError(f"empty or reversed segment {s[:2]}")
        for prev, nxt in zip(segs[:-1], segs[1:]):
            if prev[1] != nxt[0]:
                raise ValueError(f"segments leave a gap or overlap at {prev[1]}")

    @property
    def duration(self) -> float:
        return self.segments[-1][1]

    def boundaries(self) -> tuple[float, ...]:
        return (0.0,) + tuple(s[1] for s in self.segments)

    def phases_at(self, t: float) -> tuple[float, float]:
        for s in self.segments:
            if t < s[1]:
                return s[2], s[3]
        return self.segments[-1][2], self.segments[-1][3]


@dataclass(frozen=True)
class PulseSchedule:
    """Two-tone drive: a shared envelope Omega(t), the mixing angle theta and phases.

    The tone amplitudes are Omega_0e = Omega sin(theta/2) and
    Omega_1e = Omega cos(theta/2). ``noise`` holds per-bin relative amplitude
    errors epsilon over equal sub-intervals of [0, T]; ``frequency_shift`` is an
    optional callable track in rad/s.
    """

    envelope: Envelope
    theta: float
    phases: PhaseSchedule
    noise: tuple[float, ...] | None = None
    frequency_shift: object = None

    def __post_init__(self):
        if not math.isclose(self.envelope.duration, self.phases.duration, rel_tol=1e-12):
            raise ValueError("envelope and phase schedule durations differ")
        if self.noise is None:
            area = envelope_area(self.envelope)
            if not math.isclose(area, math.pi, rel_tol=AREA_RTOL):
                raise ValueError(f"cyclic condition violated: pulse area {area:.9g} != pi")

    @property
    def duration(self) -> float:
        return self.envelope.duration

    def noise_factor(self, t: float) -> float:
        if self.noise is None:
            return 1.0
        n = len(self.noise)
        k = min(max(int(t / self.duration * n), 0), n - 1)
        return 1.0 + self.noise[k]

    def amplitude(self, t: float) -> float:
        return self.envelope(t) * self.noise_factor(t)

    def tone_amplitudes(self, t: float) -> tuple[float, float]:
        om = self.amplitude(t)
        return om * math.sin(self.theta / 2), om * math.cos(self.theta / 2)

    def breakpoints(self) -> tuple[float, ...]:
        pts = set(self.envelope.breakpoints()) | set(self.phases.boundaries())
        if self.noise is not None:
            n = len(self.noise)
            pts |= {self.duration * k / n for k in range(n + 1)}
        return tuple(sorted(pts))


def build_single_loop_schedule(
    theta: float,
    phi: float,
    gamma: float,
    omega_max: float,
    shape: str = "square",
) -> PulseSchedule:
    """Two equal halves with tone phases (phi, pi) then (pi + gamma + phi, gamma).

    The relative phase phi_0 - phi_1 + pi equals ``phi`` on both halves; the
    second half flips the overall drive phase by gamma - pi. The duration is
    chosen so that the envelope area is pi.
    """
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    if not 0.0 <= theta <= math.pi:
        raise ValueError("theta must lie in [0, pi]")
    if shape == "square":
        T = math.pi / omega_max
    elif shape == "sine_squared_ramp":
        T = math.pi / (RAMP_AREA_FACTOR * omega_max)
    else:
        raise ValueError(f"single-loop schedules support square or sine_squared_ramp, not {shape!r}")
    env = Envelope(shape, omega_max, T)
    phases = PhaseSchedule(
        (
            (0.0, T / 2, phi % (2 * math.pi), math.pi),
            (T / 2, T, (math.pi + gamma + phi) % (2 * math.pi), gamma % (2 * math.pi)),
        )
    )
    return PulseSchedule(env, theta, phases)


def apply_amplitude_noise(
    s: PulseSchedule, eps_max: float, bins: int, seed
) -> PulseSchedule:
    """Multiply the amplitude by 1 + eps(t), eps piecewise constant over ``bins``.

    Bin values are drawn uniformly from [-eps_max, eps_max] and shifted to zero
    mean. The same seed always gives the same schedule.
    """
    if eps_max < 0:
        raise ValueError("eps_max must be non-negative")
    if bins < 1:
        raise ValueError("bins must be at least 1")
    if eps_max == 0:
        return s
    rng = np.random.default_rng(seed)
    eps = rng.uniform(-eps_max, eps_max, size=bins)
    eps = eps - eps.mean()
    return replace(s, noise=tuple(float(x) for x in eps))
