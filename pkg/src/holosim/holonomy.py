"""Closed-form holonomic gates: dark/bright states, single-loop and two-qubit gates.

These are the analytic references the simulations are checked against. All
comparisons between gates are made modulo a global phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .device import E, F, G

QUBIT_LEVELS = (G, F)


@dataclass(frozen=True)
class SingleQubitGateSpec:
    """Rotation axis (theta, phi) and angle parameter gamma of the single-loop gate."""

    theta: float
    phi: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.theta <= math.pi + 1e-12:
            raise ValueError("theta must lie in [0, pi]")
        object.__setattr__(self, "phi", self.phi % (2 * math.pi))
        object.__setattr__(self, "gamma", self.gamma % (2 * math.pi))


@dataclass(frozen=True)
class TwoQubitGateSpec:
    """Mixing angle of the two-qubit gate, tan(vartheta/2) = g1 / g2."""

    vartheta: float

    def __post_init__(self):
        if not 0.0 <= self.vartheta <= math.pi:
            raise ValueError("vartheta must lie in [0, pi]")

    @classmethod
    def from_couplings(cls, g1: float, g2: float) -> "TwoQubitGateSpec":
        return cls(2.0 * math.atan2(g1, g2))


def bright_dark_states(theta: float, phi: float, levels: int = 3):
    """Return (|b>, |d>) of the two-tone drive on a ``levels``-level transmon.

    |b> = sin(theta/2) e^{i phi}|g> - cos(theta/2)|f> couples to |e>;
    |d> = cos(theta/2)|g> + sin(theta/2) e^{-i phi}|f> is orthogonal to it.
    """
    s, c = math.sin(theta / 2), math.cos(theta / 2)
    b = np.zeros(levels, dtype=complex)
    d = np.zeros(levels, dtype=complex)
    b[G], b[F] = s * np.exp(1j * phi), -c
    d[G], d[F] = c, s * np.exp(-1j * phi)
    return b, d


def u1_matrix(spec: SingleQubitGateSpec) -> np.ndarray:
    """Single-loop gate on {|g>, |f>}, with the global phase e^{i gamma/2} removed."""
    th, ph, ga = spec.theta, spec.phi, spec.gamma
    c, s = math.cos(ga / 2), math.sin(ga / 2)
    return np.array(
        [
            [c - 1j * s * math.cos(th), -1j * s * math.sin(th) * np.exp(1j * ph)],
            [-1j * s * math.sin(th) * np.exp(-1j * ph), c + 1j * s * math.cos(th)],
        ]
    )


def segment_operators(spec: SingleQubitGateSpec, levels: int = 3):
    """Evolution operators (U_a, U_b) of the two half-loops on the full transmon."""
    b, d = bright_dark_states(spec.theta, spec.phi, levels)
    e = np.zeros(levels, dtype=complex)
    e[E] = 1.0
    dd = np.outer(d, d.conj())
    be, eb = np.outer(b, e.conj()), np.outer(e, b.conj())
    eg = np.exp(1j * spec.gamma)
    ua = dd - 1j * (be + eb)
    ub = dd + 1j * (eg * be + np.conj(eg) * eb)
    return ua, ub


def u1_from_segments(spec: SingleQubitGateSpec, levels: int = 3) -> np.ndarray:
    ua, ub = segment_operators(spec, levels)
    return ub @ ua


def qubit_block(u: np.ndarray, levels=QUBIT_LEVELS) -> np.ndarray:
    idx = np.asarray(levels)
    return u[np.ix_(idx, idx)]


def embed_qubit_gate(u2x2: np.ndarray, levels: int) -> np.ndarray:
    """Lift a {g, f} gate to a ``levels``-level transmon, identity elsewhere."""
    u = np.eye(levels, dtype=complex)
    idx = np.asarray(QUBIT_LEVELS)
    u[np.ix_(idx, idx)] = u2x2
    return u


def phase_aligned_deviation(u: np.ndarray, v: np.ndarray) -> float:
    """Max entrywise |u e^{i chi} - v| with chi maximizing |tr(u^dag v)|."""
    u, v = np.asarray(u), np.asarray(v)
    ov = np.vdot(u, v)
    chi = np.angle(ov) if abs(ov) > 0 else 0.0
    return float(np.max(np.abs(u * np.exp(1j * chi) - v)))


def gate_overlap(u: np.ndarray, v: np.ndarray) -> float:
    """|tr(u^dag v)| / dim, equal to 1 iff the gates agree up to a global phase."""
    return float(abs(np.vdot(u, v)) / u.shape[0])


def _su2_params(v: np.ndarray):
    c = 0.5 * (v[0, 0] + v[1, 1]).real
    sz = -v[0, 0].imag
    sxy = 1j * v[0, 1]
    s = math.hypot(sz, abs(sxy))
    if s < 1e-12:
        return (0.0, 0.0, 0.0) if c > 0 else None
    gamma = 2.0 * math.atan2(s, c)
    theta = math.atan2(abs(sxy), sz)
    phi = float(np.angle(sxy)) % (2 * math.pi) if abs(sxy) > 1e-12 else 0.0
    return theta, phi, gamma


def decompose_su2(u: np.ndarray, atol: float = 1e-10) -> SingleQubitGateSpec:
    """Invert ``u1_matrix``: find (theta, phi, gamma) reproducing ``u`` up to phase.

    Of the two equivalent parameter sets the one with the smaller phi (then the
    smaller theta) is returned; when the rotation is trivial theta = phi = 0.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("decompose_su2 expects a 2x2 matrix")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > atol:
        raise ValueError("matrix is not unitary")
    v = u / np.sqrt(np.linalg.det(u))
    cands = [p for p in (_su2_params(v), _su2_params(-v)) if p is not None]
    theta, phi, gamma = min(cands, key=lambda p: (round(p[1], 9), round(p[0], 9)))
    if abs(math.sin(gamma / 2)) < 1e-12:
        return SingleQubitGateSpec(0.0, 0.0, 0.0)
    return SingleQubitGateSpec(min(theta, math.pi), phi, gamma)


def u2_matrix(spec: TwoQubitGateSpec) -> np.ndarray:
    """Two-qubit gate on {|gg>, |fg>, |gf>, |ff>}."""
    c, s = math.cos(spec.vartheta), math.sin(spec.vartheta)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, s, 0],
            [0, s, -c, 0],
            [0, 0, 0, -1],
        ],
        dtype=complex,
    )


def effective_three_level_hamiltonian(
    g1: float, g2: float, phi_1: float = 0.0, phi_2: float = math.pi
) -> np.ndarray:
    """Resonant couplings in the single-excitation space {|f0g>, |g0f>, |g1g>}.

    H = (g1 e^{-i phi_1}|f0g> + g2 e^{-i phi_2}|g0f>)<g1g| + H.c.; with the
    default phases this is g (sin(vt/2)|f0g> - cos(vt/2)|g0f>)<g1g| + H.c.
    """
    h = np.zeros((3, 3), dtype=complex)
    h[0, 2] = g1 * np.exp(-1j * phi_1)
    h[1, 2] = g2 * np.exp(-1j * phi_2)
    return h + h.conj().T


def two_qubit_bright_dark(vartheta: float):
    """(|b>_2, |d>_2) in the {|f0g>, |g0f>, |g1g>} basis."""
    s, c = math.sin(vartheta / 2), math.cos(vartheta / 2)
    return np.array([s, -c, 0], dtype=complex), np.array([c, s, 0], dtype=complex)
