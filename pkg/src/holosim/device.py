"""Truncated transmon / resonator operators and rotating-frame Hamiltonians.

Level ordering inside a transmon is g, e, f, h, ... (indices 0, 1, 2, 3, ...).
The single-transmon-plus-resonator space is ordered transmon (x) resonator and
the two-qubit space transmon_1 (x) resonator (x) transmon_2, so that the
product state |j n k> has index (j * n_photon + n) * n_levels + k.

All Hamiltonians are written in frames co-rotating with the drives, with the
carrier-frequency counter-rotating terms dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hilbert import kron

G, E, F, H = 0, 1, 2, 3
LEVEL_NAMES = "gefhi"

MODES = ("ideal", "faithful")


@dataclass(frozen=True)
class TransmonParams:
    """One transmon: truncation, anharmonicity and decoherence rates (rad/s).

    ``gamma1_g`` and ``gamma2_g`` act on the {g, e} transition, ``gamma1_f`` and
    ``gamma2_f`` on {f, e}.
    """

    anharmonicity: float
    levels: int = 4
    gamma1_g: float = 0.0
    gamma1_f: float = 0.0
    gamma2_g: float = 0.0
    gamma2_f: float = 0.0

    def __post_init__(self):
        if self.levels not in (3, 4, 5):
            raise ValueError(f"transmon levels must be 3, 4 or 5, got {self.levels}")
        if not self.anharmonicity > 0:
            raise ValueError("anharmonicity must be positive")
        for name in ("gamma1_g", "gamma1_f", "gamma2_g", "gamma2_f"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def has_decoherence(self) -> bool:
        return any((self.gamma1_g, self.gamma1_f, self.gamma2_g, self.gamma2_f))

    def without_decoherence(self) -> "TransmonParams":
        return TransmonParams(self.anharmonicity, self.levels)


@dataclass(frozen=True)
class ResonatorParams:
    """Resonator truncation (number of Fock levels), decay rate and per-qubit couplings."""

    couplings: tuple[float, ...] = (0.0, 0.0)
    photon_cutoff: int = 3
    kappa: float = 0.0

    def __post_init__(self):
        if self.photon_cutoff < 2:
            raise ValueError("photon_cutoff must be at least 2")
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if any(g < 0 for g in self.couplings):
            raise ValueError("couplings must be non-negative")
        object.__setattr__(self, "couplings", tuple(float(g) for g in self.couplings))


@dataclass(frozen=True)
class DetuningParams:
    """Two-photon-resonance detuning Delta = w_c - w_ge = w_fe - w_drive.

    With the drive at w_drive, the rotating-frame detunings of the transmon and
    resonator are delta_q = w_ge - w_drive = Delta + alpha and
    delta_r = w_c - w_drive = 2 Delta + alpha, which puts |g,1> and |f,0> on
    resonance (delta_r = 2 delta_q - alpha).
    """

    delta: float

    def qubit_detuning(self, anharmonicity: float) -> float:
        return self.delta + anharmonicity

    def resonator_detuning(self, anharmonicity: float) -> float:
        return 2.0 * self.delta + anharmonicity


@dataclass(frozen=True)
class SystemParams:
    transmon: TransmonParams
    resonator: ResonatorParams = field(default_factory=ResonatorParams)
    detuning: DetuningParams | None = None

    def __post_init__(self):
        if self.detuning is not None and not self.detuning.delta > self.transmon.anharmonicity:
            raise ValueError("two-photon scheme requires Delta > alpha")

    @property
    def dims_single(self) -> tuple[int, int]:
        return (self.transmon.levels, self.resonator.photon_cutoff)

    @property
    def dims_pair(self) -> tuple[int, int, int]:
        return (self.transmon.levels, self.resonator.photon_cutoff, self.transmon.levels)


def lowering_operator(levels: int) -> np.ndarray:
    """Truncated annihilation operator with b[k, k+1] = sqrt(k+1)."""
    if levels < 2:
        raise ValueError("need at least two levels")
    return np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1).astype(complex)


def number_operator(levels: int) -> np.ndarray:
    return np.diag(np.arange(levels, dtype=float)).astype(complex)


def transition(levels: int, i: int, j: int) -> np.ndarray:
    """|i><j| on a ``levels``-dimensional space."""
    op = np.zeros((levels, levels), dtype=complex)
    op[i, j] = 1.0
    return op


def single_qubit_hamiltonian(
    omega_0e: float,
    omega_1e: float,
    phi_0: float,
    phi_1: float,
    mode: str = "ideal",
    anharmonicity: float | None = None,
    t: float = 0.0,
    levels: int | None = None,
) -> np.ndarray:
    """Two-tone resonant drive of the g-e and e-f transitions.

    ``ideal`` gives exactly

        Omega_0e e^{i phi_0}|g><e| + Omega_1e e^{i phi_1}|f><e| + H.c.

    ``faithful`` additionally lets each tone act on every transition through
    the transmon lowering operator. Tone 0 (at w_ge) then drives e-f and f-h
    detuned by alpha, tone 1 (at w_ef) drives g-e detuned by -alpha, and |h>
    sits at -alpha in the frame. Matrix elements of tone 1 are scaled so that
    its e-f element equals Omega_1e.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if omega_0e < 0 or omega_1e < 0:
        raise ValueError("drive amplitudes must be non-negative; use the phases for signs")
    if levels is None:
        levels = 3 if mode == "ideal" else 4
    if levels < 3:
        raise ValueError("single-qubit Hamiltonian needs at least 3 levels")

    low = np.zeros((levels, levels), dtype=complex)
    if mode == "ideal":
        low[G, E] = omega_0e * np.exp(1j * phi_0)
        low[E, F] = omega_1e * np.exp(-1j * phi_1)
        ham = low + low.conj().T
        return ham

    if anharmonicity is None:
        raise ValueError("faithful mode needs the anharmonicity")
    tone0 = omega_0e * np.exp(1j * phi_0)
    tone1 = omega_1e / np.sqrt(2.0) * np.exp(-1j * phi_1)
    rot = np.exp(1j * anharmonicity * t)
    for n in range(levels - 1):
        m = np.sqrt(n + 1.0)
        if n == 0:
            low[n, n + 1] = m * (tone0 + tone1 * np.conj(rot))
        else:
            low[n, n + 1] = m * (tone0 * rot + tone1)
    ham = low + low.conj().T
    n = np.arange(levels)
    ham[n, n] = -anharmonicity * np.maximum(n - 1, 0) * np.maximum(n - 2, 0) / 2.0
    return ham


def _transmon_diagonal(levels: int, detuning: float, anharmonicity: float) -> np.ndarray:
    n = np.arange(levels, dtype=float)
    return detuning * n - 0.5 * anharmonicity * (n - 1.0) * n


def _check_jc_truncation(params: SystemParams):
    if params.transmon.levels < 4:
        raise ValueError("driven JC model needs at least 4 transmon levels to hold |h,0>")
    if params.resonator.photon_cutoff < 2:
        raise ValueError("driven JC model needs at least 2 photon levels to hold |e,1>")
    if params.detuning is None:
        raise ValueError("driven JC model needs DetuningParams")


def driven_jc_hamiltonian(
    params: SystemParams,
    omega: float,
    phi: float = 0.0,
    omega_shift: float = 0.0,
    qubit: int = 0,
) -> np.ndarray:
    """One driven transmon coupled to the resonator, on transmon (x) resonator.

        H0 = delta_r n_a + delta_q n_b - (alpha/2)(n_b - 1) n_b
        H' = g a b^dag + (Omega e^{i phi}/2) b + H.c.

    ``omega_shift`` lowers the drive frequency by that amount, which raises
    both delta_r and delta_q by it (|f,0> moves up relative to |g,1> by
    omega_shift).
    """
    _check_jc_truncation(params)
    nq, nc = params.dims_single
    alpha = params.transmon.anharmonicity
    g = params.resonator.couplings[qubit]
    dq = params.detuning.qubit_detuning(alpha) + omega_shift
    dr = params.detuning.resonator_detuning(alpha) + omega_shift

    b = kron(lowering_operator(nq), np.eye(nc))
    a = kron(np.eye(nq), lowering_operator(nc))
    diag = (
        np.add.outer(_transmon_diagonal(nq, dq, alpha), dr * np.arange(nc)).ravel()
    )
    hp = g * (a @ b.conj().T) + 0.5 * omega * np.exp(1j * phi) * b
    return np.diag(diag).astype(complex) + hp + hp.conj().T


class PairOperators:
    """Cached operators of the transmon (x) resonator (x) transmon space."""

    def __init__(self, params: SystemParams):
        _check_jc_truncation(params)
        self.params = params
        nq, nc, _ = params.dims_pair
        self.dims = (nq, nc, nq)
        self.dim = nq * nc * nq
        iq, ic = np.eye(nq), np.eye(nc)
        bq = lowering_operator(nq)
        self.b1 = kron(bq, ic, iq)
        self.b2 = kron(iq, ic, bq)
        self.a = kron(iq, lowering_operator(nc), iq)
        alpha = params.transmon.anharmonicity
        n = np.arange(nq, dtype=float)
        # per-factor diagonals without detunings
        self.n1 = np.add.outer(np.add.outer(n, np.zeros(nc)), np.zeros(nq)).ravel()
        self.n2 = np.add.outer(np.add.outer(np.zeros(nq), np.zeros(nc)), n).ravel()
        self.na = np.add.outer(np.add.outer(np.zeros(nq), np.arange(nc)), np.zeros(nq)).ravel()
        anh = -0.5 * alpha * (n - 1.0) * n
        self.anh = (
            np.add.outer(np.add.outer(anh, np.zeros(nc)), np.zeros(nq))
            + np.add.outer(np.add.outer(np.zeros(nq), np.zeros(nc)), anh)
        ).ravel()
        self.ab1 = self.a @ self.b1.conj().T
        self.ab2 = self.a @ self.b2.conj().T

    def index(self, j: int | str, n: int, k: int | str) -> int:
        nq, nc, _ = self.dims
        if isinstance(j, str):
            j = LEVEL_NAMES.index(j)
        if isinstance(k, str):
            k = LEVEL_NAMES.index(k)
        return (j * nc + n) * nq + k

    def ket(self, label: str) -> np.ndarray:
        """Product state from a label such as ``"f0g"``."""
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(label[0], int(label[1]), label[2])] = 1.0
        return v


def two_qubit_full_hamiltonian(
    params: SystemParams,
    omega_1: float,
    omega_2: float,
    phi_1: float,
    phi_2: float,
    shift_1: float = 0.0,
    shift_2: float = 0.0,
    coupling_phases: tuple[float, float] = (0.0, 0.0),
    ops: PairOperators | None = None,
) -> np.ndarray:
    """Both transmons driven and coupled to the shared resonator.

    Each transmon is viewed in the frame of its own drive (frequency lowered by
    ``shift_i``); the resonator co-rotates with the mean of the two drive
    frequencies. When the shifts differ, ``coupling_phases[i]`` must hold the
    accumulated phase integral of (shift_i - mean shift) so that the coupling
    of qubit i carries exp(-i * phase).
    """
    if ops is None:
        ops = PairOperators(params)
    alpha = params.transmon.anharmonicity
    dq = params.detuning.qubit_detuning(alpha)
    dr = params.detuning.resonator_detuning(alpha)
    g1, g2 = params.resonator.couplings[:2]
    mean_shift = 0.5 * (shift_1 + shift_2)
    diag = (
        (dq + shift_1) * ops.n1
        + (dq + shift_2) * ops.n2
        + (dr + mean_shift) * ops.na
        + ops.anh
    )
    c1 = g1 * np.exp(-1j * coupling_phases[0])
    c2 = g2 * np.exp(-1j * coupling_phases[1])
    hp = (
        c1 * ops.ab1
        + c2 * ops.ab2
        + 0.5 * omega_1 * np.exp(1j * phi_1) * ops.b1
        + 0.5 * omega_2 * np.exp(1j * phi_2) * ops.b2
    )
    ham = hp + hp.conj().T
    ham[np.diag_indices(ops.dim)] += diag
    return ham
