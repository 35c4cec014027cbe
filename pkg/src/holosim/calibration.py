"""Effective qubit-resonator coupling and ac Stark compensation.

Two routes to the drive-induced |g,1> <-> |f,0> coupling are provided: the
second-order perturbative formulas, and an exact numerical one that
diagonalizes the driven transmon-resonator Hamiltonian and reads the coupling
off the avoided crossing. The numerical route also yields the drive-frequency
offset that keeps the crossing centred, tabulated against drive amplitude in a
CalibrationCurve.

The exact two-level effective Hamiltonian of the crossing is built by
projecting the bare reference states onto the two tracked eigenvectors and
orthonormalizing them symmetrically (Loewdin). Its diagonal difference is the
residual Stark detuning and its off-diagonal element the effective coupling.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import units
from .device import (
    DetuningParams,
    PairOperators,
    ResonatorParams,
    SystemParams,
    TransmonParams,
    driven_jc_hamiltonian,
    two_qubit_full_hamiltonian,
)
from .errors import CalibrationError

VARIANTS = ("appendix", "maintext")
SHIFT_XTOL = 1e-3  # rad/s, far below the 2 pi x 1 kHz budget
MIN_TRACKED_WEIGHT = 0.5
CSV_COLUMNS = ("omega_drive_MHz_amplitude", "delta_s_MHz", "g_eff_MHz")


@dataclass(frozen=True)
class StarkShifts:
    g1: float
    f0: float

    @property
    def difference(self) -> float:
        """eta_g1 - eta_f0, the drive-frequency offset that restores resonance."""
        return self.g1 - self.f0


@dataclass(frozen=True)
class EffectiveCoupling:
    magnitude: float
    phase: float = 0.0
    qubit: int = 0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("coupling magnitude must be non-negative")


def _check_poles(delta: float, alpha: float):
    if not delta > 0:
        raise ValueError("Delta must be positive")
    scale = max(abs(delta), abs(alpha))
    if abs(delta - alpha) < 1e-12 * scale or abs(delta + alpha) < 1e-12 * scale:
        raise ValueError("Delta = +-alpha is a pole of the perturbative expressions")


def perturbative_shifts(g: float, omega: float, delta: float, alpha: float) -> StarkShifts:
    """Second-order level shifts of |g,1> and |f,0>."""
    _check_poles(delta, alpha)
    eta_g1 = g**2 / delta - omega**2 / (4 * (delta + alpha))
    eta_f0 = (
        omega**2 / (2 * delta)
        - 2 * g**2 / (delta + alpha)
        - 3 * omega**2 / (4 * (delta - alpha))
    )
    return StarkShifts(eta_g1, eta_f0)


def perturbative_coupling(
    g: float,
    omega: float,
    delta: float,
    alpha: float,
    variant: str = "appendix",
    phi: float = 0.0,
) -> EffectiveCoupling:
    """Drive-assisted |g,1> <-> |f,0> coupling at second order.

    ``appendix`` interferes the |e,0> and |e,1> paths:
    g Omega alpha / (sqrt2 Delta (Delta + alpha)).
    ``maintext`` is the alternative closed form
    sqrt2 g Omega alpha / (Delta (Delta - alpha)).
    Both carry the drive phase as e^{-i phi}.
    """
    _check_poles(delta, alpha)
    if variant == "appendix":
        val = g * omega * alpha / (math.sqrt(2) * delta * (delta + alpha))
    elif variant == "maintext":
        val = math.sqrt(2) * g * omega * alpha / (delta * (delta - alpha))
    else:
        raise ValueError(f"variant must be one of {VARIANTS}")
    phase = -phi if val >= 0 else math.pi - phi
    return EffectiveCoupling(abs(val), phase % (2 * math.pi))


# --- exact crossing analysis -------------------------------------------------


@dataclass
class CrossingModel:
    """Driven Hamiltonian family H(Omega, shift) plus the two resonant reference states.

    ``single``: one transmon and the resonator, references |g,1> and |f,0>.
    ``pair``: both transmons symmetrically driven with phases (0, pi),
    references |g1g> and the bright state (|f0g> - |g0f>)/sqrt2; the bright
    coupling is sqrt2 times the per-qubit coupling.
    """

    params: SystemParams
    kind: str = "single"
    _ops: PairOperators | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("single", "pair"):
            raise ValueError("model kind must be 'single' or 'pair'")
        if self.kind == "pair":
            self._ops = PairOperators(self.params)
            self.refs = np.stack(
                [
                    self._ops.ket("g1g"),
                    (self._ops.ket("f0g") - self._ops.ket("g0f")) / math.sqrt(2),
                ],
                axis=1,
            )
            self.coupling_scale = 1 / math.sqrt(2)
        else:
            nq, nc = self.params.dims_single
            refs = np.zeros((nq * nc, 2), dtype=complex)
            refs[0 * nc + 1, 0] = 1.0
            refs[2 * nc + 0, 1] = 1.0
            self.refs = refs
            self.coupling_scale = 1.0

    def hamiltonian(self, omega: float, shift: float) -> np.ndarray:
        if self.kind == "single":
            return driven_jc_hamiltonian(self.params, omega, 0.0, shift)
        return two_qubit_full_hamiltonian(
            self.params, omega, omega, 0.0, math.pi, shift, shift, ops=self._ops
        )

    def perturbative_shift(self, omega: float) -> float:
        t = self.params.transmon
        g = self.params.resonator.couplings[0]
        d = self.params.detuning.delta
        s = perturbative_shifts(g, omega, d, t.anharmonicity).difference
        if self.kind == "pair":
            # the spectator transmon pulls the photon state by g^2/Delta
            s += self.params.resonator.couplings[1] ** 2 / d
        return s


@dataclass(frozen=True)
class CrossingPoint:
    heff: np.ndarray  # 2x2 in the (dressed |A>, dressed |B>) basis
    energies: np.ndarray
    vectors: np.ndarray  # d x 2 tracked eigenvectors
    weights: np.ndarray  # reference weight carried by each tracked eigenvector

    @property
    def detuning(self) -> float:
        return float((self.heff[0, 0] - self.heff[1, 1]).real)

    @property
    def coupling(self) -> float:
        return float(abs(self.heff[0, 1]))

    def eigenvector_weights(self) -> np.ndarray:
        """|components|^2 of the two eigenvectors of heff (columns) in the dressed basis."""
        _, v = np.linalg.eigh(self.heff)
        return np.abs(v) ** 2


def analyze_crossing(model: CrossingModel, omega: float, shift: float, track=None) -> CrossingPoint:
    """Diagonalize, pick the two eigenvectors with most weight on ``track``
    (default: the bare references) and build the effective 2x2 Hamiltonian."""
    evals, evecs = np.linalg.eigh(model.hamiltonian(omega, shift))
    track = model.refs if track is None else track
    score = np.sum(np.abs(track.conj().T @ evecs) ** 2, axis=0)
    # stable sort: ties resolved by energy order
    order = np.argsort(-score, kind="stable")[:2]
    order = np.sort(order)
    vecs = evecs[:, order]
    ref_w = np.sum(np.abs(model.refs.conj().T @ vecs) ** 2, axis=0)
    if np.min(ref_w) <= MIN_TRACKED_WEIGHT:
        raise CalibrationError(
            f"tracked eigenstates carry only {np.round(ref_w, 3)} weight on the resonant pair "
            f"at Omega = 2pi x {units.to_mhz(omega):.2f} MHz: perturbative regime broken"
        )
    m = vecs.conj().T @ model.refs
    u, _, vh = np.linalg.svd(m)
    w = u @ vh
    heff = w.conj().T @ np.diag(evals[order]) @ w
    return CrossingPoint(heff, evals[order], vecs, ref_w)


def find_symmetric_shift(
    model: CrossingModel,
    omega: float,
    guess: float | None = None,
    track=None,
    span: float = units.mhz(5.0),
    max_span: float = units.mhz(2000.0),
) -> float:
    """Drive-frequency offset that centres the avoided crossing (equal diagonals)."""
    if guess is None:
        guess = model.perturbative_shift(omega)

    def resid(s):
        return analyze_crossing(model, omega, s, track).detuning

    lo, hi = guess - span, guess + span
    f_lo, f_hi = resid(lo), resid(hi)
    while f_lo * f_hi > 0:
        if hi - lo > max_span:
            raise CalibrationError(
                f"no centred crossing for shifts in [{units.to_mhz(lo):.1f}, "
                f"{units.to_mhz(hi):.1f}] MHz at Omega = 2pi x {units.to_mhz(omega):.2f} MHz"
            )
        width = hi - lo
        lo, hi = lo - width, hi + width
        f_lo, f_hi = resid(lo), resid(hi)
    return brentq(resid, lo, hi, xtol=SHIFT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=500)


def _model(g, delta, alpha, levels, cutoff, kind, g_other=None) -> CrossingModel:
    couplings = (g, g if g_other is None else g_other)
    params = SystemParams(
        TransmonParams(alpha, levels),
        ResonatorParams(couplings, cutoff),
        DetuningParams(delta),
    )
    return CrossingModel(params, kind)


def numeric_coupling(
    g: float,
    omega: float,
    delta: float,
    alpha: float,
    omega_shift: float | None = None,
    *,
    levels: int = 4,
    cutoff: int = 3,
) -> float:
    """Exact effective coupling from the avoided crossing of the driven JC model.

    With ``omega_shift=None`` the crossing is first centred and half the
    energy splitting of the tracked pair is returned; otherwise the
    off-diagonal element of the effective Hamiltonian at that offset.
    """
    model = _model(g, delta, alpha, levels, cutoff, "single")
    if omega == 0:
        return 0.0
    if omega_shift is None:
        s = find_symmetric_shift(model, omega)
        pt = analyze_crossing(model, omega, s)
        return float(0.5 * abs(pt.energies[1] - pt.energies[0]))
    return analyze_crossing(model, omega, omega_shift).coupling


def validate_variant(
    g: float,
    delta: float,
    alpha: float,
    omega: float = units.mhz(20.0),
    rtol: float = 0.10,
    *,
    levels: int = 4,
    cutoff: int = 3,
) -> str | None:
    """Name of the perturbative variant within ``rtol`` of the exact coupling at small drive."""
    exact = numeric_coupling(g, omega, delta, alpha, levels=levels, cutoff=cutoff)
    best = None
    for v in VARIANTS:
        err = abs(perturbative_coupling(g, omega, delta, alpha, v).magnitude / exact - 1)
        if err < rtol and (best is None or err < best[1]):
            best = (v, err)
    return None if best is None else best[0]


# --- calibration curve ---------------------------------------------------------


@dataclass
class CalibrationCurve:
    """Tabulated (Omega, Delta_s, g_eff) in MHz (nu = omega / 2pi).

    ``stark_shift`` and ``coupling`` interpolate with monotone cubics and take
    angular frequencies; ``drive_for_coupling`` inverts the coupling column.
    """

    omega_mhz: np.ndarray
    delta_s_mhz: np.ndarray
    g_eff_mhz: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omega_mhz = np.asarray(self.omega_mhz, dtype=float)
        self.delta_s_mhz = np.asarray(self.delta_s_mhz, dtype=float)
        self.g_eff_mhz = np.asarray(self.g_eff_mhz, dtype=float)
        if not (self.omega_mhz.shape == self.delta_s_mhz.shape == self.g_eff_mhz.shape):
            raise ValueError("calibration columns differ in length")
        if len(self.omega_mhz) < 2:
            raise ValueError("calibration curve needs at least two points")
        if self.omega_mhz[0] != 0.0 or np.any(np.diff(self.omega_mhz) <= 0):
            raise ValueError("Omega grid must start at 0 and increase strictly")
        if self.g_eff_mhz[0] != 0.0:
            raise ValueError("effective coupling must vanish at Omega = 0")
        self._shift = PchipInterpolator(self.omega_mhz, self.delta_s_mhz)
        self._coupling = PchipInterpolator(self.omega_mhz, self.g_eff_mhz)
        self._inverse = (
            PchipInterpolator(self.g_eff_mhz, self.omega_mhz)
            if np.all(np.diff(self.g_eff_mhz) > 0)
            else None
        )

    @property
    def omega_max(self) -> float:
        return units.mhz(self.omega_mhz[-1])

    @property
    def coupling_max(self) -> float:
        return units.mhz(self.g_eff_mhz[-1])

    def _check_omega(self, omega_mhz):
        top = self.omega_mhz[-1]
        if np.any(np.asarray(omega_mhz) > top * (1 + 1e-12)) or np.any(np.asarray(omega_mhz) < 0):
            raise CalibrationError(
                f"drive amplitude outside the calibrated range [0, {top:.3f}] MHz"
            )

    def stark_shift(self, omega):
        om = units.to_mhz(np.asarray(omega, dtype=float))
        self._check_omega(om)
        return units.mhz(self._shift(np.minimum(om, self.omega_mhz[-1])))

    def coupling(self, omega):
        om = units.to_mhz(np.asarray(omega, dtype=float))
        self._check_omega(om)
        return units.mhz(self._coupling(np.minimum(om, self.omega_mhz[-1])))

    def drive_for_coupling(self, g_eff):
        if self._inverse is None:
            raise CalibrationError("effective coupling is not monotone in Omega; cannot invert")
        gm = units.to_mhz(np.asarray(g_eff, dtype=float))
        top = self.g_eff_mhz[-1]
        if np.any(gm > top * (1 + 1e-12)) or np.any(gm < 0):
            raise CalibrationError(
                f"requested coupling 2pi x {np.max(gm):.4f} MHz exceeds the calibrated maximum "
                f"2pi x {top:.4f} MHz (reached at Omega = 2pi x {self.omega_mhz[-1]:.1f} MHz)"
            )
        return units.mhz(self._inverse(np.minimum(gm, top)))

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for row in zip(self.omega_mhz, self.delta_s_mhz, self.g_eff_mhz):
                w.writerow([repr(float(x)) for x in row])
        path.with_suffix(".json").write_text(json.dumps(self.metadata, sort_keys=True, indent=1) + "\n")

    @classmethod
    def from_csv(cls, path) -> "CalibrationCurve":
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if tuple(rows[0]) != CSV_COLUMNS:
            raise ValueError(f"unexpected calibration header {rows[0]}")
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        meta_path = path.with_suffix(".json")
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        return cls(data[:, 0], data[:, 1], data[:, 2], meta)


def default_grid(points: int = 40, omega_max: float = units.mhz(400.0)) -> np.ndarray:
    return np.linspace(0.0, omega_max, points)


def calibrate_omega(
    g: float,
    omega_grid,
    delta: float,
    alpha: float,
    *,
    model: str = "single",
    levels: int = 4,
    cutoff: int = 3,
) -> CalibrationCurve:
    """Centre the avoided crossing at every drive amplitude of ``omega_grid``.

    Tracking follows the eigenpair of the previous grid point (max overlap),
    seeded by the bare references at Omega = 0.
    """
    grid = np.asarray(omega_grid, dtype=float)
    if grid.ndim != 1 or len(grid) < 2 or grid[0] != 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("Omega grid must start at 0 and increase strictly")
    cm = _model(g, delta, alpha, levels, cutoff, model)
    shifts, couplings = [], []
    track = None
    prev_shift = None
    for k, om in enumerate(grid):
        guess = cm.perturbative_shift(om) if prev_shift is None else prev_shift
        s = find_symmetric_shift(cm, om, guess, track)
        pt = analyze_crossing(cm, om, s, track)
        if track is not None:
            sv = np.linalg.svd(track.conj().T @ pt.vectors, compute_uv=False)
            if sv.min() < 0.5:
                raise CalibrationError(
                    f"eigenpair tracking lost continuity at Omega = 2pi x {units.to_mhz(om):.2f} MHz"
                )
        if prev_shift is not None:
            bound = 2 * abs(cm.perturbative_shift(om) - cm.perturbative_shift(grid[k - 1]))
            bound += units.mhz(1.0)
            if abs(s - prev_shift) > bound:
                raise CalibrationError(
                    f"compensation shift jumped by {units.to_mhz(s - prev_shift):.3f} MHz "
                    f"at Omega = 2pi x {units.to_mhz(om):.2f} MHz"
                )
        shifts.append(s)
        couplings.append(0.0 if om == 0 else pt.coupling * cm.coupling_scale)
        track = pt.vectors
        prev_shift = s
    variant = validate_variant(g, delta, alpha, levels=levels, cutoff=cutoff)
    meta = {
        "g_MHz": units.to_mhz(g),
        "delta_MHz": units.to_mhz(delta),
        "alpha_MHz": units.to_mhz(alpha),
        "model": model,
        "levels": levels,
        "photon_cutoff": cutoff,
        "validated_variant": variant,
    }
    return CalibrationCurve(
        units.to_mhz(grid), units.to_mhz(np.array(shifts)), units.to_mhz(np.array(couplings)), meta
    )


def compensation_track(curve: CalibrationCurve, envelope):
    """Time-dependent drive-frequency offset Delta_s(Omega(t)) for a drive envelope."""

    def track(t):
        return curve.stark_shift(envelope(t))

    return track
