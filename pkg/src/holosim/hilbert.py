"""Dense linear-algebra and state primitives.

Operators, kets and density matrices are plain complex ``numpy`` arrays.
The helpers here build and check them; nothing mutates its inputs.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

from .errors import InvariantError

HERMITIAN_ATOL = 1e-12
KET_NORM_ATOL = 1e-10
RHO_HERMITIAN_ATOL = 1e-10
RHO_TRACE_ATOL = 1e-8
RHO_POSITIVE_ATOL = 1e-8
FIDELITY_IMAG_ATOL = 1e-10


def as_operator(a, dim: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"operator must be square, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValueError(f"operator has dim {a.shape[0]}, expected {dim}")
    return a


def kron(*ops) -> np.ndarray:
    """Tensor product of one or more operators (or kets), left to right."""
    if not ops:
        raise ValueError("kron needs at least one factor")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def adjoint(a) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def is_hermitian(a, atol: float = HERMITIAN_ATOL) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - adjoint(a)), initial=0.0) < atol)


def basis(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise IndexError(f"basis index {index} outside dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / norm


def check_ket(psi, atol: float = KET_NORM_ATOL) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"ket must be a vector, got shape {psi.shape}")
    if abs(np.linalg.norm(psi) - 1.0) >= atol:
        raise InvariantError(f"ket norm {np.linalg.norm(psi):.15g} is not 1")
    return psi


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def check_density_matrix(
    rho,
    *,
    trace_atol: float = RHO_TRACE_ATOL,
    hermitian_atol: float = RHO_HERMITIAN_ATOL,
    positive_atol: float = RHO_POSITIVE_ATOL,
    label: str = "density matrix",
) -> np.ndarray:
    """Return ``rho`` as an array after checking trace, Hermiticity and positivity.

    Raises InvariantError naming the violated property.
    """
    rho = as_operator(rho)
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm >= hermitian_atol:
        raise InvariantError(f"{label}: Hermiticity error {herm:.3e}")
    tr = np.trace(rho)
    if abs(tr - 1.0) >= trace_atol:
        raise InvariantError(f"{label}: trace {tr.real:.12g}{tr.imag:+.3e}j")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam < -positive_atol:
        raise InvariantError(f"{label}: smallest eigenvalue {lam:.3e}")
    return rho


def state_fidelity(rho, psi) -> float:
    """Overlap <psi|rho|psi> of a density matrix with a pure target state."""
    rho = as_operator(rho)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (rho.shape[0],):
        raise ValueError(
            f"dimension mismatch: rho is {rho.shape[0]}-dim, psi has shape {psi.shape}"
        )
    f = np.vdot(psi, rho @ psi)
    if abs(f.imag) >= FIDELITY_IMAG_ATOL:
        raise InvariantError(f"fidelity has imaginary part {f.imag:.3e}")
    return float(f.real)


def partial_trace(rho, subsystem_dims: Sequence[int], keep) -> np.ndarray:
    """Reduce ``rho`` to the factors listed in ``keep`` (order preserved)."""
    rho = as_operator(rho)
    dims = [int(d) for d in subsystem_dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != rho.shape[0]:
        raise ValueError(f"subsystem dims {dims} do not match operator dim {rho.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(not 0 <= k < len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # einsum labels: row i_k, column j_k; traced factors share a label
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows = [next(letters) for _ in range(n)]
    cols = [rows[k] if k not in keep else next(letters) for k in range(n)]
    out = [rows[k] for k in keep] + [cols[k] for k in keep]
    red = np.einsum("".join(rows) + "".join(cols) + "->" + "".join(out), t)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return red.reshape(d_keep, d_keep)
