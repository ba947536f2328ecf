"""Dense complex linear algebra used by every other module.

All matrices are complex128 ndarrays; hbar = 1 throughout, so rates and
energies are dimensionless multiples of one energy scale.
"""

from __future__ import annotations

import numpy as np

HERMITICITY_TOL = 1e-10


def hermiticity_defect(m: np.ndarray) -> float:
    """Max-norm of (M - M†)."""
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitize(m: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (M + M†)/2."""
    return (m + m.conj().T) / 2


def require_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL, name: str = "matrix") -> np.ndarray:
    """Validate that ``m`` is square and Hermitian to ``tol``; return it as complex128."""
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    defect = hermiticity_defect(m)
    if defect > tol:
        raise ValueError(f"{name} is not Hermitian: max |M - M†| = {defect:.3e} > {tol:.1e}")
    return m


def eig_hermitian(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, unitary eigenvector matrix V) with
    M = V diag(w) V†.
    """
    m = require_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w, v


def expm_hermitian_scaled(m: np.ndarray, s: float) -> np.ndarray:
    """exp(-i*s*M) for Hermitian M, computed through the eigenbasis.

    s = 0 returns the identity exactly.
    """
    if not np.isfinite(s):
        raise ValueError(f"scale must be finite, got {s}")
    m = require_hermitian(m)
    if s == 0.0:
        return np.eye(m.shape[0], dtype=np.complex128)
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * s * w)) @ v.conj().T


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product a ⊗ b."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def partial_trace_ancilla(joint: np.ndarray, d: int) -> np.ndarray:
    """Trace out the second (ancilla) factor of a d*d x d*d joint matrix."""
    joint = np.asarray(joint, dtype=np.complex128)
    if joint.shape != (d * d, d * d):
        raise ValueError(f"joint matrix must be {d * d}x{d * d}, got {joint.shape}")
    return np.einsum("ikjk->ij", joint.reshape(d, d, d, d))


def spectral_norm(m: np.ndarray) -> float:
    """max |eigenvalue| of a Hermitian matrix."""
    w, _ = eig_hermitian(m)
    return float(np.max(np.abs(w))) if w.size else 0.0


def max_eigenvalue(m: np.ndarray) -> float:
    """Largest (signed) eigenvalue of a Hermitian matrix.

    Reported alongside spectral_norm in diagnostics; the two differ for
    indefinite operators such as error terms.
    """
    w, _ = eig_hermitian(m)
    return float(w[-1])


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2) * sum |eigenvalues(a - b)| for Hermitian a, b of equal dimension."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    w = np.linalg.eigvalsh(hermitize(a - b))
    return float(0.5 * np.sum(np.abs(w)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """-sum p ln p over the eigenvalues of a density matrix, in nats.

    Zero and slightly negative (round-off) eigenvalues contribute nothing.
    """
    w = np.linalg.eigvalsh(require_hermitian(rho))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log(w)))
