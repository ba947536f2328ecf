"""Validated quantum state and Hamiltonian containers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import eig_hermitian, expm_hermitian_scaled, hermiticity_defect, require_hermitian

TRACE_TOL = 1e-10
PSD_TOL = 1e-10
HERM_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    """A d x d Hermitian, PSD, unit-trace state.

    Validation runs once at construction; the wrapped array is treated as
    immutable afterwards.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        defect = hermiticity_defect(m)
        if defect > HERM_TOL:
            raise ValueError(f"density matrix not Hermitian: defect {defect:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} is not 1")
        wmin = float(np.linalg.eigvalsh(m)[0])
        if wmin < -PSD_TOL:
            raise ValueError(f"density matrix not PSD: min eigenvalue {wmin:.3e}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, vec: np.ndarray) -> "DensityMatrix":
        """|v><v| / <v|v>."""
        v = np.asarray(vec, dtype=np.complex128).reshape(-1)
        n2 = float(np.vdot(v, v).real)
        if n2 <= 0:
            raise ValueError("zero state vector")
        return cls(np.outer(v, v.conj()) / n2)

    @classmethod
    def from_probabilities(cls, probs: np.ndarray) -> "DensityMatrix":
        """Diagonal state from a probability vector."""
        p = np.asarray(probs, dtype=float)
        return cls(np.diag(p).astype(np.complex128))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=np.complex128) / dim)


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian generator with its cached spectrum.

    eigenvalues ascend; eps_max is the largest one. Reconstruction
    V diag(w) V† is checked against the input at construction.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "Hamiltonian":
        m = require_hermitian(m, tol=HERM_TOL, name="Hamiltonian")
        w, v = eig_hermitian(m)
        recon = (v * w) @ v.conj().T
        residual = float(np.max(np.abs(recon - m)))
        if residual > 1e-10:
            raise ValueError(f"spectral reconstruction residual {residual:.3e}")
        return cls(matrix=m, eigenvalues=w, eigenvectors=v)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eps_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def eps_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def propagator(self, t: float) -> np.ndarray:
        """exp(-i H t)."""
        if t == 0.0:
            return np.eye(self.dim, dtype=np.complex128)
        return (self.eigenvectors * np.exp(-1j * t * self.eigenvalues)) @ self.eigenvectors.conj().T

    def evolve(self, rho: DensityMatrix, t: float) -> DensityMatrix:
        """exp(-iHt) rho exp(+iHt)."""
        u = self.propagator(t)
        out = u @ rho.matrix @ u.conj().T
        return DensityMatrix((out + out.conj().T) / 2)

    def shifted_to_zero_ground(self) -> "Hamiltonian":
        """H - eps_min * I; changes evolution only by a global phase."""
        return Hamiltonian(
            matrix=self.matrix - self.eps_min * np.eye(self.dim),
            eigenvalues=self.eigenvalues - self.eps_min,
            eigenvectors=self.eigenvectors,
        )


def evolve_matrix(h: Hamiltonian, rho: np.ndarray, t: float) -> np.ndarray:
    """Conjugation by exp(-iHt) on a bare array, without validation."""
    u = h.propagator(t)
    return u @ rho @ u.conj().T


__all__ = ["DensityMatrix", "Hamiltonian", "evolve_matrix", "expm_hermitian_scaled"]
