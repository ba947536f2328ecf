"""Seeded random instances for tests and experiments.

The generator is splitmix64: state advances by the golden-gamma constant and
each output word is finalized with two xor-shift multiplies. Gaussians come
from Box-Muller on pairs of uniform words, so a seed fixes every instance
bit-for-bit regardless of platform or numpy version.
"""

from __future__ import annotations

import math

import numpy as np

from .states import DensityMatrix, Hamiltonian

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """64-bit splitmix PRNG. Replicable from the two mix constants below."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_word(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution."""
        return (self.next_word() >> 11) * (2.0**-53)

    def normal(self) -> float:
        """Standard normal via Box-Muller."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def complex_normal(self) -> complex:
        """Complex Gaussian with unit-variance real and imaginary parts."""
        return complex(self.normal(), self.normal())

    def derive(self, index: int) -> "SplitMix64":
        """Independent child stream for sweep point ``index``."""
        child = SplitMix64(self._state ^ ((index + 1) * _GAMMA))
        child.next_word()
        return child


def gue_hamiltonian(rng: SplitMix64, dim: int, norm: float | None = 1.0) -> Hamiltonian:
    """GUE-style Hamiltonian: H = (A + A†)/2 for complex Gaussian A.

    When ``norm`` is given the spectrum is rescaled to that spectral norm,
    which keeps thresholds and step counts comparable across seeds.
    """
    a = np.array([[rng.complex_normal() for _ in range(dim)] for _ in range(dim)])
    h = (a + a.conj().T) / 2
    if norm is not None:
        w = np.linalg.eigvalsh(h)
        scale = float(np.max(np.abs(w)))
        if scale == 0.0:
            raise ValueError("degenerate zero sample")
        h = h * (norm / scale)
    return Hamiltonian.from_matrix(h)


def random_pure_state(rng: SplitMix64, dim: int) -> DensityMatrix:
    vec = np.array([rng.complex_normal() for _ in range(dim)])
    return DensityMatrix.pure(vec)


def random_density(rng: SplitMix64, dim: int, rank: int | None = None) -> DensityMatrix:
    """Ginibre-induced mixed state of the given rank (full rank by default)."""
    rank = dim if rank is None else rank
    g = np.array([[rng.complex_normal() for _ in range(rank)] for _ in range(dim)])
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityMatrix(m / np.trace(m).real)
