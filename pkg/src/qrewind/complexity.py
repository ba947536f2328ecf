"""Step-count estimators and the entropy/norm trade-off solver.

The rewind cost N scales as (state norm / accuracy) * (dim * delay / system
timescale)^2. For high-entropy states the norm is bounded through the entropy
deficit k (in bits below maximal), which is where the k/log2(dim) factor
comes from. Binary entropy is handled in nats internally; k is in bits, with
conversions only at the boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

LN2 = math.log(2.0)


def binary_entropy(p: float) -> float:
    """H(p) = -p ln p - (1-p) ln(1-p), in nats."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log(1.0 - p)


@dataclass(frozen=True)
class EntropySpec:
    """Dimension and entropy of a state, with the derived bit deficit."""

    dim: int
    entropy_nats: float

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if not 0.0 <= self.entropy_nats <= math.log(self.dim) + 1e-12:
            raise ValueError(
                f"entropy {self.entropy_nats} outside [0, ln {self.dim} = {math.log(self.dim):.4f}]"
            )

    @property
    def k_bits(self) -> float:
        return (math.log(self.dim) - self.entropy_nats) / LN2


@dataclass(frozen=True)
class ComplexityEstimate:
    """Real-valued step count; callers round up at execution boundaries."""

    n_steps: float
    regime: str
    params: dict = field(default_factory=dict)
    flags: tuple = ()


def steps_known_hamiltonian(
    rho_norm: float, eps: float, dim: int, tau_r: float, tau_tilde: float
) -> ComplexityEstimate:
    """N = (||rho||/eps) (dim * tau_R / tau_tilde)^2."""
    if eps <= 0 or eps > 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    if rho_norm <= 0 or dim < 1 or tau_r < 0 or tau_tilde <= 0:
        raise ValueError("rho_norm, dim, tau_tilde must be positive and tau_r >= 0")
    n = (rho_norm / eps) * (dim * tau_r / tau_tilde) ** 2
    flags = ("sigma-norm-comparable",) if rho_norm * dim < 10 else ()
    return ComplexityEstimate(
        n_steps=n,
        regime="known_hamiltonian",
        params={"rho_norm": rho_norm, "eps": eps, "dim": dim, "tau_r": tau_r, "tau_tilde": tau_tilde},
        flags=flags,
    )


def steps_high_entropy(
    spec: EntropySpec, eps: float, tau_r: float, tau_tilde: float
) -> ComplexityEstimate:
    """Known-Hamiltonian count with the norm replaced by k / log2(dim)."""
    k = spec.k_bits
    log2d = math.log2(spec.dim)
    if k > log2d:
        raise ValueError(f"k = {k} exceeds log2(dim) = {log2d}")
    base = steps_known_hamiltonian(max(k, 1e-300) / log2d, eps, spec.dim, tau_r, tau_tilde)
    n = 0.0 if k == 0.0 else base.n_steps
    return ComplexityEstimate(
        n_steps=n,
        regime="high_entropy",
        params={"k_bits": k, "eps": eps, "dim": spec.dim, "tau_r": tau_r, "tau_tilde": tau_tilde},
        flags=base.flags,
    )


def max_top_eigenvalue(dim: int, entropy_nats: float) -> float:
    """Largest possible eigenvalue of a density matrix at the given entropy.

    The maximum is reached with a uniform tail, so p solves
    H(p) + (1-p) ln(dim-1) = S on the branch p >= 1/dim, where the left side
    is strictly decreasing. Solved by bisection to 1e-12.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    s_max = math.log(dim)
    if not 0.0 <= entropy_nats <= s_max + 1e-12:
        raise ValueError(f"entropy {entropy_nats} outside [0, ln dim]")
    if entropy_nats >= s_max:
        return 1.0 / dim
    if entropy_nats == 0.0:
        return 1.0

    tail = math.log(dim - 1)

    def f(p: float) -> float:
        return binary_entropy(p) + (1.0 - p) * tail - entropy_nats

    lo, hi = 1.0 / dim, 1.0 - 1e-15
    if f(hi) > 0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


def _simplex_grid(parts: int, resolution: int) -> np.ndarray:
    """All compositions of ``resolution`` into ``parts`` non-negative integers."""
    combos = itertools.combinations(range(resolution + parts - 1), parts - 1)
    out = []
    for bars in combos:
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(resolution + parts - 2 - prev)
        out.append(row)
    return np.array(out, dtype=float)


_GRID_RESOLUTION = {2: 1, 3: 2000, 4: 600, 5: 80, 6: 40, 7: 26, 8: 19}


def max_top_eigenvalue_search(dim: int, entropy_nats: float) -> float:
    """Brute-force check of max_top_eigenvalue for small dimensions.

    Does not assume the uniform-tail form: for a candidate top eigenvalue p
    the remaining mass is swept over a simplex grid and p is feasible when
    some gridded tail reaches the target entropy. The largest feasible p is
    found by bisection, since the achievable entropy ceiling decreases with p.
    """
    if dim < 2 or dim > 8:
        raise ValueError(f"grid search supports dim in [2, 8], got {dim}")
    s_max = math.log(dim)
    if not 0.0 < entropy_nats < s_max:
        raise ValueError(f"entropy {entropy_nats} outside (0, ln dim)")

    res = _GRID_RESOLUTION[dim]
    weights = _simplex_grid(dim - 1, res) / res  # rows sum to 1

    def tail_entropy_ceiling(p: float) -> float:
        q = (1.0 - p) * weights
        valid = (q <= p + 1e-12).all(axis=1)
        if not valid.any():
            return -np.inf
        q = q[valid]
        terms = np.where(q > 0, -q * np.log(np.maximum(q, 1e-300)), 0.0)
        head = -p * math.log(p) if p > 0 else 0.0
        return head + float(np.max(np.sum(terms, axis=1)))

    lo, hi = 1.0 / dim, 1.0 - 1e-12
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail_entropy_ceiling(mid) >= entropy_nats:
            lo = mid
        else:
            hi = mid
    return lo
