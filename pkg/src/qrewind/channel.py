"""Partial-swap channel: the density-matrix-exponentiation primitive.

One step couples the system to a fresh ancilla copy in state sigma through
exp(-i theta S) with S the SWAP operator, then discards the ancilla. Iterating
N steps approximates the unitary conjugation by exp(-i omega tau sigma), with
leading error proportional to (omega tau)^2 / N.

Two independent code paths compute the single step: the closed-form channel
and a brute-force joint-unitary construction. They must agree to rounding and
cross-validate each other in the test suite.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import hermiticity_defect, spectral_norm, trace_distance
from .states import DensityMatrix, Hamiltonian

logger = logging.getLogger(__name__)

RESYM_THRESHOLD = 1e-13
RESYM_ALARM = 1e-9


@dataclass(frozen=True)
class SwapSchedule:
    """Rate, duration and step count of one protocol run.

    The per-step rotation theta = omega * delta_t must stay below pi/2; the
    protocol regime is theta << 1 and a warning fires above 0.1.
    """

    omega: float
    tau: float
    n_steps: int
    drift: Hamiltonian | None = None

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not (np.isfinite(self.omega) and np.isfinite(self.tau)):
            raise ValueError("omega and tau must be finite")
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        theta = self.omega * self.delta_t
        if not theta < np.pi / 2:
            raise ValueError(
                f"omega*delta_t = {theta:.4f} >= pi/2: increase n_steps or reduce omega"
            )
        if theta > 0.1:
            warnings.warn(
                f"omega*delta_t = {theta:.3f} > 0.1: outside the small-step regime",
                stacklevel=2,
            )

    @property
    def delta_t(self) -> float:
        return self.tau / self.n_steps

    @property
    def theta(self) -> float:
        return self.omega * self.delta_t


@dataclass(frozen=True)
class StepDiagnostic:
    step: int
    trace_drift: float
    hermiticity_defect: float
    distance_to_target: float | None


def swap_operator(d: int) -> np.ndarray:
    """SWAP on C^d x C^d: S (x ⊗ y) = y ⊗ x. Entries are exactly 0 or 1."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    s = np.zeros((d * d, d * d), dtype=np.complex128)
    for x in range(d):
        for y in range(d):
            s[y * d + x, x * d + y] = 1.0
    return s


def _check_pair(rho: DensityMatrix, sigma: DensityMatrix, theta: float) -> None:
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: rho {rho.dim}, sigma {sigma.dim}")
    if not np.isfinite(theta):
        raise ValueError(f"theta must be finite, got {theta}")
    if theta < 0 or theta > np.pi / 2:
        raise ValueError(f"theta = {theta} outside [0, pi/2]; wrapping is not supported")


def _step_raw(r: np.ndarray, s: np.ndarray, c2: float, s2: float, sc: float) -> np.ndarray:
    return c2 * r + s2 * s - 1j * sc * (s @ r - r @ s)


def partial_swap_step(rho: DensityMatrix, sigma: DensityMatrix, theta: float) -> DensityMatrix:
    """Closed-form single step.

    Phi[rho] = cos^2(theta) rho + sin^2(theta) sigma
               - i sin(theta) cos(theta) [sigma, rho].
    """
    _check_pair(rho, sigma, theta)
    if theta == 0.0:
        return rho
    c, s = np.cos(theta), np.sin(theta)
    c2 = c * c
    # exact float complement keeps the trace map a fixed point at 1
    out = _step_raw(rho.matrix, sigma.matrix, c2, 1.0 - c2, s * c)
    return DensityMatrix((out + out.conj().T) / 2)


def partial_swap_step_joint(rho: DensityMatrix, sigma: DensityMatrix, theta: float) -> DensityMatrix:
    """Single step via the joint unitary, as an independent oracle.

    Builds exp(-i theta S) = cos(theta) I - i sin(theta) S (S^2 = I), conjugates
    rho ⊗ sigma, and traces out the ancilla.
    """
    _check_pair(rho, sigma, theta)
    d = rho.dim
    s_op = swap_operator(d)
    u = np.cos(theta) * np.eye(d * d) - 1j * np.sin(theta) * s_op
    joint = u @ np.kron(rho.matrix, sigma.matrix) @ u.conj().T
    out = np.einsum("ikjk->ij", joint.reshape(d, d, d, d))
    return DensityMatrix((out + out.conj().T) / 2)


def partial_swap_evolve(
    rho0: DensityMatrix,
    sigma: DensityMatrix,
    sched: SwapSchedule,
    collect_diagnostics: bool = False,
    target: DensityMatrix | None = None,
) -> tuple[DensityMatrix, list[StepDiagnostic]]:
    """Iterate the channel N times with a fresh ancilla copy per step.

    Without drift the output approximates
    exp(-i omega tau sigma) rho0 exp(+i omega tau sigma). With drift H each
    step is symmetrically split, exp(-iH dt/2) Phi exp(-iH dt/2), keeping the
    splitting bias at the same O(dt^2) order as the channel error. Adjacent
    half steps are merged into full propagators inside the loop.

    Diagnostics are off by default; when enabled each step records trace and
    hermiticity drift and, if a target is supplied, the trace distance to it.
    """
    _check_pair(rho0, sigma, sched.theta)
    theta = sched.theta
    c, s = np.cos(theta), np.sin(theta)
    c2 = c * c
    s2, sc = 1.0 - c2, s * c  # exact complement: trace fixed point stays at 1

    sig = sigma.matrix
    r = rho0.matrix.copy()
    diags: list[StepDiagnostic] = []

    u_half = u_full = None
    if sched.drift is not None:
        if sched.drift.dim != rho0.dim:
            raise ValueError("drift Hamiltonian dimension mismatch")
        u_half = sched.drift.propagator(sched.delta_t / 2)
        u_full = sched.drift.propagator(sched.delta_t)

    # Rounding breaks hermiticity at machine level per step; checking every
    # step would dominate the loop, so the drift is policed on a cadence and
    # the final state is symmetrized unconditionally.
    check_every = 1 if collect_diagnostics else 64

    if u_half is not None:
        r = u_half @ r @ u_half.conj().T
    for k in range(sched.n_steps):
        if k > 0 and u_full is not None:
            r = u_full @ r @ u_full.conj().T
        r = _step_raw(r, sig, c2, s2, sc)
        if k % check_every == 0 or collect_diagnostics:
            defect = hermiticity_defect(r)
            if defect > RESYM_THRESHOLD:
                if defect > RESYM_ALARM:
                    logger.warning("hermiticity drift %.3e at step %d", defect, k)
                r = (r + r.conj().T) / 2
            # constant propagators are unitary only to rounding; their
            # multiplicative trace bias compounds over N steps unless removed
            tr = float(np.trace(r).real)
            if tr != 1.0:
                r = r / tr
            if collect_diagnostics:
                dist = trace_distance(r, target.matrix) if target is not None else None
                diags.append(
                    StepDiagnostic(
                        step=k,
                        trace_drift=abs(float(np.trace(r).real) - 1.0),
                        hermiticity_defect=defect,
                        distance_to_target=dist,
                    )
                )
    if u_half is not None:
        r = u_half @ r @ u_half.conj().T

    return DensityMatrix((r + r.conj().T) / 2), diags


def dme_error_term(
    rho_final: DensityMatrix, sigma: DensityMatrix, omega_tau: float, n: int
) -> np.ndarray:
    """Leading-order error matrix of the N-step composition.

    ((omega tau)^2 / N) * (sigma + [sigma,[sigma,rho]]/2 - rho), evaluated at
    the final state of the run. Traceless for unit-trace inputs.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if rho_final.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    r, sg = rho_final.matrix, sigma.matrix
    inner = sg @ r - r @ sg
    double = sg @ inner - inner @ sg
    return (omega_tau**2 / n) * (sg + 0.5 * double - r)


def dme_error_bound(
    rho: DensityMatrix, sigma: DensityMatrix, omega_tau: float, n: int
) -> float:
    """Norm bound on the composition error.

    ((omega tau)^2 / N) * (||sigma|| + ||rho|| + 2 ||rho|| ||sigma||^2);
    dominates the spectral norm of dme_error_term.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    ns = spectral_norm(sigma.matrix)
    nr = spectral_norm(rho.matrix)
    return (omega_tau**2 / n) * (ns + nr + 2.0 * nr * ns * ns)
