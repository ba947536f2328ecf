"""Backward-evolution protocol built on the partial-swap channel.

Two ancilla preparations drive the rewind:

* complement ancilla: sigma = (eps_max I - H)/Z with Z = eps_max dim - Tr H.
  Exponentiating sigma is, up to a global phase, exponentiating -H, so the
  channel conjugates the system by exp(+i (omega/Z) H tau).
* thermal ancilla: sigma = exp(-beta H)/Z_beta. At high temperature its
  linearization again points along -H with coefficient beta/Z_beta, so the
  rewind works without knowing H explicitly; the price is an extra error from
  the discarded O(beta^2) terms.

While the protocol runs for wall-clock duration tau the system keeps evolving
forward under its own H, so rewinding wins only above a threshold rate.
hbar = 1 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .channel import SwapSchedule, dme_error_bound, partial_swap_evolve
from .errors import (
    ConvergenceError,
    DegenerateHamiltonianError,
    EmptySubspaceError,
    InfiniteThresholdError,
)
from .linalg import max_eigenvalue, spectral_norm, trace_distance
from .states import DensityMatrix, Hamiltonian

AncillaKind = Literal["complement", "thermal"]


@dataclass(frozen=True)
class AncillaSpec:
    """Ancilla state plus its provenance and normalization constant.

    For the thermal kind the Hamiltonian spectrum is shifted to a zero ground
    state before computing Z_beta (recorded in ``shift``); the Gibbs state
    itself is shift-invariant, but the normalization and threshold are not,
    and the shifted convention keeps beta*energy the small expansion
    parameter.
    """

    sigma: DensityMatrix
    kind: AncillaKind
    normalization: float
    beta: float | None = None
    shift: float = 0.0


@dataclass(frozen=True)
class ReversalReport:
    """Outcome of one protocol run, measured against the exact rewind."""

    tau_requested: float
    tau_protocol: float
    net_backward_shift: float
    error_measured: float
    error_max_eigenvalue: float
    error_bound: float
    trace_distance_to_target: float
    n_steps: int
    omega: float
    threshold_omega: float
    no_reversal: bool
    ancilla_kind: AncillaKind
    beta: float | None = None
    hamiltonian_shift: float = 0.0


def complement_ancilla(h: Hamiltonian) -> AncillaSpec:
    """sigma = (eps_max I - H)/Z, Z = eps_max dim - Tr H.

    Fails for H proportional to the identity, where Z vanishes and no
    direction is left to invert.
    """
    z = h.eps_max * h.dim - h.trace
    scale = max(abs(h.eps_max), abs(h.eps_min), 1.0)
    if z <= 1e-14 * h.dim * scale:
        raise DegenerateHamiltonianError(
            f"Z = {z:.3e}: Hamiltonian is (numerically) proportional to the identity"
        )
    sigma = (h.eps_max * np.eye(h.dim) - h.matrix) / z
    return AncillaSpec(sigma=DensityMatrix(sigma), kind="complement", normalization=z)


def thermal_ancilla(h: Hamiltonian, beta: float) -> AncillaSpec:
    """Gibbs state exp(-beta H)/Z_beta on the zero-ground-shifted spectrum.

    beta = 0 gives the maximally mixed state with Z_beta = dim. Negative
    temperatures are out of scope.
    """
    if not np.isfinite(beta) or beta < 0:
        raise ValueError(f"beta must be finite and >= 0, got {beta}")
    shift = h.eps_min
    w = h.eigenvalues - shift
    boltzmann = np.exp(-beta * w)
    z = float(np.sum(boltzmann))
    v = h.eigenvectors
    sigma = (v * (boltzmann / z)) @ v.conj().T
    return AncillaSpec(
        sigma=DensityMatrix((sigma + sigma.conj().T) / 2),
        kind="thermal",
        normalization=z,
        beta=beta,
        shift=shift,
    )


def threshold_rate(ancilla: AncillaSpec) -> float:
    """Minimum rate at which the induced rewind outruns the forward drift.

    Complement: Z. Thermal: Z_beta / beta, which diverges for the flat
    beta = 0 ancilla.
    """
    if ancilla.kind == "complement":
        return ancilla.normalization
    if ancilla.beta == 0:
        raise InfiniteThresholdError("beta = 0 ancilla carries no energy direction")
    return ancilla.normalization / ancilla.beta


def _backward_rate(ancilla: AncillaSpec, omega: float) -> float:
    """Rewind speed (backward time per unit wall time) of the linearized generator."""
    if ancilla.kind == "complement":
        return omega / ancilla.normalization
    return omega * ancilla.beta / ancilla.normalization


def run_reversal(
    rho_t: DensityMatrix,
    h: Hamiltonian,
    ancilla: AncillaSpec,
    omega: float,
    tau: float,
    n_steps: int,
    drift_enabled: bool = True,
    collect_diagnostics: bool = False,
) -> tuple[DensityMatrix, ReversalReport]:
    """Run the rewind protocol and measure it against the exact target.

    The target is rho(t - s) obtained by exact conjugation with exp(+iHs),
    where s is the net backward shift: tau * (rewind rate - 1) with drift on,
    tau * rewind rate with drift off. All deviation from the target counts as
    measured error; the report carries the matching analytic bound.
    """
    if rho_t.dim != h.dim or ancilla.sigma.dim != h.dim:
        raise ValueError("state, Hamiltonian and ancilla dimensions must agree")
    if omega < 0 or tau < 0 or n_steps < 1:
        raise ValueError("omega, tau must be >= 0 and n_steps >= 1")

    sched = SwapSchedule(
        omega=omega, tau=tau, n_steps=n_steps, drift=h if drift_enabled else None
    )
    gross = tau * _backward_rate(ancilla, omega)
    net = gross - (tau if drift_enabled else 0.0)
    target = h.evolve(rho_t, -net)

    rho_out, _diags = partial_swap_evolve(
        rho_t, ancilla.sigma, sched, collect_diagnostics=collect_diagnostics, target=target
    )

    delta = rho_out.matrix - target.matrix
    omega_tau = omega * tau
    if ancilla.kind == "complement":
        bound = dme_error_bound(rho_t, ancilla.sigma, omega_tau, n_steps)
    else:
        bound = thermal_error_bound(
            rho_norm=spectral_norm(rho_t.matrix),
            z_beta=ancilla.normalization,
            n=n_steps,
            tau=tau,
            beta=ancilla.beta,
            eps_max=h.eps_max - ancilla.shift,
        )
    try:
        threshold = threshold_rate(ancilla)
    except InfiniteThresholdError:
        threshold = float("inf")

    report = ReversalReport(
        tau_requested=gross,
        tau_protocol=tau,
        net_backward_shift=net,
        error_measured=spectral_norm(delta),
        error_max_eigenvalue=max_eigenvalue(delta) if h.dim else 0.0,
        error_bound=bound,
        trace_distance_to_target=trace_distance(rho_out.matrix, target.matrix),
        n_steps=n_steps,
        omega=omega,
        threshold_omega=threshold,
        no_reversal=bool(drift_enabled and net <= 0),
        ancilla_kind=ancilla.kind,
        beta=ancilla.beta,
        hamiltonian_shift=ancilla.shift,
    )
    return rho_out, report


def thermal_linearization_error(
    rho_past: DensityMatrix, h: Hamiltonian, beta: float, tau: float
) -> np.ndarray:
    """Leading deviation from truncating the Gibbs ancilla at first order.

    At twice-threshold rate the discarded quadratic term contributes
    -i tau beta [H^2, rho(t - tau)]: traceless and Hermitian.
    """
    h2 = h.matrix @ h.matrix
    r = rho_past.matrix
    return -1j * tau * beta * (h2 @ r - r @ h2)


def thermal_error_bound(
    rho_norm: float, z_beta: float, n: float, tau: float, beta: float, eps_max: float
) -> float:
    """Total thermal-path error bound at twice-threshold rate.

    (4 Z_beta^2/N (tau/tau_beta)^2 + (tau/tau_beta)(beta eps_max)^2) * ||rho||
    with tau_beta = beta. The first (channel) term grows as beta -> 0, the
    second (linearization) term shrinks, so the bound has an interior optimum
    in beta. N may be fractional (estimator use); execution paths round up.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if beta <= 0 or z_beta <= 0 or rho_norm < 0 or tau < 0:
        raise ValueError("rho_norm, tau must be >= 0 and beta, z_beta > 0")
    x = tau / beta
    return (4.0 * z_beta**2 / n * x**2 + x * (beta * eps_max) ** 2) * rho_norm


def optimal_beta_frozen(z_beta: float, eps_max: float, n: int, tau: float) -> float:
    """Stationary beta of the thermal bound with Z_beta held fixed.

    beta * eps_max = (8 Z_beta^2 eps_max tau / N)^(1/3).
    """
    if n < 1 or tau <= 0 or eps_max <= 0 or z_beta <= 0:
        raise ValueError("need n >= 1 and positive tau, eps_max, z_beta")
    return (8.0 * z_beta**2 * eps_max * tau / n) ** (1.0 / 3.0) / eps_max


def optimal_beta(h: Hamiltonian, n: int, tau: float, max_iter: int = 100, tol: float = 1e-10) -> float:
    """Self-consistent optimal inverse temperature.

    Z_beta depends on beta, so the stationary condition is solved by damped
    fixed-point iteration from the infinite-temperature start Z_beta = dim.
    """
    hs = h.shifted_to_zero_ground()
    eps = hs.eps_max
    if eps <= 0:
        raise DegenerateHamiltonianError("flat spectrum: no optimal temperature exists")
    beta = optimal_beta_frozen(float(h.dim), eps, n, tau)
    for _ in range(max_iter):
        z = float(np.sum(np.exp(-beta * hs.eigenvalues)))
        nxt = 0.5 * beta + 0.5 * optimal_beta_frozen(z, eps, n, tau)
        if abs(nxt - beta) <= tol * max(1.0, abs(beta)):
            return nxt
        beta = nxt
    raise ConvergenceError(f"optimal beta did not converge in {max_iter} iterations")


def net_accuracy_frozen(
    z_beta: float, eps_max: float, n: int, tau: float, rho_norm: float
) -> float:
    """Thermal bound at its frozen-Z_beta optimum.

    3 (Z_beta^2/N)^(1/3) (eps_max tau)^(4/3) ||rho||; algebraically equal to
    thermal_error_bound at optimal_beta_frozen.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if tau == 0:
        return 0.0
    return 3.0 * (z_beta**2 / n) ** (1.0 / 3.0) * (eps_max * tau) ** (4.0 / 3.0) * rho_norm


def net_accuracy(h: Hamiltonian, n: int, tau: float, rho_norm: float) -> float:
    """Reversal accuracy at the self-consistent optimal temperature."""
    if tau == 0:
        return 0.0
    hs = h.shifted_to_zero_ground()
    beta = optimal_beta(h, n, tau)
    z = float(np.sum(np.exp(-beta * hs.eigenvalues)))
    return net_accuracy_frozen(z, hs.eps_max, n, tau, rho_norm)


def energy_truncate(
    rho: DensityMatrix, h: Hamiltonian, e_max_cut: float
) -> tuple[DensityMatrix, DensityMatrix | None, float, float]:
    """Split rho into low/high-energy parts at a spectral cutoff.

    Returns (rho_low, rho_high or None, eps_e, chebyshev_bound) where eps_e is
    the weight above the cut and the bound is ((cut - mean)/std)^-2 from the
    energy variance. The cut must exceed the mean energy.
    """
    if rho.dim != h.dim:
        raise ValueError("dimension mismatch")
    e_mean = float(np.trace(rho.matrix @ h.matrix).real)
    if e_max_cut <= e_mean:
        raise ValueError(f"cutoff {e_max_cut} must exceed the mean energy {e_mean}")

    low = h.eigenvalues < e_max_cut
    v_low = h.eigenvectors[:, low]
    p = v_low @ v_low.conj().T
    w_low = float(np.trace(p @ rho.matrix).real)
    if w_low <= 1e-300:
        raise EmptySubspaceError("no state weight below the cutoff")
    eps_e = min(max(1.0 - w_low, 0.0), 1.0)

    m_low = p @ rho.matrix @ p / w_low
    rho_low = DensityMatrix((m_low + m_low.conj().T) / 2)

    rho_high = None
    if eps_e > 1e-14:
        q = np.eye(h.dim) - p
        m_high = q @ rho.matrix @ q / (1.0 - w_low)
        rho_high = DensityMatrix((m_high + m_high.conj().T) / 2)

    var = float(np.trace(rho.matrix @ (h.matrix - e_mean * np.eye(h.dim)) @ (h.matrix - e_mean * np.eye(h.dim))).real)
    if var <= 0.0:
        bound = 0.0
    else:
        bound = var / (e_max_cut - e_mean) ** 2
    return rho_low, rho_high, eps_e, bound


def estimate_net_shift(
    rho_out: DensityMatrix,
    rho_t: DensityMatrix,
    h: Hamiltonian,
    s_max: float,
    n_grid: int = 201,
) -> float:
    """Best-fit time shift of rho_out relative to rho_t.

    Scans s in [-s_max, s_max] and returns the argmin of the trace distance to
    rho(t - s); positive values mean the output sits in the past of rho_t.
    """
    grid = np.linspace(-s_max, s_max, n_grid)
    dists = [trace_distance(rho_out.matrix, h.evolve(rho_t, -s).matrix) for s in grid]
    return float(grid[int(np.argmin(dists))])
