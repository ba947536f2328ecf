import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from qrewind import (
    DegenerateHamiltonianError,
    DensityMatrix,
    Hamiltonian,
    InfiniteThresholdError,
    SplitMix64,
    complement_ancilla,
    energy_truncate,
    estimate_net_shift,
    expm_hermitian_scaled,
    gue_hamiltonian,
    net_accuracy,
    net_accuracy_frozen,
    optimal_beta,
    optimal_beta_frozen,
    random_density,
    random_pure_state,
    run_reversal,
    spectral_norm,
    thermal_ancilla,
    thermal_error_bound,
    thermal_linearization_error,
    threshold_rate,
    trace_distance,
)

TWO_LEVEL = Hamiltonian.from_matrix(np.diag([0.0, 1.0]).astype(complex))


def normalized_qubit(seed):
    """Random qubit Hamiltonian with a zero ground state and eps_max = 1."""
    h = gue_hamiltonian(SplitMix64(seed), 2).shifted_to_zero_ground()
    return Hamiltonian.from_matrix(h.matrix / h.eps_max)


class TestComplementAncilla:
    def test_two_level_values(self):
        eps = 0.7
        anc = complement_ancilla(Hamiltonian.from_matrix(np.diag([0.0, eps]).astype(complex)))
        assert anc.normalization == pytest.approx(eps)
        assert np.allclose(anc.sigma.matrix, np.diag([1.0, 0.0]))

    def test_pauli_z(self):
        anc = complement_ancilla(Hamiltonian.from_matrix(np.diag([1.0, -1.0]).astype(complex)))
        assert anc.normalization == pytest.approx(2.0)
        assert np.allclose(anc.sigma.matrix, np.diag([0.0, 1.0]))

    def test_ground_state_gets_top_weight(self):
        h = gue_hamiltonian(SplitMix64(50), 4)
        anc = complement_ancilla(h)
        w = np.linalg.eigvalsh(anc.sigma.matrix)
        ground = h.eigenvectors[:, 0]
        overlap = float((ground.conj() @ anc.sigma.matrix @ ground).real)
        assert overlap == pytest.approx(w[-1], abs=1e-10)

    def test_identity_hamiltonian_rejected(self):
        with pytest.raises(DegenerateHamiltonianError):
            complement_ancilla(Hamiltonian.from_matrix(0.8 * np.eye(3, dtype=complex)))


class TestThermalAncilla:
    def test_infinite_temperature(self):
        anc = thermal_ancilla(TWO_LEVEL, 0.0)
        assert np.allclose(anc.sigma.matrix, np.eye(2) / 2)
        assert anc.normalization == pytest.approx(2.0)

    def test_analytic_gibbs_weights(self):
        anc = thermal_ancilla(TWO_LEVEL, np.log(2.0))
        assert np.allclose(anc.sigma.matrix, np.diag([2 / 3, 1 / 3]), atol=1e-14)

    def test_small_beta_linearization_residual(self):
        h = gue_hamiltonian(SplitMix64(51), 3).shifted_to_zero_ground()
        resid = []
        for beta in (0.02, 0.01):
            anc = thermal_ancilla(h, beta)
            lin = (np.eye(3) - beta * h.matrix) / anc.normalization
            resid.append(spectral_norm(anc.sigma.matrix - lin))
        # quadratic in beta: halving beta divides the residual by ~4
        assert resid[0] / resid[1] == pytest.approx(4.0, rel=0.25)

    def test_rejects_negative_beta(self):
        with pytest.raises(ValueError):
            thermal_ancilla(TWO_LEVEL, -0.1)


class TestThreshold:
    def test_complement_two_level(self):
        assert threshold_rate(complement_ancilla(TWO_LEVEL)) == pytest.approx(1.0)

    def test_thermal_two_level(self):
        anc = thermal_ancilla(TWO_LEVEL, 1.0)
        assert threshold_rate(anc) == pytest.approx(1.0 + np.exp(-1.0))

    def test_flat_ancilla_threshold_diverges(self):
        with pytest.raises(InfiniteThresholdError):
            threshold_rate(thermal_ancilla(TWO_LEVEL, 0.0))

    def test_threshold_grows_with_dimension(self):
        beta = 1e-3
        per_dim = []
        for seed, d in ((52, 2), (53, 4), (54, 8)):
            h = gue_hamiltonian(SplitMix64(seed), d).shifted_to_zero_ground()
            per_dim.append(threshold_rate(thermal_ancilla(h, beta)) / d)
        assert max(per_dim) / min(per_dim) <= 1.1


class TestRunReversal:
    def test_zero_duration_is_identity(self):
        rng = SplitMix64(55)
        h = gue_hamiltonian(rng, 2)
        rho = random_density(rng, 2)
        out, rep = run_reversal(rho, h, complement_ancilla(h), omega=1.0, tau=0.0, n_steps=1)
        assert np.max(np.abs(out.matrix - rho.matrix)) <= 1e-14
        assert rep.net_backward_shift == 0.0
        assert rep.error_measured <= 1e-14
        assert rep.error_bound == 0.0

    def test_round_trip_two_level(self):
        rng = SplitMix64(56)
        h = gue_hamiltonian(rng, 2)
        rho0 = random_pure_state(rng, 2)
        rho_t = h.evolve(rho0, 1.0)
        anc = complement_ancilla(h)
        out, rep = run_reversal(rho_t, h, anc, omega=2 * anc.normalization, tau=1.0, n_steps=10**4)
        assert rep.net_backward_shift == pytest.approx(1.0)
        assert trace_distance(out.matrix, rho0.matrix) <= 0.01
        assert rep.error_measured <= rep.error_bound
        assert not rep.no_reversal

    def test_subthreshold_slows_but_never_reverses(self):
        rng = SplitMix64(57)
        h = gue_hamiltonian(rng, 2)
        rho_t = h.evolve(random_pure_state(rng, 2), 1.0)
        anc = complement_ancilla(h)
        out, rep = run_reversal(rho_t, h, anc, omega=0.5 * anc.normalization, tau=1.0, n_steps=4000)
        assert rep.no_reversal
        assert rep.net_backward_shift == pytest.approx(-0.5)
        shift = estimate_net_shift(out, rho_t, h, s_max=1.0, n_grid=401)
        assert shift == pytest.approx(-0.5, abs=0.01)

    def test_drift_off_pure_rewind(self):
        rng = SplitMix64(58)
        h = gue_hamiltonian(rng, 2)
        rho_t = h.evolve(random_pure_state(rng, 2), 1.0)
        anc = complement_ancilla(h)
        out, rep = run_reversal(
            rho_t, h, anc, omega=anc.normalization, tau=1.0, n_steps=5000, drift_enabled=False
        )
        assert rep.net_backward_shift == pytest.approx(1.0)
        assert rep.trace_distance_to_target <= 2e-3

    def test_dimension_mismatch(self):
        rng = SplitMix64(59)
        h = gue_hamiltonian(rng, 2)
        with pytest.raises(ValueError):
            run_reversal(random_density(rng, 3), h, complement_ancilla(h), 1.0, 1.0, 10)


class TestThermalErrorStructure:
    def test_linearization_term_vanishes_for_diagonal_state(self):
        rho = DensityMatrix(np.diag([0.6, 0.4]).astype(complex))
        term = thermal_linearization_error(rho, TWO_LEVEL, 0.3, 1.0)
        assert np.max(np.abs(term)) <= 1e-15
        rng = SplitMix64(60)
        term0 = thermal_linearization_error(random_density(rng, 2), TWO_LEVEL, 0.0, 1.0)
        assert np.max(np.abs(term0)) == 0.0

    def test_deviation_matches_linearization_term(self):
        h = normalized_qubit(61)
        rng = SplitMix64(62)
        rho = random_density(rng, 2)
        tau = 1.0
        resid = {}
        for beta, n in ((0.2, 10**5), (0.1, 2 * 10**5)):
            anc = thermal_ancilla(h, beta)
            omega = 2 * threshold_rate(anc)
            out, rep = run_reversal(rho, h, anc, omega=omega, tau=tau, n_steps=n)
            target = h.evolve(rho, -rep.net_backward_shift)
            ideal_u = expm_hermitian_scaled(omega * anc.sigma.matrix + h.matrix, tau)
            ideal = DensityMatrix(ideal_u @ rho.matrix @ ideal_u.conj().T)
            from qrewind import dme_error_term

            d1 = dme_error_term(ideal, anc.sigma, omega * tau, n)
            d2 = thermal_linearization_error(target, h, beta, tau)
            deviation = out.matrix - target.matrix - d1
            assert spectral_norm(((deviation - d2) + (deviation - d2).conj().T) / 2) \
                <= 0.25 * spectral_norm((d2 + d2.conj().T) / 2)
            resid[beta] = spectral_norm(((deviation - d2) + (deviation - d2).conj().T) / 2)
        assert resid[0.2] / resid[0.1] == pytest.approx(4.0, rel=0.35)

    def test_bound_shape(self):
        assert thermal_error_bound(1.0, 2.0, 100, 0.0, 0.5, 1.0) == 0.0
        # first term vanishes as N grows, leaving the expansion part
        tail = thermal_error_bound(0.8, 2.0, 10**12, 1.0, 0.5, 1.0)
        assert tail == pytest.approx((1.0 / 0.5) * (0.5 * 1.0) ** 2 * 0.8, rel=1e-6)

    def test_bound_dominates_in_regime(self):
        # sampled dominance within beta*eps_max <= 0.3 and omega*dt <= 0.1
        for seed in (63, 64, 65):
            h = normalized_qubit(seed)
            rho = random_density(SplitMix64(1000 + seed), 2)
            beta = 0.3
            anc = thermal_ancilla(h, beta)
            omega = 2 * threshold_rate(anc)
            n = max(2000, int(omega * 1.0 / 0.1) + 1)
            _, rep = run_reversal(rho, h, anc, omega=omega, tau=1.0, n_steps=n)
            assert rep.error_measured <= rep.error_bound


class TestOptimalTemperature:
    def test_frozen_formula_substitution(self):
        d, tau, eps, n = 4, 2.0, 1.5, 10**6
        got = optimal_beta_frozen(float(d), eps, n, tau)
        assert got == pytest.approx((8 * d**2 * tau * eps / n) ** (1 / 3) / eps)

    def test_numeric_minimum_matches_closed_form(self):
        z, eps, n, tau, rho_norm = 7.3, 1.4, 10**6, 1.2, 0.9
        res = minimize_scalar(
            lambda b: thermal_error_bound(rho_norm, z, n, tau, b, eps),
            bracket=(1e-3, 0.1, 10.0),
            method="golden",
            options={"xtol": 1e-12},
        )
        beta_star = optimal_beta_frozen(z, eps, n, tau)
        assert res.x == pytest.approx(beta_star, rel=0.01)
        assert res.fun == pytest.approx(
            net_accuracy_frozen(z, eps, n, tau, rho_norm), rel=1e-9
        )

    def test_self_consistent_close_to_frozen(self):
        beta = optimal_beta(TWO_LEVEL, 10**6, 1.0)
        frozen = optimal_beta_frozen(2.0, 1.0, 10**6, 1.0)
        assert beta == pytest.approx(frozen, rel=0.05)

    def test_monotone_in_steps(self):
        b1 = optimal_beta(TWO_LEVEL, 10**5, 1.0)
        b2 = optimal_beta(TWO_LEVEL, 10**6, 1.0)
        assert b2 < b1

    def test_net_accuracy_scalings(self):
        assert net_accuracy(TWO_LEVEL, 100, 0.0, 1.0) == 0.0
        e1 = net_accuracy_frozen(2.0, 1.0, 10**6, 1.0, 1.0)
        e2 = net_accuracy_frozen(2.0, 1.0, 2 * 10**6, 1.0, 1.0)
        assert e1 / e2 == pytest.approx(2 ** (1 / 3), rel=1e-12)
        # bound at the frozen optimum reproduces the closed form exactly
        z, eps, n, tau = 5.0, 2.0, 10**7, 3.0
        beta_star = optimal_beta_frozen(z, eps, n, tau)
        assert thermal_error_bound(1.0, z, n, tau, beta_star, eps) == pytest.approx(
            net_accuracy_frozen(z, eps, n, tau, 1.0), rel=1e-9
        )


class TestEnergyTruncation:
    def test_ground_state_untouched(self):
        h = gue_hamiltonian(SplitMix64(70), 4)
        ground = DensityMatrix.pure(h.eigenvectors[:, 0])
        cut = float(h.eigenvalues[0]) + 0.5 * float(h.eigenvalues[1] - h.eigenvalues[0])
        rho_low, rho_high, eps_e, bound = energy_truncate(ground, h, cut)
        assert np.max(np.abs(rho_low.matrix - ground.matrix)) <= 1e-10
        assert eps_e <= 1e-12
        assert rho_high is None

    def test_uniform_state_counting(self):
        d = 6
        h = Hamiltonian.from_matrix(np.diag(np.arange(d, dtype=float)).astype(complex))
        rho = DensityMatrix.maximally_mixed(d)
        _, _, eps_e, _ = energy_truncate(rho, h, d / 2)
        assert eps_e == pytest.approx((d - np.ceil(d / 2)) / d)

    def test_chebyshev_dominates_sampled(self):
        rng = SplitMix64(71)
        for _ in range(50):
            d = 2 + int(rng.uniform() * 7)
            h = gue_hamiltonian(rng, d)
            rho = random_density(rng, d)
            e_mean = float(np.trace(rho.matrix @ h.matrix).real)
            span = h.eps_max - e_mean
            if span <= 1e-9:
                continue
            cut = e_mean + (0.2 + 0.75 * rng.uniform()) * span
            _, _, eps_e, bound = energy_truncate(rho, h, cut)
            assert eps_e <= bound + 1e-12

    def test_rejects_cut_below_mean(self):
        h = gue_hamiltonian(SplitMix64(72), 3)
        rho = random_density(SplitMix64(73), 3)
        e_mean = float(np.trace(rho.matrix @ h.matrix).real)
        with pytest.raises(ValueError):
            energy_truncate(rho, h, e_mean - 0.1)

    def test_zero_variance_state(self):
        h = Hamiltonian.from_matrix(np.diag([0.0, 0.0, 2.0]).astype(complex))
        rho = DensityMatrix(np.diag([0.5, 0.5, 0.0]).astype(complex))
        _, _, eps_e, bound = energy_truncate(rho, h, 1.0)
        assert eps_e == 0.0
        assert bound == 0.0

    def test_truncated_protocol_close_to_full(self):
        # rewinding the trimmed state differs from the full rewind by at most
        # twice the trimmed weight
        rng = SplitMix64(74)
        h = gue_hamiltonian(rng, 6)
        rho0 = random_density(rng, 6, rank=2)
        tau = 0.5
        rho_t = h.evolve(rho0, tau)
        e_mean = float(np.trace(rho_t.matrix @ h.matrix).real)
        cut = e_mean + 0.35 * (h.eps_max - e_mean)
        rho_low, _, eps_e, _ = energy_truncate(rho_t, h, cut)
        assert 0.01 <= eps_e <= 0.6

        anc = complement_ancilla(h)
        full, rep_full = run_reversal(rho_t, h, anc, 2 * anc.normalization, tau, 3 * 10**4)

        low = h.eigenvalues < cut
        v = h.eigenvectors[:, low]
        h_sub = Hamiltonian.from_matrix(np.diag(h.eigenvalues[low]).astype(complex))
        rho_sub_m = v.conj().T @ rho_low.matrix @ v
        rho_sub = DensityMatrix((rho_sub_m + rho_sub_m.conj().T) / 2)
        anc_sub = complement_ancilla(h_sub)
        out_sub, _ = run_reversal(rho_sub, h_sub, anc_sub, 2 * anc_sub.normalization, tau, 3 * 10**4)
        embedded = v @ out_sub.matrix @ v.conj().T
        assert trace_distance(full.matrix, embedded) <= 2 * eps_e


class TestThermalComplementLimit:
    def test_rewind_direction_matches_minus_h(self):
        h = normalized_qubit(75)
        rng = SplitMix64(76)
        rho_t = h.evolve(random_pure_state(rng, 2), 1.0)
        beta = 0.05
        anc = thermal_ancilla(h, beta)
        omega = 2 * threshold_rate(anc)
        out, rep = run_reversal(rho_t, h, anc, omega=omega, tau=0.5, n_steps=10**5)
        # the argmin flattens over the residual linearization error, so the
        # estimate carries an O(beta) bias; sign and magnitude still resolve
        shift = estimate_net_shift(out, rho_t, h, s_max=1.0, n_grid=801)
        assert shift == pytest.approx(rep.net_backward_shift, abs=0.05)
        assert rep.net_backward_shift == pytest.approx(0.5)
