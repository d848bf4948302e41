import math

import numpy as np
import pytest

from rydnoise.exceptions import (
    AmbiguousSteadyStateError,
    ConfigurationError,
    NumericalError,
)
from rydnoise.lindblad import (
    COORDS,
    DecayParameters,
    DensityMatrix,
    DriveParameters,
    build_hamiltonian,
    build_liouvillian,
    reduce_liouvillian,
    relaxation_gap,
    steady_state,
    time_evolve,
)
from rydnoise.noise import NoiseCouplings

TWO_PI = 2.0 * math.pi
GAMMA_2 = TWO_PI * 6.0666e6


def random_config(rng):
    drives = DriveParameters(
        omega_p=float(rng.uniform(0.1, 2.0)) * GAMMA_2,
        omega_c=float(rng.uniform(0.1, 2.0)) * GAMMA_2,
        omega_rf=float(rng.uniform(0.0, 3.0)) * GAMMA_2,
        delta_p=float(rng.uniform(-1, 1)) * GAMMA_2,
        delta_c=float(rng.uniform(-1, 1)) * GAMMA_2,
        delta_rf=float(rng.uniform(-1, 1)) * GAMMA_2,
    )
    decays = DecayParameters(
        gamma_2=GAMMA_2,
        gamma_3=float(rng.uniform(0.02, 0.5)) * GAMMA_2,
        gamma_4=float(rng.uniform(0.02, 0.5)) * GAMMA_2,
        gamma_extra=float(rng.uniform(0, 0.1)) * GAMMA_2,
        couplings=NoiseCouplings(
            r_34=float(rng.uniform(0, 0.5)) * GAMMA_2,
            r_d3=float(rng.uniform(0, 0.5)) * GAMMA_2,
            r_e4=float(rng.uniform(0, 0.5)) * GAMMA_2,
            shift_3_hz=float(rng.uniform(-10e6, 10e6)),
            shift_4_hz=float(rng.uniform(-10e6, 10e6)),
        ),
    )
    shifts = (decays.couplings.shift_3_hz, decays.couplings.shift_4_hz)
    velocity = float(rng.uniform(-30, 30))
    h = build_hamiltonian(drives, shifts_hz=shifts, velocity=velocity)
    return h, decays


class TestHamiltonian:
    def test_all_zero(self):
        h = build_hamiltonian(DriveParameters())
        assert np.all(h == 0)

    def test_three_level_embedding(self):
        drives = DriveParameters(omega_p=1e6, omega_c=2e6, delta_p=3e5, delta_c=-4e5)
        h = build_hamiltonian(drives)
        assert h[2, 3] == 0 and h[3, 2] == 0
        assert np.all(h[4:, :] == 0) and np.all(h[:, 4:] == 0)
        assert h[0, 1] == 0.5e6 and h[1, 2] == 1e6
        assert h[1, 1] == -3e5 and h[2, 2] == -(3e5 - 4e5)

    def test_doppler_signs(self):
        lam_p, lam_c = 780.241e-9, 479.9285e-9
        v = 10.0
        h = build_hamiltonian(DriveParameters(), velocity=v, wavelengths=(lam_p, lam_c))
        k_p = TWO_PI / lam_p
        k_c = TWO_PI / lam_c
        # probe detuning shifts by -k_p v -> diagonal -(delta_p - k_p v) = +k_p v
        assert h[1, 1] == pytest.approx(k_p * v, rel=1e-12)
        # cascade diagonal picks up -(delta_p + delta_c) with delta_c -> +k_c v
        assert h[2, 2] == pytest.approx((k_p - k_c) * v, rel=1e-12)

    def test_shifts_enter_as_level_energies(self):
        h = build_hamiltonian(DriveParameters(), shifts_hz=(2e6, -3e6))
        assert h[2, 2] == pytest.approx(TWO_PI * 2e6)
        assert h[3, 3] == pytest.approx(-TWO_PI * 3e6)


class TestLiouvillian:
    def test_matches_direct_lindblad(self):
        from rydnoise.lindblad import _jump_operators

        rng = np.random.default_rng(3)
        h, decays = random_config(rng)
        lv = build_liouvillian(h, decays)
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        rho = a @ a.conj().T
        rho /= rho.trace()
        direct = -1j * (h @ rho - rho @ h)
        for c in _jump_operators(decays):
            cdc = c.conj().T @ c
            direct += c @ rho @ c.conj().T - 0.5 * (cdc @ rho + rho @ cdc)
        got = (lv @ rho.reshape(36)).reshape(6, 6)
        scale = np.abs(direct).max()
        assert np.abs(got - direct).max() < 1e-12 * scale

    def test_trace_preserving_on_random_states(self):
        rng = np.random.default_rng(5)
        h, decays = random_config(rng)
        lv = build_liouvillian(h, decays)
        for _ in range(100):
            a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
            rho = a @ a.conj().T
            rho /= rho.trace()
            out = (lv @ rho.reshape(36)).reshape(6, 6)
            assert abs(out.trace()) < 1e-8 * np.abs(lv).max() / TWO_PI

    def test_negative_rate_rejected(self):
        with pytest.raises(ConfigurationError):
            DecayParameters(gamma_2=-1.0)

    def test_detailed_balance_of_fictive_exchange(self):
        # only R_d3 > 0: equal bidirectional rates equalize rho_33 and rho_dd
        decays = DecayParameters(gamma_2=0.0, couplings=NoiseCouplings(r_d3=1e5))
        lv = build_liouvillian(np.zeros((6, 6), complex), decays)
        rho0 = np.zeros((6, 6), complex)
        rho0[2, 2] = 1.0
        rho = time_evolve(lv, rho0, 50.0 / 1e5)
        assert rho.populations[2] == pytest.approx(0.5, abs=1e-8)
        assert rho.populations[4] == pytest.approx(0.5, abs=1e-8)

    def test_fictive_block_decouples(self):
        rng = np.random.default_rng(8)
        h, decays = random_config(rng)
        reduce_liouvillian(build_liouvillian(h, decays))  # raises if coupled


class TestSteadyState:
    def test_two_level_ground_projector(self):
        lv = build_liouvillian(
            build_hamiltonian(DriveParameters()), DecayParameters(gamma_2=GAMMA_2)
        )
        rho = steady_state(lv)
        assert rho.populations[0] == pytest.approx(1.0, abs=1e-12)

    def test_agrees_with_long_time_evolution(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            h, decays = random_config(rng)
            lv = build_liouvillian(h, decays)
            rho_ss = steady_state(lv)
            rho0 = np.zeros((6, 6), complex)
            rho0[0, 0] = 1.0
            rho_t = time_evolve(lv, rho0, 50.0 / relaxation_gap(lv), rtol=1e-11, atol=1e-13)
            assert np.abs(rho_t.matrix - rho_ss.matrix).max() < 1e-8

    def test_weak_probe_eit_dip(self):
        decays = DecayParameters(gamma_2=GAMMA_2, gamma_3=TWO_PI * 1e4)
        no_coupling = steady_state(
            build_liouvillian(
                build_hamiltonian(DriveParameters(omega_p=GAMMA_2 / 100)), decays
            )
        )
        with_coupling = steady_state(
            build_liouvillian(
                build_hamiltonian(
                    DriveParameters(omega_p=GAMMA_2 / 100, omega_c=TWO_PI * 3e6)
                ),
                decays,
            )
        )
        assert abs(with_coupling.coherence(1, 0).imag) < 0.1 * abs(
            no_coupling.coherence(1, 0).imag
        )

    def test_degenerate_null_space_raises(self):
        lv = build_liouvillian(
            build_hamiltonian(DriveParameters(omega_p=1e6)), DecayParameters(gamma_2=0.0)
        )
        with pytest.raises(AmbiguousSteadyStateError):
            steady_state(lv)

    def test_positivity_on_random_configs(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            h, decays = random_config(rng)
            rho = steady_state(build_liouvillian(h, decays))
            eigs = np.linalg.eigvalsh(rho.matrix)
            assert eigs.min() > -1e-8

    def test_fictive_coherences_exactly_zero(self):
        rng = np.random.default_rng(17)
        h, decays = random_config(rng)
        rho = steady_state(build_liouvillian(h, decays)).matrix
        for i in range(6):
            for j in (4, 5):
                if i != j:
                    assert rho[i, j] == 0.0 and rho[j, i] == 0.0

    def test_reduction_to_four_level_model(self):
        # independent 4-level cascade implementation as the oracle
        rng = np.random.default_rng(33)
        drives = DriveParameters(
            omega_p=0.3 * GAMMA_2,
            omega_c=0.7 * GAMMA_2,
            omega_rf=1.1 * GAMMA_2,
            delta_p=0.2 * GAMMA_2,
            delta_c=-0.4 * GAMMA_2,
            delta_rf=0.1 * GAMMA_2,
        )
        decays = DecayParameters(gamma_2=GAMMA_2, gamma_3=0.1 * GAMMA_2, gamma_4=0.05 * GAMMA_2)
        rho6 = steady_state(build_liouvillian(build_hamiltonian(drives), decays)).matrix

        h4 = np.zeros((4, 4), complex)
        h4[0, 1] = h4[1, 0] = drives.omega_p / 2
        h4[1, 2] = h4[2, 1] = drives.omega_c / 2
        h4[2, 3] = h4[3, 2] = drives.omega_rf / 2
        h4[1, 1] = -drives.delta_p
        h4[2, 2] = -(drives.delta_p + drives.delta_c)
        h4[3, 3] = -(drives.delta_p + drives.delta_c + drives.delta_rf)
        jumps = []
        for rate, to, frm in (
            (decays.gamma_2, 0, 1),
            (decays.gamma_3, 1, 2),
            (decays.gamma_4, 2, 3),
        ):
            c = np.zeros((4, 4), complex)
            c[to, frm] = math.sqrt(rate)
            jumps.append(c)
        eye = np.eye(4)
        lv4 = -1j * (np.kron(h4, eye) - np.kron(eye, h4.T))
        for c in jumps:
            cdc = c.conj().T @ c
            lv4 += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T))
        lv4[0, :] = 0.0
        lv4[0, [0, 5, 10, 15]] = 1.0
        rhs = np.zeros(16, complex)
        rhs[0] = 1.0
        rho4 = np.linalg.solve(lv4, rhs).reshape(4, 4)
        assert np.abs(rho6[:4, :4] - rho4).max() < 1e-10

    def test_at_splitting_of_transparency_maxima(self):
        # weak probe, v = 0: transparency maxima separated by Omega_RF
        omega_rf = TWO_PI * 40e6
        decays = DecayParameters(gamma_2=GAMMA_2, gamma_3=TWO_PI * 1e4, gamma_4=TWO_PI * 1e4)
        detunings = TWO_PI * np.linspace(-30e6, 30e6, 1201)
        absorption = []
        for dc in detunings:
            drives = DriveParameters(
                omega_p=GAMMA_2 / 60, omega_c=TWO_PI * 1.5e6, omega_rf=omega_rf, delta_c=dc
            )
            rho = steady_state(build_liouvillian(build_hamiltonian(drives), decays))
            absorption.append(-rho.coherence(1, 0).imag)
        absorption = np.asarray(absorption)
        maxima = [
            detunings[k]
            for k in range(1, len(absorption) - 1)
            if absorption[k] < absorption[k - 1] and absorption[k] <= absorption[k + 1]
        ]
        assert len(maxima) >= 2
        # the two transparency minima of absorption sit at +-Omega_RF/2
        split = abs(maxima[-1] - maxima[0])
        assert abs(split - omega_rf) / omega_rf < 0.02

    def test_shift_additivity(self):
        # shifting level 3 by s moves the EIT transparency point to delta_c = +s
        shift = 5e6
        decays = DecayParameters(gamma_2=GAMMA_2, gamma_3=TWO_PI * 1e4)
        detunings = TWO_PI * np.linspace(3e6, 7e6, 401)
        absorption = []
        for dc in detunings:
            drives = DriveParameters(omega_p=GAMMA_2 / 60, omega_c=TWO_PI * 1.5e6, delta_c=dc)
            h = build_hamiltonian(drives, shifts_hz=(shift, 0.0))
            rho = steady_state(build_liouvillian(h, decays))
            absorption.append(-rho.coherence(1, 0).imag)
        k = int(np.argmin(absorption))
        assert abs(detunings[k] / TWO_PI - shift) < 2 * (detunings[1] - detunings[0]) / TWO_PI


class TestTimeEvolve:
    def test_zero_generator(self):
        rho0 = np.zeros((6, 6), complex)
        rho0[0, 0] = 0.5
        rho0[1, 1] = 0.5
        rho = time_evolve(np.zeros((36, 36), complex), rho0, 1.0)
        assert np.abs(rho.matrix - rho0).max() < 1e-12

    def test_exponential_decay(self):
        lv = build_liouvillian(
            build_hamiltonian(DriveParameters()), DecayParameters(gamma_2=GAMMA_2)
        )
        rho0 = np.zeros((6, 6), complex)
        rho0[1, 1] = 1.0
        t = 20e-9
        rho = time_evolve(lv, rho0, t)
        assert rho.populations[1] == pytest.approx(math.exp(-GAMMA_2 * t), abs=1e-6)

    def test_tolerance_contract(self):
        rng = np.random.default_rng(2)
        h, decays = random_config(rng)
        lv = build_liouvillian(h, decays)
        rho0 = np.zeros((6, 6), complex)
        rho0[0, 0] = 1.0
        t = 3.0 / GAMMA_2
        loose = time_evolve(lv, rho0, t, rtol=1e-8, atol=1e-10)
        tight = time_evolve(lv, rho0, t, rtol=1e-12, atol=1e-14)
        assert np.abs(loose.matrix - tight.matrix).max() < 10.0 * 1e-8


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        bad = np.eye(6, dtype=complex)
        bad[0, 1] = 1.0
        with pytest.raises(NumericalError):
            DensityMatrix(bad / bad.trace())

    def test_rejects_bad_trace(self):
        with pytest.raises(NumericalError):
            DensityMatrix(0.5 * np.eye(6, dtype=complex))

    def test_rejects_fictive_coherence(self):
        bad = np.eye(6, dtype=complex) / 6.0
        bad[2, 4] = bad[4, 2] = 1e-6
        with pytest.raises(NumericalError):
            DensityMatrix(bad)

    def test_coords_layout(self):
        assert COORDS[:6] == tuple((k, k) for k in range(6))
        assert len(COORDS) == 18
