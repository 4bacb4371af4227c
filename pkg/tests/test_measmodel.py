import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_hermitian, random_ket
from edur import matcore
from edur import measmodel as mm
from edur.errors import InvalidInput
from edur.matcore import I2, SX, SY, SZ
from edur.qstate import PLUS_Z, Observable, QuantumState, basis_state, expectation, sigma

B_SPIN = Observable((SY + SZ) / math.sqrt(2), "B")


def spin_a(theta):
    return Observable(SX * math.sin(theta) + SZ * math.cos(theta), "A")


def state_vector_rms(op, joint):
    """||op |Ψ>||, an oracle for <op²>^½ that never squares the operator."""
    return float(np.linalg.norm(op @ joint.vector))


def trivial_model(a, b, meter, probe=None):
    probe = probe or basis_state(meter.shape[0], 0)
    d = a.shape[0] * meter.shape[0]
    return mm.MeasurementModel(
        probe_state=probe, interaction=np.eye(d), meter=Observable(meter),
        measured=Observable(a), disturbed=Observable(b),
    )


class TestModelValidation:
    def test_non_unitary_rejected(self):
        with pytest.raises(InvalidInput):
            mm.MeasurementModel(basis_state(2, 0), 2 * np.eye(4), Observable(SZ),
                                Observable(SZ), Observable(SZ))

    def test_probe_too_small(self):
        with pytest.raises(InvalidInput):
            mm.make_projective_model(Observable(np.diag([0.0, 1.0, 2.0])), probe_dim=2)

    def test_noise_must_be_probe_local(self):
        model = mm.make_projective_model(Observable(SZ))
        with pytest.raises(InvalidInput):
            mm.attach_noise(model, Observable(np.eye(4)))


class TestHeisenbergPicture:
    def test_trivial_interaction(self):
        meter = SX  # <σx> = 0 on |0>
        hq = mm.heisenberg_picture(trivial_model(SZ, SX, meter))
        assert_allclose(hq.n_a, np.kron(I2, meter) - np.kron(SZ, I2))

    def test_cnot_does_not_disturb_sigma_z(self):
        model = mm.make_projective_model(Observable(SZ))
        hq = mm.heisenberg_picture(model)
        assert_allclose(hq.b_out, hq.b_in, atol=1e-15)
        assert_allclose(hq.d_b, 0, atol=1e-15)
        # controlled flip: |0>|0> -> |0>|1>, |1>|0> -> |1>|0>
        u = model.interaction
        assert_allclose(u @ np.array([1, 0, 0, 0]), [0, 1, 0, 0])
        assert_allclose(u @ np.array([0, 0, 1, 0]), [0, 0, 1, 0])

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 7))
    def test_meter_and_b_commute(self, theta):
        model = mm.make_projective_model(spin_a(theta), disturbed=B_SPIN)
        hq = mm.heisenberg_picture(model, PLUS_Z)
        assert mm.meter_disturbance_commutator(hq) <= 1e-12
        assert_allclose(hq.script_n, hq.n_a + hq.a_in - math.cos(theta) * np.eye(4), atol=1e-14)

    def test_random_models_commute(self, rng):
        for _ in range(200):
            model, _ = mm.random_model(rng, int(rng.integers(2, 5)), int(rng.integers(2, 4)))
            assert mm.meter_disturbance_commutator(mm.heisenberg_picture(model)) <= 1e-10


class TestEpsilonEta:
    def test_ideal_sigma_z_random_states(self, rng):
        model = mm.make_projective_model(Observable(SZ))
        for _ in range(20):
            assert mm.epsilon(model, QuantumState.pure(random_ket(rng, 2))) <= 1e-10

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 11))
    def test_spin_setting_zero_error(self, theta):
        model = mm.make_projective_model(spin_a(theta), probe_dim=2, disturbed=B_SPIN)
        assert mm.epsilon(model, PLUS_Z) <= 1e-10

    @pytest.mark.parametrize("phi", [0.0, 0.3, 1.0, math.pi / 2, 2.5])
    def test_detuned_measurement(self, phi):
        model = mm.make_projective_model(Observable(matcore.SX * math.cos(phi) + SY * math.sin(phi)))
        model = mm.with_observables(model, measured=Observable(SX), disturbed=Observable(SY))
        assert mm.epsilon(model, PLUS_Z) == pytest.approx(2 * math.sin(phi / 2), abs=1e-12)

    def test_eta_commuting_b(self):
        model = mm.make_projective_model(Observable(SZ))
        assert mm.eta(model, PLUS_Z) <= 1e-12

    def test_eta_sigma_x_sigma_y(self):
        model = mm.make_projective_model(Observable(SX), disturbed=Observable(SY))
        assert mm.eta(model, PLUS_Z) == pytest.approx(math.sqrt(2), abs=1e-12)

    @pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 11))
    def test_spin_eta_oracle(self, theta):
        model = mm.make_projective_model(spin_a(theta), disturbed=B_SPIN)
        assert mm.eta(model, PLUS_Z) == pytest.approx(math.sqrt(1 + math.sin(theta) ** 2), abs=1e-12)

    def test_three_level_target(self, rng):
        target = Observable(random_hermitian(rng, 3))
        model = mm.make_projective_model(target, probe_dim=3)
        for _ in range(10):
            assert mm.epsilon(model, QuantumState.pure(random_ket(rng, 3))) <= 1e-10

    def test_larger_probe(self, rng):
        model = mm.make_projective_model(Observable(SZ), probe_dim=4)
        assert mm.epsilon(model, QuantumState.pure(random_ket(rng, 2))) <= 1e-10

    def test_two_ways(self, rng):
        for _ in range(100):
            model, psi = mm.random_model(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
            hq = mm.heisenberg_picture(model)
            joint = model.joint_state(psi)
            assert mm.epsilon(model, psi) == pytest.approx(state_vector_rms(hq.n_a, joint), abs=1e-10)
            assert mm.eta(model, psi) == pytest.approx(state_vector_rms(hq.d_b, joint), abs=1e-10)

    def test_gauge_shift(self, rng):
        for _ in range(20):
            model, psi = mm.random_model(rng, 2, 3)
            c = float(rng.normal())
            shifted = mm.MeasurementModel(
                probe_state=model.probe_state, interaction=model.interaction,
                meter=model.meter.shifted(c), measured=model.measured.shifted(c),
                disturbed=model.disturbed.shifted(c),
            )
            assert mm.epsilon(shifted, psi) == pytest.approx(mm.epsilon(model, psi), abs=1e-10)
            assert mm.eta(shifted, psi) == pytest.approx(mm.eta(model, psi), abs=1e-10)


class TestProductQuantity:
    def test_uncorrelated_trivial(self, rng):
        a, b = random_hermitian(rng, 2), random_hermitian(rng, 2)
        psi = QuantumState.pure(random_ket(rng, 2))
        model = trivial_model(a, b, np.zeros((2, 2)))
        raw, factored = mm.product_quantity(model, psi)
        # 𝒩 = -<A>, 𝒟 = ΔB: a constant times a system operator
        expected = abs(expectation(a, psi)) * sigma(b, psi)
        assert raw == pytest.approx(expected, abs=1e-12)
        assert factored == pytest.approx(expected, abs=1e-12)

    def test_disjoint_factors_product_state(self, rng):
        # meter on probe, B on system, product state, U = I: raw == factored
        meter = random_hermitian(rng, 2)
        probe = QuantumState.pure(random_ket(rng, 2))
        psi = QuantumState.pure(random_ket(rng, 2))
        model = trivial_model(random_hermitian(rng, 2), random_hermitian(rng, 2), meter, probe)
        raw, factored = mm.product_quantity(model, psi)
        assert raw == pytest.approx(factored, abs=1e-12)

    def test_spin_half_pi(self):
        model = mm.make_projective_model(spin_a(math.pi / 2), disturbed=B_SPIN)
        raw, factored = mm.product_quantity(model, PLUS_Z)
        # 𝒩² = I and <𝒟²> = 3/2 here, so both equal √(3/2)
        assert raw == pytest.approx(math.sqrt(1.5), abs=1e-12)
        assert factored == pytest.approx(math.sqrt(1.5), abs=1e-12)

    def test_spin_raw_and_factored_differ(self):
        model = mm.make_projective_model(spin_a(1.0), disturbed=B_SPIN)
        raw, factored = mm.product_quantity(model, PLUS_Z)
        assert abs(raw - factored) > 0.1

    def test_zero_error_zero_disturbance(self, rng):
        # trivial measurement of a commuting pair: 𝒩 = ΔA ⊗ I, 𝒟 = ΔB ⊗ I
        a = np.diag(rng.normal(size=3)).astype(complex)
        b = np.diag(rng.normal(size=3)).astype(complex)
        model = mm.make_projective_model(Observable(a), disturbed=Observable(b))
        psi = QuantumState.pure(random_ket(rng, 3))
        assert mm.epsilon(model, psi) <= 1e-10 and mm.eta(model, psi) <= 1e-10
        raw, factored = mm.product_quantity(model, psi)
        assert factored == pytest.approx(sigma(a, psi) * sigma(b, psi), abs=1e-10)


class TestAssumptionResiduals:
    @pytest.mark.parametrize("theta", np.linspace(0, math.pi / 2, 7))
    def test_spin_setting_values(self, theta):
        # first residual vanishes (ε = 0); the second is -σ(B)² = -1/2 for
        # this apparatus at every θ
        model = mm.make_projective_model(spin_a(theta), disturbed=B_SPIN)
        r1, r2 = mm.assumption_residuals(model, PLUS_Z)
        assert abs(r1) <= 1e-12
        assert r2 == pytest.approx(-0.5, abs=1e-12)

    def test_zero_error_model(self, rng):
        model = mm.make_projective_model(Observable(random_hermitian(rng, 3)))
        r1, _ = mm.assumption_residuals(model, QuantumState.pure(random_ket(rng, 3)))
        assert abs(r1) <= 1e-12

    def test_constant_meter_counterexample(self, rng):
        a = random_hermitian(rng, 2)
        psi = QuantumState.pure(random_ket(rng, 2))
        model = trivial_model(a, a, expectation(a, psi) * np.eye(2))
        r1, _ = mm.assumption_residuals(model, psi)
        assert r1 == pytest.approx(-sigma(a, psi) ** 2, abs=1e-10)

    def test_decomposition(self, rng):
        for _ in range(200):
            model, psi = mm.random_model(rng, int(rng.integers(2, 4)), int(rng.integers(2, 4)))
            hq = mm.heisenberg_picture(model, psi)
            joint = model.joint_state(psi)
            r1, r2 = mm.assumption_residuals(model, psi)
            n2 = expectation(hq.script_n @ hq.script_n, joint)
            d2 = expectation(hq.script_d @ hq.script_d, joint)
            e, h = mm.epsilon(model, psi), mm.eta(model, psi)
            sa, sb = sigma(model.measured, psi), sigma(model.disturbed, psi)
            assert n2 == pytest.approx(e**2 + sa**2 + 2 * r1, abs=1e-10)
            assert d2 == pytest.approx(h**2 + sb**2 + 2 * r2, abs=1e-10)

    def test_factored_formula_when_residuals_vanish(self, rng):
        # commuting diagonal A, B measured ideally: both residuals vanish
        for _ in range(20):
            a = np.diag(rng.normal(size=3)).astype(complex)
            b = np.diag(rng.normal(size=3)).astype(complex)
            model = mm.make_projective_model(Observable(a), disturbed=Observable(b))
            psi = QuantumState.pure(random_ket(rng, 3))
            s = mm.summarize(model, psi)
            assert max(map(abs, s.assumption_residuals)) <= 1e-10
            expected = math.hypot(s.epsilon, s.sigma_a) * math.hypot(s.eta, s.sigma_b)
            assert s.product_factored == pytest.approx(expected, abs=1e-10)


class TestNoise:
    def test_zero_noise(self, rng):
        model = mm.make_projective_model(Observable(SX), disturbed=Observable(SY))
        psi = QuantumState.pure(random_ket(rng, 2))
        noisy = mm.attach_noise(model, Observable(np.zeros((2, 2))))
        assert mm.epsilon(noisy, psi) == pytest.approx(mm.epsilon(model, psi), abs=1e-14)

    @pytest.mark.parametrize("c", [0.1, 0.5, -1.3])
    def test_constant_noise_adds_in_quadrature(self, rng, c):
        model = mm.make_projective_model(Observable(SX))
        model = mm.with_observables(model, measured=Observable(SX * 0.8 + SZ * 0.6))
        psi = QuantumState.pure(random_ket(rng, 2))
        hq = mm.heisenberg_picture(model)
        mean_n = expectation(hq.n_a, model.joint_state(psi))
        base = mm.epsilon(model, psi) ** 2
        noisy = mm.epsilon(mm.attach_noise(model, Observable(c * np.eye(2))), psi) ** 2
        assert noisy == pytest.approx(base + 2 * c * mean_n + c * c, abs=1e-12)

    def test_constant_noise_calibrated(self, rng):
        # ⟨M_out - A_in⟩ = 0 for an ideal measurement, so ε² gains exactly c²
        model = mm.make_projective_model(Observable(SZ))
        psi = QuantumState.pure(random_ket(rng, 2))
        noisy = mm.attach_noise(model, Observable(0.4 * np.eye(2)))
        assert mm.epsilon(noisy, psi) ** 2 == pytest.approx(0.16, abs=1e-12)

    def test_uncorrelated_noise_residual(self, rng):
        model = mm.make_projective_model(Observable(SZ))
        psi = QuantumState.pure(random_ket(rng, 2))
        # <δM>_ξ = 0 on ξ = |0>
        noisy = mm.attach_noise(model, Observable(SX))
        assert abs(mm.noise_correlation(noisy, psi)) <= 1e-12
