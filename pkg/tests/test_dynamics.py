import numpy as np
import pytest

from lienambu.dynamics import ModelSpec, effective_hamiltonian, integrate, rhs, step_isospectral, step_rk4
from lienambu.errors import DomainError, UnsupportedModelError, ValidationError
from lienambu.functionals import EntropySpec, HamiltonianSpec
from lienambu.matrix import commutator, hermitian_eig, unitary_conjugate
from lienambu.scenarios import analytic_rho_2x2, two_level_scenario

from conftest import I2, RHO_34, SX, SY, SZ, random_density, random_hermitian, random_pure

S3 = EntropySpec.preset("S3")
LINEAR = EntropySpec.preset("linear")
OMEGA_1_05 = 2 / np.sqrt(1.75)  # 1.5118578920369088


def model(h, entropy=S3):
    return ModelSpec(h.shape[0], HamiltonianSpec(matrix=h), entropy)


class TestRhs:
    def test_von_neumann_anchor(self):
        rho = 0.5 * I2 + 0.25 * SX
        np.testing.assert_allclose(rhs(model(SZ, LINEAR), rho), 0.5 * SY, atol=1e-15)

    def test_s3_matrix_equation(self):
        # i drho/dt = sqrt(Tr rho / Tr rho^3) [h, rho^2] with Tr rho = 1, Tr rho^3 = 0.4375
        expected = np.sqrt(1 / 0.4375) * np.array([[0, -0.5], [0.5, 0]])
        np.testing.assert_allclose(1j * rhs(model(SX), RHO_34), expected, atol=1e-15)
        np.testing.assert_allclose(expected[1, 0], 0.5 * 1.511858, atol=1e-6)

    def test_projector_is_linear(self, rng):
        for d in (2, 3):
            rho, h = random_pure(rng, d), random_hermitian(rng, d)
            np.testing.assert_allclose(rhs(model(h), rho), -1j * commutator(h, rho), atol=1e-12)

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_hermitian_traceless(self, rng, d):
        for entropy in (S3, LINEAR, EntropySpec(((1.0, ((2, 2.0),)),))):
            r = rhs(model(random_hermitian(rng, d), entropy), random_density(rng, d))
            assert np.max(np.abs(r - r.conj().T)) <= 1e-12
            assert abs(np.trace(r)) <= 1e-12

    def test_casimir_built_hamiltonian_gives_no_motion(self, rng):
        m = ModelSpec(3, HamiltonianSpec(casimir=LINEAR), S3)
        np.testing.assert_allclose(rhs(m, random_density(rng, 3)), 0, atol=1e-12)


class TestEffectiveHamiltonian:
    def test_s3_example(self):
        A = effective_hamiltonian(model(SX), RHO_34)
        np.testing.assert_allclose(A, OMEGA_1_05 * SX, atol=1e-15)

    def test_linear_is_h(self, rng):
        h = random_hermitian(rng, 3)
        np.testing.assert_allclose(effective_hamiltonian(model(h, LINEAR), random_density(rng, 3)), h)

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_commutator_consistency(self, rng, d):
        spec = EntropySpec(((2 / 3, ((1, 0.5), (3, 0.5))), (0.2, ((5, 1.0),)), (0.1, ((2, 2.0),))))
        for entropy in (S3, spec):
            m = model(random_hermitian(rng, d), entropy)
            rho = random_density(rng, d)
            A = effective_hamiltonian(m, rho)
            assert np.max(np.abs(A - A.conj().T)) == 0
            assert np.max(np.abs(1j * rhs(m, rho) - commutator(A, rho))) <= 1e-10

    def test_requires_linear_h(self, rng):
        with pytest.raises(UnsupportedModelError):
            effective_hamiltonian(ModelSpec(2, HamiltonianSpec(casimir=LINEAR), S3), RHO_34)


class TestSteppers:
    def test_rk4_consistency_order(self, rng):
        m = model(random_hermitian(rng, 3))
        rho = random_density(rng, 3)
        f = rhs(m, rho)
        errs = [np.linalg.norm(step_rk4(m, rho, dt) - rho - dt * f) for dt in (1e-2, 5e-3)]
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)

    def test_rk4_one_step_vs_closed_form(self):
        m, rho0, r = two_level_scenario()
        out = step_rk4(m, rho0, 1e-3)
        assert np.max(np.abs(out - analytic_rho_2x2(SX, r, 1e-3))) <= 1e-12

    def test_rk4_linear_conserves_purity(self, rng):
        m = model(SX, LINEAR)
        rho = random_density(rng, 2)
        c2 = np.trace(rho @ rho).real
        for _ in range(1000):
            rho = step_rk4(m, rho, 1e-3)
        assert abs(np.trace(rho @ rho).real - c2) <= 1e-10

    def test_rk4_rejects_nonpositive_dt(self):
        with pytest.raises(ValidationError):
            step_rk4(model(SX), RHO_34, 0.0)

    def test_isospectral_zero_step(self):
        np.testing.assert_array_equal(step_isospectral(model(SX), RHO_34, 0.0), RHO_34)

    @pytest.mark.slow
    def test_isospectral_long_run_spectrum(self):
        m, rho, _ = two_level_scenario()
        for _ in range(10_000):
            rho = step_isospectral(m, rho, 1e-2)
        np.testing.assert_allclose(hermitian_eig(rho).eigenvalues, [0.75, 0.25], atol=1e-11)

    def test_isospectral_vs_closed_form(self):
        m, rho0, r = two_level_scenario()
        traj = integrate(m, rho0, "isospectral", 1e-2, 10.0, 1)
        exact = analytic_rho_2x2(SX, r, traj.times)
        assert np.max(np.linalg.norm(traj.rhos - exact, axis=(1, 2))) <= 1e-4

    def test_isospectral_pure_state_order(self, rng):
        # the frozen generator {h, rho} drifts with rho unless h is traceless at d = 2
        h, rho0 = random_hermitian(rng, 3), random_pure(rng, 3)
        m = model(h)
        errs = []
        for dt in (2e-2, 1e-2):
            traj = integrate(m, rho0, "isospectral", dt, 5.0)
            exact = np.array([unitary_conjugate(h, t, rho0) for t in traj.times])
            errs.append(np.max(np.abs(traj.rhos - exact)))
            assert np.max(np.abs(traj.eigenvalues() - [1, 0, 0])) <= 1e-12
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
        h2 = random_hermitian(rng, 2)
        h2 -= 0.5 * np.trace(h2) * I2
        rho2 = random_pure(rng, 2)
        traj = integrate(model(h2), rho2, "isospectral", 1e-2, 10.0, sample_every=10)
        exact = np.array([unitary_conjugate(h2, t, rho2) for t in traj.times])
        assert np.max(np.abs(traj.rhos - exact)) <= 1e-12

    def test_isospectral_any_step_size(self, rng):
        m = model(random_hermitian(rng, 4))
        rho0 = random_density(rng, 4)
        lam0 = hermitian_eig(rho0).eigenvalues
        rho = rho0
        for _ in range(50):
            rho = step_isospectral(m, rho, 0.7)
        np.testing.assert_allclose(hermitian_eig(rho).eigenvalues, lam0, atol=1e-12)


class TestIntegrate:
    def test_zero_horizon(self):
        m, rho0, _ = two_level_scenario()
        traj = integrate(m, rho0, "rk4", 1e-3, 0.0)
        assert len(traj) == 1
        np.testing.assert_array_equal(traj.rhos[0], rho0)

    def test_final_sample_at_t_end(self):
        m, rho0, r = two_level_scenario()
        traj = integrate(m, rho0, "rk4", 0.03, 1.0, sample_every=5)
        assert traj.times[-1] == 1.0
        assert np.all(np.diff(traj.times) > 0)
        np.testing.assert_allclose(traj.times[:-1], 0.15 * np.arange(len(traj) - 1), atol=1e-14)
        assert np.max(np.abs(traj.rhos[-1] - analytic_rho_2x2(SX, r, 1.0))) <= 1e-6

    def test_channels(self):
        m, rho0, _ = two_level_scenario()
        traj = integrate(m, rho0, "rk4", 1e-2, 0.1, n_max=4)
        assert set(traj.channels) == {"lambda_1", "lambda_2", "C_1", "C_2", "C_3", "C_4", "S_value", "H_value",
                                      "herm_residue"}
        assert traj.channels["C_2"][0] == 0.625
        assert traj.channels["S_value"][0] == pytest.approx(0.4409586, abs=1e-7)
        assert traj.channels["H_value"][0] == 0.0

    def test_error_carries_time(self):
        m = model(SX)
        with pytest.raises(DomainError) as exc:
            integrate(m, np.diag([-0.5, 0.2]), "rk4", 1e-2, 1.0)
        assert exc.value.t == 0.0

    def test_rejects_bad_arguments(self):
        m, rho0, _ = two_level_scenario()
        with pytest.raises(ValidationError):
            integrate(m, rho0, "euler", 1e-2, 1.0)
        with pytest.raises(ValidationError):
            integrate(m, rho0, "rk4", 1e-2, 1.0, sample_every=0)
        with pytest.raises(ValidationError):
            integrate(m, np.eye(3) / 3, "rk4", 1e-2, 1.0)

    def test_rk4_fourth_order(self):
        m, rho0, r = two_level_scenario()
        errs = []
        for dt in (0.04, 0.02):
            traj = integrate(m, rho0, "rk4", dt, 2.0)
            errs.append(np.max(np.linalg.norm(traj.rhos - analytic_rho_2x2(SX, r, traj.times), axis=(1, 2))))
        assert 14 <= errs[0] / errs[1] <= 18

    @pytest.mark.parametrize("method,dt,tol", [("rk4", 1e-3, 1e-8), ("isospectral", 1e-2, 1e-11)])
    def test_casimir_conservation(self, method, dt, tol):
        m, rho0, _ = two_level_scenario()
        traj = integrate(m, rho0, method, dt, 10.0, sample_every=10)
        for n in range(1, 7):
            c = traj.channels[f"C_{n}"]
            assert np.max(np.abs(c - c[0])) <= tol
        lam = traj.eigenvalues()
        assert np.max(np.abs(lam - lam[0])) <= tol

    @pytest.mark.parametrize("method,dt", [("rk4", 1e-3), ("isospectral", 1e-2)])
    def test_linear_limit(self, rng, method, dt):
        h = random_hermitian(rng, 3)
        rho0 = random_density(rng, 3)
        traj = integrate(model(h, LINEAR), rho0, method, dt, 10.0, sample_every=50)
        exact = np.array([unitary_conjugate(h, t, rho0) for t in traj.times])
        assert np.max(np.abs(traj.rhos - exact)) <= 1e-8
