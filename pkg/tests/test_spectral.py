import warnings

import numpy as np
import pytest

from lienambu.dynamics import integrate
from lienambu.errors import ConditioningError, DomainError, ValidationError
from lienambu.functionals import casimir_value
from lienambu.matrix import SpectralDecomposition, hermitian_eig
from lienambu.scenarios import two_level_scenario
from lienambu.spectral import (
    conservation_report,
    elementary_symmetric,
    match_spectra,
    power_sums,
    signed_power_sums,
    spectrum_from_moments,
    top_eigenvalue_estimate,
)

from conftest import random_density, random_hermitian


def random_gapped_spectrum(rng, d, gap=0.05, lo=-1.0, hi=1.0):
    while True:
        lam = np.sort(rng.uniform(lo, hi, d))[::-1]
        if d == 1 or np.min(-np.diff(lam)) >= gap:
            return lam


class TestSignedPowerSums:
    def test_mixed_signature(self):
        np.testing.assert_allclose(signed_power_sums([0.6, 0.4], [1, -1], 3), [0.2, 0.52, 0.152], atol=1e-15)

    def test_plain_signature(self):
        np.testing.assert_allclose(signed_power_sums([0.75, 0.25], [1, 1], 3), [1.0, 0.625, 0.4375], atol=1e-15)

    def test_zero_spectrum(self):
        np.testing.assert_array_equal(signed_power_sums(np.zeros(3), [1, -1, 1], 4), np.zeros(4))

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            signed_power_sums([0.5, 0.5], [1], 2)

    def test_bad_signature(self):
        with pytest.raises(ValidationError):
            signed_power_sums([0.5, 0.5], [1, 0], 2)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_matches_casimirs(self, rng, d):
        rho = random_density(rng, d)
        lam = hermitian_eig(rho).eigenvalues
        p = signed_power_sums(lam, np.ones(d), 6)
        for n in range(1, 7):
            assert abs(p[n - 1] - casimir_value(rho, n)) <= 1e-10

    def test_odd_powers_flip_sign(self, rng):
        lam, eta = rng.uniform(-1, 1, 4), np.array([1, -1, -1, 1])
        p = signed_power_sums(lam, eta, 4)
        q = power_sums(lam, 4)
        np.testing.assert_allclose(p[1::2], q[1::2])
        assert not np.allclose(p[0::2], q[0::2])


class TestTopEigenvalue:
    def test_two_level(self):
        moments = power_sums([0.75, 0.25], 16)
        assert top_eigenvalue_estimate(moments, 16) == pytest.approx(0.75, abs=1e-6)

    def test_pure(self):
        moments = power_sums([1.0, 0.0, 0.0], 8)
        for m in range(1, 9):
            assert top_eigenvalue_estimate(moments, m) == 1.0

    def test_nonpositive_moment(self):
        with pytest.raises(DomainError):
            top_eigenvalue_estimate(signed_power_sums([0.4, 0.6], [1, -1], 3), 1)
        with pytest.raises(DomainError):
            top_eigenvalue_estimate([0.0, 0.0], 2)

    def test_order_out_of_range(self):
        with pytest.raises(ValidationError):
            top_eigenvalue_estimate([1.0, 0.5], 3)

    def test_monotone_with_bound(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 7))
            lam = rng.uniform(0, 1, d)
            p1 = lam.max()
            moments = power_sums(lam, 16)
            est = [top_eigenvalue_estimate(moments, m) for m in (2, 4, 8, 16)]
            assert all(a >= b - 1e-15 for a, b in zip(est, est[1:]))
            for m, e in zip((2, 4, 8, 16), est):
                assert -1e-15 <= e - p1 <= p1 * (d ** (1 / m) - 1) + 1e-15


class TestRecovery:
    def test_newton_identities(self):
        np.testing.assert_allclose(elementary_symmetric([1.0, 0.54, 0.352]), [1.0, 0.23, 0.014], atol=1e-15)

    def test_known_triple(self):
        rec = spectrum_from_moments([1.0, 0.54, 0.352], 3)
        np.testing.assert_allclose(rec.values, [0.7, 0.2, 0.1], atol=1e-12)
        assert rec.residual <= 1e-12

    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_identity_moments(self, d):
        np.testing.assert_allclose(spectrum_from_moments([float(d)] * d, d).values, np.ones(d), atol=1e-12)

    def test_round_trip(self, rng):
        worst = 0.0
        for _ in range(50):
            d = int(rng.integers(1, 7))
            lam = random_gapped_spectrum(rng, d)
            rec = spectrum_from_moments(power_sums(lam, d), d)
            worst = max(worst, float(np.max(np.abs(rec.values - lam))))
        assert worst <= 1e-8

    def test_squared_spectrum_gives_moduli(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 6))
            lam = random_gapped_spectrum(rng, d, lo=0.1, hi=1.0) * rng.choice([-1, 1], d)
            sq = spectrum_from_moments(power_sums(lam ** 2, d), d).values
            np.testing.assert_allclose(np.sqrt(sq), np.sort(np.abs(lam))[::-1], atol=1e-8)

    def test_extra_moments_ignored(self):
        rec = spectrum_from_moments(power_sums([0.7, 0.2, 0.1], 6), 3)
        np.testing.assert_allclose(rec.values, [0.7, 0.2, 0.1], atol=1e-12)

    def test_zero_moments_warn(self):
        with pytest.warns(RuntimeWarning):
            rec = spectrum_from_moments([0.0, 0.0, 0.0], 3)
        assert rec.degenerate_zero
        np.testing.assert_array_equal(rec.values, np.zeros(3))

    def test_inconsistent_moments_raise(self):
        # no real spectrum of length 2 has p1 = 0, p2 = -1
        with pytest.raises(ConditioningError) as exc:
            spectrum_from_moments([0.0, -1.0], 2)
        assert exc.value.residual > 1e-6

    def test_too_few_moments(self):
        with pytest.raises(ValidationError):
            spectrum_from_moments([1.0, 0.5], 3)


def decomposition(values, vectors):
    return SpectralDecomposition(np.asarray(values, dtype=float), np.asarray(vectors, dtype=complex))


class TestMatchSpectra:
    def test_identity(self, rng):
        dec = hermitian_eig(random_hermitian(rng, 4))
        np.testing.assert_array_equal(match_spectra(dec, dec), np.arange(4))

    def test_transposition(self):
        prev = decomposition([0.75, 0.25], np.eye(2))
        curr = decomposition([0.25, 0.75], np.eye(2)[:, ::-1])
        np.testing.assert_array_equal(match_spectra(prev, curr), [1, 0])

    def test_tie_uses_overlap(self):
        prev = decomposition([0.5, 0.5], np.eye(2))
        curr = decomposition([0.5, 0.5], np.eye(2)[:, ::-1])
        np.testing.assert_array_equal(match_spectra(prev, curr), [1, 0])

    def test_adjacent_samples_along_scenario(self):
        m, rho0, _ = two_level_scenario()
        traj = integrate(m, rho0, "rk4", 1e-3, 10.0, sample_every=20)
        decs = [hermitian_eig(r) for r in traj.rhos]
        for a, b in zip(decs, decs[1:]):
            np.testing.assert_array_equal(match_spectra(a, b), [0, 1])


class TestConservationReport:
    def test_single_sample(self):
        m, rho0, _ = two_level_scenario()
        rep = conservation_report(integrate(m, rho0, "rk4", 1e-3, 0.0), 6)
        assert rep["samples"] == 1
        assert rep["max_casimir_drift"] == 0.0
        assert rep["max_eigenvalue_drift"] == 0.0

    def test_isospectral_run(self):
        m, rho0, _ = two_level_scenario()
        rep = conservation_report(integrate(m, rho0, "isospectral", 1e-2, 10.0), 6, signature=[1, -1])
        assert rep["max_eigenvalue_drift"] <= 1e-11
        assert rep["max_casimir_drift"] <= 1e-11
        assert {f"signed_moment_drift_{n}" for n in range(1, 7)} <= set(rep)
        assert max(rep[f"signed_moment_drift_{n}"] for n in range(1, 7)) <= 1e-11
        assert all(isinstance(v, (int, float)) for v in rep.values())

    def test_rk4_run(self):
        m, rho0, _ = two_level_scenario()
        rep = conservation_report(integrate(m, rho0, "rk4", 1e-3, 10.0, sample_every=10), 6)
        for n in range(1, 7):
            assert rep[f"casimir_drift_{n}"] <= 1e-8
        assert rep["max_herm_residue"] <= 1e-12
