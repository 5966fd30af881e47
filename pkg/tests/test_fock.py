import numpy as np
import pytest

from oscbath import fock


def purity(rho):
    return float(np.trace(rho @ rho).real)


class TestSuperoperator:
    def test_zero_rates_pure_commutator(self):
        spec = fock.TruncatedLindbladSpec(1, 10, [[1.0]], [[0.0]], [[0.0]])
        rho0 = fock.coherent_rho(0.6, 10)
        rho = fock.integrate(spec, rho0, 2.4)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
        assert purity(rho) == pytest.approx(purity(rho0), abs=1e-9)

    def test_vacuum_fixed_point_at_zero_temperature(self):
        spec = fock.TruncatedLindbladSpec(1, 8, [[1.0]], [[0.1]], [[0.0]])
        lind = fock.build_superoperator(spec)
        vac = fock.vacuum_rho(8)
        assert np.abs(lind @ vac.ravel()).max() < 1e-14

    def test_action_matches_hand_assembled_instance(self):
        # damped oscillator on a test matrix, expanded by hand with the
        # sqrt(n) ladder elements: (a rho a^dag)_{nm} = sqrt((n+1)(m+1)) rho_{n+1,m+1}
        cutoff = 4
        omega, ge, ga = 1.3, 0.22, 0.06
        spec = fock.TruncatedLindbladSpec(1, cutoff, [[omega]], [[ge]], [[ga]])
        lind = fock.build_superoperator(spec)
        rng = np.random.default_rng(0)
        rho = np.zeros((5, 5), complex)
        block = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho[:3, :3] = block + block.T.conj()  # support below the truncation edge

        out = (lind @ rho.ravel()).reshape(5, 5)
        nvec = np.arange(5.0)
        expect = np.zeros((5, 5), complex)
        for n in range(5):
            for m in range(5):
                val = -1j * omega * (n - m) * rho[n, m]
                if n + 1 < 5 and m + 1 < 5:
                    val += ge * np.sqrt((n + 1) * (m + 1)) * rho[n + 1, m + 1]
                val -= 0.5 * ge * (nvec[n] + nvec[m]) * rho[n, m]
                if n >= 1 and m >= 1:
                    val += ga * np.sqrt(n * m) * rho[n - 1, m - 1]
                val -= 0.5 * ga * ((n + 1) + (m + 1)) * rho[n, m]
                expect[n, m] = val
        np.testing.assert_allclose(out, expect, atol=1e-13)

    def test_literal_plus_sign_breaks_trace_preservation(self):
        spec = fock.TruncatedLindbladSpec(1, 8, [[1.0]], [[0.1]], [[0.02]],
                                          literal_plus_sign=True)
        lind = fock.build_superoperator(spec)
        rho = fock.thermal_rho(0.5, 8)
        trace_rate = np.trace((lind @ rho.ravel()).reshape(9, 9))
        assert abs(trace_rate) > 1e-3  # the canonical form keeps this at 0
        spec_ok = fock.TruncatedLindbladSpec(1, 8, [[1.0]], [[0.1]], [[0.02]])
        lind_ok = fock.build_superoperator(spec_ok)
        assert abs(np.trace((lind_ok @ rho.ravel()).reshape(9, 9))) < 1e-14

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            fock.TruncatedLindbladSpec(3, 8, np.eye(3), np.zeros((3, 3)), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            fock.TruncatedLindbladSpec(1, 3, [[1.0]], [[0.1]], [[0.0]])
        with pytest.raises(ValueError):
            fock.TruncatedLindbladSpec(1, 8, [[1.0]], [[-0.1]], [[0.0]])


class TestIntegrate:
    def test_zero_time_returns_input(self):
        spec = fock.TruncatedLindbladSpec(1, 6, [[1.0]], [[0.1]], [[0.0]])
        rho0 = fock.coherent_rho(0.3, 6)
        np.testing.assert_array_equal(fock.integrate(spec, rho0, 0.0), rho0)

    def test_single_excitation_decay(self):
        # <n>(t) = exp(-2 gamma t) from the adjoint equation at nbar = 0
        gamma = 0.15
        cutoff = 6
        spec = fock.TruncatedLindbladSpec(1, cutoff, [[1.0]], [[2 * gamma]], [[0.0]])
        rho0 = np.zeros((7, 7), complex)
        rho0[1, 1] = 1.0
        num = np.diag(np.arange(7.0))
        for t in (0.5, 2.0, 6.0):
            rho = fock.integrate(spec, rho0, t)
            n_t = np.trace(rho @ num).real
            assert n_t == pytest.approx(np.exp(-2 * gamma * t), abs=1e-9)

    def test_trace_preserved_along_integration(self):
        spec = fock.TruncatedLindbladSpec(1, 10, [[1.0]], [[0.2]], [[0.05]])
        rho0 = fock.squeezed_vacuum_rho(0.4, 10)
        for t in (1.0, 10.0):
            rho = fock.integrate(spec, rho0, t)
            assert abs(np.trace(rho).real - 1.0) < 1e-9 * max(t, 1.0)

    def test_positivity_maintained(self):
        spec = fock.TruncatedLindbladSpec(1, 12, [[1.0]], [[0.3]], [[0.09]])
        rho0 = fock.coherent_rho(0.8, 12)
        for t in (0.7, 5.0):
            rho = fock.integrate(spec, rho0, t)
            fock.assert_density_matrix(rho, herm_tol=1e-11, trace_tol=1e-9,
                                       eig_tol=-1e-7)

    def test_cutoff_convergence(self):
        gamma, nbar = 0.1, 0.3
        moments_by_cutoff = []
        for cutoff in (14, 28):
            spec = fock.TruncatedLindbladSpec(
                1, cutoff, [[1.0]], [[2 * gamma * (nbar + 1)]], [[2 * gamma * nbar]])
            rho = fock.integrate(spec, fock.coherent_rho(0.3, cutoff), 4.0)
            moments_by_cutoff.append(fock.moments(rho, 1, cutoff))
        (m1, c1), (m2, c2) = moments_by_cutoff
        assert np.abs(m1 - m2).max() < 1e-7
        assert np.abs(c1 - c2).max() < 1e-7


class TestMoments:
    def test_vacuum(self):
        mean, cov = fock.moments(fock.vacuum_rho(8), 1, 8)
        np.testing.assert_allclose(mean, np.zeros(2), atol=1e-14)
        np.testing.assert_allclose(cov, np.eye(2), atol=1e-12)

    def test_coherent_state(self):
        # our quadrature normalization carries sqrt(2) * (Re, Im) means
        beta_c = 0.4 - 0.25j
        mean, cov = fock.moments(fock.coherent_rho(beta_c, 25), 1, 25)
        np.testing.assert_allclose(
            mean, [np.sqrt(2) * beta_c.real, np.sqrt(2) * beta_c.imag], atol=1e-10)
        np.testing.assert_allclose(cov, np.eye(2), atol=1e-9)

    def test_thermal_state(self):
        nbar = 0.6
        mean, cov = fock.moments(fock.thermal_rho(nbar, 60), 1, 60)
        np.testing.assert_allclose(cov, (2 * nbar + 1) * np.eye(2), atol=1e-8)

    def test_truncation_warning(self):
        with pytest.warns(UserWarning, match="truncation"):
            fock.moments(fock.coherent_rho(2.5, 6), 1, 6)
