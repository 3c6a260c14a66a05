import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from opkrylov import (
    ChainState,
    evolve_chain,
    exact_autocorrelation,
    krylov_complexity,
    run_lanczos,
    synthetic_largeq_chain,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class TestTwoSiteChain:
    def test_closed_form(self):
        """b = (beta): phi_0 = cos(beta t), phi_1 = sin(beta t)."""
        beta = 1.7
        t = np.linspace(0.0, 8.0, 161)
        state = evolve_chain([beta], t)
        assert isinstance(state, ChainState)
        assert np.max(np.abs(state.phi[:, 0] - np.cos(beta * t))) < 1e-12
        assert np.max(np.abs(state.phi[:, 1] - np.sin(beta * t))) < 1e-12
        assert np.allclose(state.b, [beta])

    def test_rk4_matches_closed_form(self):
        beta = 1.7
        t = np.linspace(0.0, 8.0, 81)
        state = evolve_chain([beta], t, method="rk4")
        assert np.max(np.abs(state.phi[:, 0] - np.cos(beta * t))) < 1e-6

    def test_complexity_closed_form(self):
        t = np.linspace(0.0, 5.0, 101)
        state = evolve_chain([2.0], t)
        assert np.max(np.abs(krylov_complexity(state) - np.sin(2.0 * t) ** 2)) < 1e-12

    def test_initial_condition(self):
        state = evolve_chain([1.0, 0.5], [0.0])
        assert np.allclose(state.phi[0], [1.0, 0.0, 0.0])
        assert krylov_complexity(state)[0] == pytest.approx(0.0)


class TestConservationAndMethods:
    def setup_method(self):
        rng = np.random.default_rng(41)
        self.b = rng.uniform(0.3, 2.0, size=60)

    def test_norm_conservation_eigen(self):
        t = np.linspace(0.0, 20.0, 201)
        state = evolve_chain(self.b, t)
        assert float(state.norm_error.max()) < 1e-12

    def test_norm_conservation_rk4(self):
        t = np.linspace(0.0, 20.0, 101)
        state = evolve_chain(self.b, t, method="rk4")
        assert float(state.norm_error.max()) < 1e-8

    def test_methods_agree(self):
        t = np.linspace(0.0, 15.0, 61)
        exact = evolve_chain(self.b, t)
        stepped = evolve_chain(self.b, t, method="rk4", rk4_dt=0.01)
        assert np.max(np.abs(exact.phi - stepped.phi)) < 1e-6

    def test_complexity_bounded_by_chain_length(self):
        t = np.linspace(0.0, 30.0, 61)
        state = evolve_chain(self.b, t)
        kt = krylov_complexity(state)
        assert np.all(kt >= -1e-12)
        assert np.all(kt <= self.b.size + 1e-9)

    def test_printed_sign_convention_does_not_conserve_norm(self):
        """Flipping the second hopping sign to d(phi_n)/dt =
        b_n phi_{n-1} + b_{n+1} phi_{n+1} makes the generator symmetric
        rather than antisymmetric; the weight then leaks immediately. This
        regression pins why the antisymmetric form is the implemented one."""
        b = self.b[:20]
        gen = np.diag(b, -1) + np.diag(b, 1)
        phi = np.zeros(21)
        phi[0] = 1.0
        dt = 1e-3
        for _ in range(2000):
            k1 = gen @ phi
            k2 = gen @ (phi + 0.5 * dt * k1)
            k3 = gen @ (phi + 0.5 * dt * k2)
            k4 = gen @ (phi + dt * k3)
            phi = phi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        assert abs(np.sum(phi**2) - 1.0) > 1e-2

    def test_schroedinger_gauge_equivalence(self):
        """Evolving i d(psi)/dt = T psi with the symmetric tridiagonal T and
        mapping phi_n = i^n psi_n reproduces the real-wave-equation solution."""
        b = self.b[:30]
        t = np.linspace(0.0, 10.0, 41)
        lam, vecs = eigh_tridiagonal(np.zeros(31), b)
        psi = (np.exp(-1j * np.outer(t, lam)) * vecs[0]) @ vecs.T
        phi_mapped = (psi * (1j) ** np.arange(31)).real
        state = evolve_chain(b, t)
        assert np.max(np.abs(state.phi - phi_mapped)) < 1e-8


class TestAgainstHeisenbergOracle:
    def test_two_level_autocorrelation(self):
        res = run_lanczos(SZ, SX)
        t = np.linspace(0.0, 10.0, 101)
        state = evolve_chain(res.b_raw, t)
        c = exact_autocorrelation(SZ, SX, t)
        assert np.max(np.abs(state.autocorrelation - c)) < 1e-10

    def test_random_system_autocorrelation(self):
        rng = np.random.default_rng(42)
        a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        h = a + a.conj().T
        c0 = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        o0 = c0 + c0.conj().T
        res = run_lanczos(h, o0)
        t = np.linspace(0.0, 10.0, 101)
        state = evolve_chain(res.b_raw, t)
        c = exact_autocorrelation(h, o0, t)
        assert np.max(np.abs(state.autocorrelation - c)) < 1e-6


class TestDegenerateInputs:
    def test_empty_b_freezes_origin(self):
        t = np.linspace(0.0, 4.0, 11)
        state = evolve_chain(np.zeros(0), t)
        assert np.allclose(state.phi[:, 0], 1.0)
        assert np.allclose(krylov_complexity(state), 0.0)

    def test_all_zero_b_freezes_origin(self):
        t = np.linspace(0.0, 4.0, 11)
        state = evolve_chain(np.zeros(3), t)
        assert np.allclose(state.phi[:, 0], 1.0)
        assert np.allclose(state.phi[:, 1:], 0.0)

    def test_accepts_bsequence(self):
        seq = synthetic_largeq_chain(1.0, 8)
        state = evolve_chain(seq, np.linspace(0.0, 2.0, 9))
        # b_1 = 0 decouples the origin, so the seed never spreads
        assert np.allclose(state.phi[:, 0], 1.0)


class TestValidation:
    def test_negative_b_rejected(self):
        with pytest.raises(ValueError):
            evolve_chain([1.0, -0.2], [0.0, 1.0])

    def test_bad_method(self):
        with pytest.raises(ValueError, match="method"):
            evolve_chain([1.0], [0.0, 1.0], method="euler")

    def test_empty_times(self):
        with pytest.raises(ValueError):
            evolve_chain([1.0], [])

    def test_rk4_needs_ascending_times(self):
        with pytest.raises(ValueError, match="ascending"):
            evolve_chain([1.0], [0.0, 2.0, 1.0], method="rk4")
        with pytest.raises(ValueError):
            evolve_chain([1.0], [-1.0, 0.0], method="rk4")

    def test_rk4_dt_must_be_positive(self):
        with pytest.raises(ValueError):
            evolve_chain([1.0], [0.0, 1.0], method="rk4", rk4_dt=0.0)
