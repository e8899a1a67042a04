"""Brute-force oracle self-tests plus the Gaussian/Fock cross-formalism check."""

import math

import numpy as np
import pytest

from resqfi.gaussian import InitialStateSpec, evolve_state, qfi_gaussian, state_derivative
from resqfi.oracle import (
    FockStateMatrix,
    TruncationError,
    build_fock_state,
    default_fock_dim,
    qfi_fock_oracle,
    u_discrete,
)
from resqfi.propagator import solve_volterra
from resqfi.reservoir import DiscreteReservoir, OhmicSpectralDensity, discretize


def coherent_matrix(alpha: complex, dim: int) -> np.ndarray:
    k = np.arange(dim)
    log_fact = np.cumsum(np.concatenate([[0.0], np.log(np.arange(1, dim))]))
    amp = np.exp(-0.5 * abs(alpha) ** 2 + k * np.log(complex(alpha)) - 0.5 * log_fact)
    return np.outer(amp, amp.conj())


class TestUDiscrete:
    def test_t0_is_one(self):
        disc = DiscreteReservoir(omega=np.array([0.5, 1.5]), g=np.array([0.1, 0.2]))
        assert u_discrete(disc, 1.0, 0.0) == pytest.approx(1.0, abs=1e-14)

    def test_single_mode_rabi(self):
        # N = 1 reduces to the 2x2 problem with the textbook Rabi solution
        w0, w1, g = 1.0, 1.3, 0.21
        disc = DiscreteReservoir(omega=np.array([w1]), g=np.array([g]))
        rabi = math.sqrt((w0 - w1) ** 2 + 4 * g * g)
        for t in (0.7, 3.1, 9.4):
            expected = np.exp(-1j * (w0 + w1) * t / 2) * (
                math.cos(rabi * t / 2) + 1j * (w1 - w0) / rabi * math.sin(rabi * t / 2)
            )
            assert u_discrete(disc, w0, t) == pytest.approx(expected, abs=1e-12)

    def test_convergence_in_n(self, sd_ohmic_bound):
        traj = solve_volterra(sd_ohmic_bound, 1.0, 20.0, 0.004)
        ts = traj.t[::250]
        ref = traj.u[::250]
        errs = []
        for n in (250, 500, 1000, 2000):
            disc = discretize(sd_ohmic_bound, n, 20.0 * sd_ohmic_bound.omega_c)
            errs.append(np.abs(u_discrete(disc, 1.0, ts) - ref).max())
        assert all(a > b * 0.9 for a, b in zip(errs, errs[1:]))  # monotone within noise
        assert errs[-1] < 5e-3


class TestBuildFockState:
    def test_vacuum(self):
        state = evolve_state(InitialStateSpec(alpha=0.0, r=0.0), 0.0)
        rho = build_fock_state(state, 12).rho
        expected = np.zeros((12, 12))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(rho, expected, atol=1e-14)

    def test_squeezed_vacuum_moment(self):
        # <a^2> = -sinh(r) cosh(r) for the r = 1 squeezed vacuum
        state = evolve_state(InitialStateSpec(alpha=0.0, r=1.0), 1.0)
        fock = build_fock_state(state, 90)
        a = np.diag(np.sqrt(np.arange(1, 90)), 1)
        a2 = np.trace(fock.rho @ a @ a)
        assert a2.real == pytest.approx(-math.sinh(1.0) * math.cosh(1.0), rel=1e-8)
        assert abs(a2.imag) < 1e-10

    def test_coherent_state_matrix(self):
        alpha = 0.9 - 0.4j
        state = evolve_state(InitialStateSpec(alpha=alpha, r=0.0), 1.0)
        rho = build_fock_state(state, 40).rho
        np.testing.assert_allclose(rho, coherent_matrix(alpha, 40), atol=1e-10)

    def test_moment_roundtrip_random(self, rng):
        for _ in range(8):
            spec = InitialStateSpec(
                alpha=rng.normal(scale=0.8) + 1j * rng.normal(scale=0.8),
                r=rng.uniform(0.0, 1.0),
            )
            u = rng.uniform(0.2, 0.99) * np.exp(1j * rng.uniform(0, 2 * math.pi))
            state = evolve_state(spec, u)
            dim = default_fock_dim(spec.nbar) + 20
            fock = build_fock_state(state, dim)
            a = np.diag(np.sqrt(np.arange(1, dim)), 1)
            n_op = a.conj().T @ a
            got = np.trace(fock.rho @ n_op).real
            expected = (state.sigma[0, 0].real - 1.0) / 2.0 + abs(state.d[0]) ** 2
            assert got == pytest.approx(expected, abs=1e-6)

    def test_truncation_error(self):
        state = evolve_state(InitialStateSpec(alpha=3.0, r=1.0), 1.0)
        with pytest.raises(TruncationError):
            build_fock_state(state, 12)

    def test_matrix_validation(self):
        bad = np.diag([0.7, 0.4])  # trace 1.1
        with pytest.raises(ValueError):
            FockStateMatrix(rho=bad)


class TestQfiFockOracle:
    def test_zero_derivative(self):
        state = evolve_state(InitialStateSpec(alpha=1.0, r=0.3), 0.7)
        fock = build_fock_state(state, 50)
        assert qfi_fock_oracle(fock, fock, 1e-4) == 0.0

    def test_coherent_displacement_family(self):
        # rho(theta) = |theta alpha0>, QFI = 4 |alpha0|^2 at theta = 1
        alpha0 = 1.2
        eps = 1e-4
        rp = FockStateMatrix(rho=coherent_matrix((1 + eps) * alpha0, 50))
        rm = FockStateMatrix(rho=coherent_matrix((1 - eps) * alpha0, 50))
        got = qfi_fock_oracle(rp, rm, eps * alpha0)
        assert got == pytest.approx(4.0, rel=1e-3)  # 4 |alpha0|^2 / alpha0^2 scaling
        got_theta = qfi_fock_oracle(rp, rm, eps)
        assert got_theta == pytest.approx(4.0 * alpha0**2, rel=1e-3)

    def test_gaussian_formula_agreement_mixed(self, rng):
        # the cross-formalism anchor: mixed evolved states, nbar <= 4
        for _ in range(3):
            spec = InitialStateSpec(
                alpha=rng.uniform(0.5, 1.4) * np.exp(1j * rng.uniform(0, 2 * math.pi)),
                r=rng.uniform(0.3, 1.1),
            )
            u = rng.uniform(0.4, 0.9) * np.exp(1j * rng.uniform(0, 2 * math.pi))
            f_gauss = qfi_gaussian(evolve_state(spec, u), state_derivative(spec, u, u))
            eps = 1e-4
            dim = 70
            rp = build_fock_state(evolve_state(spec, (1 + eps) * u), dim)
            rm = build_fock_state(evolve_state(spec, (1 - eps) * u), dim)
            f_fock = qfi_fock_oracle(rp, rm, eps)
            assert f_gauss == pytest.approx(f_fock, rel=1e-2)

    def test_symmetric_under_relabeling(self):
        spec = InitialStateSpec(alpha=1.0, r=0.5)
        eps = 1e-4
        rp = build_fock_state(evolve_state(spec, 0.8 * (1 + eps)), 60)
        rm = build_fock_state(evolve_state(spec, 0.8 * (1 - eps)), 60)
        a = qfi_fock_oracle(rp, rm, eps)
        b = qfi_fock_oracle(rm, rp, eps)  # sign flip of drho leaves |drho|^2 alone
        assert a == pytest.approx(b, rel=1e-12)
