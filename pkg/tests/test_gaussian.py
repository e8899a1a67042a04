"""State evolution, QFI and measurement-scheme tests.

The thermal-state QFI 1/(n(n+1)) and the coherent reduction 4 nbar |du|^2
anchor the Fisher-information conventions analytically; the mixed-state
cross-check against the Fock oracle lives in test_oracle.py.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resqfi.gaussian import (
    GaussianState,
    InitialStateSpec,
    MeasurementInsensitiveWarning,
    StateDerivative,
    default_wigner_axis,
    error_propagation,
    evolve_state,
    min_measurement_error,
    qfi_gaussian,
    qfi_markovian,
    qfi_markovian_large_n,
    state_derivative,
    wigner,
)


def random_u(rng, lo=0.1, hi=0.99):
    return rng.uniform(lo, hi) * np.exp(1j * rng.uniform(0, 2 * math.pi))


class TestInitialStateSpec:
    def test_photon_budget(self):
        spec = InitialStateSpec.from_photon_budget(100.0, 0.5, phase=0.3)
        assert spec.nbar == pytest.approx(100.0, rel=1e-12)
        assert spec.beta == pytest.approx(0.5, rel=1e-12)
        assert np.angle(spec.alpha) == pytest.approx(0.3)

    def test_pure_limits(self):
        assert InitialStateSpec.from_photon_budget(4.0, 0.0).r == 0.0
        assert abs(InitialStateSpec.from_photon_budget(4.0, 1.0).alpha) == 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            InitialStateSpec(alpha=1.0, r=-0.1)
        with pytest.raises(ValueError):
            InitialStateSpec.from_photon_budget(4.0, 1.5)


class TestEvolveState:
    def test_coherent_identity(self):
        spec = InitialStateSpec(alpha=1.5 + 0.5j, r=0.0)
        st_ = evolve_state(spec, 1.0)
        np.testing.assert_allclose(st_.d, [1.5 + 0.5j, 1.5 - 0.5j])
        np.testing.assert_allclose(st_.sigma, np.eye(2), atol=1e-15)

    def test_pure_state_det(self):
        spec = InitialStateSpec(alpha=0.7, r=1.3)
        st_ = evolve_state(spec, np.exp(0.4j))
        assert st_.purity_det == pytest.approx(1.0, abs=1e-12)

    def test_full_decay_is_vacuum(self):
        spec = InitialStateSpec(alpha=2.0, r=1.0)
        st_ = evolve_state(spec, 0.0)
        np.testing.assert_allclose(st_.d, 0.0)
        np.testing.assert_allclose(st_.sigma, np.eye(2))

    def test_u_precondition(self):
        spec = InitialStateSpec(alpha=1.0, r=0.0)
        with pytest.raises(ValueError):
            evolve_state(spec, 1.1)

    @given(
        st.floats(min_value=0.0, max_value=2.0),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=2 * math.pi),
    )
    @settings(max_examples=80, deadline=None)
    def test_det_identity(self, r, umod, uphase):
        # det sigma - 1 = 4 sinh^2 r |u|^2 (1 - |u|^2) >= 0
        spec = InitialStateSpec(alpha=0.4, r=r)
        u = umod * np.exp(1j * uphase)
        det = evolve_state(spec, u).purity_det
        expected = 1.0 + 4.0 * math.sinh(r) ** 2 * umod**2 * (1.0 - umod**2)
        assert det == pytest.approx(expected, rel=1e-9, abs=1e-9)
        assert det >= 1.0 - 1e-12


class TestQfiGaussian:
    def test_zero_derivative(self):
        spec = InitialStateSpec(alpha=1.0, r=0.5)
        st_ = evolve_state(spec, 0.6)
        zero = StateDerivative(d=np.zeros(2, complex), sigma=np.zeros((2, 2), complex))
        assert qfi_gaussian(st_, zero) == 0.0

    def test_thermal_state_known_value(self):
        # F for the mean-occupation parameter of a thermal state is 1/(n(n+1))
        for n in (0.3, 1.0, 4.0):
            state = GaussianState(
                d=np.zeros(2, complex), sigma=(1.0 + 2.0 * n) * np.eye(2, dtype=complex)
            )
            dstate = StateDerivative(d=np.zeros(2, complex), sigma=2.0 * np.eye(2, dtype=complex))
            assert qfi_gaussian(state, dstate) == pytest.approx(1.0 / (n * (n + 1.0)), rel=1e-10)

    def test_coherent_reduction(self, rng):
        for _ in range(100):
            spec = InitialStateSpec(
                alpha=rng.uniform(0.2, 3.0) * np.exp(1j * rng.uniform(0, 2 * math.pi)), r=0.0
            )
            u = random_u(rng)
            du = rng.normal() + 1j * rng.normal()
            f = qfi_gaussian(evolve_state(spec, u), state_derivative(spec, u, du))
            assert f == pytest.approx(4.0 * spec.nbar * abs(du) ** 2, rel=1e-8)

    def test_global_phase_invariance(self, rng):
        # rotating the whole family by a fixed phase (u, du -> e^{i chi} u, du)
        # is a theta-independent unitary and must leave F unchanged
        u = random_u(rng)
        du = 0.3 - 0.2j
        spec = InitialStateSpec(alpha=1.2, r=0.8)
        f0 = qfi_gaussian(evolve_state(spec, u), state_derivative(spec, u, du))
        for chi in (0.5, 1.7, 3.0):
            rot = np.exp(1j * chi)
            f = qfi_gaussian(
                evolve_state(spec, u * rot), state_derivative(spec, u * rot, du * rot)
            )
            assert f == pytest.approx(f0, rel=1e-10)

    def test_alpha_phase_invariance_coherent(self, rng):
        # without squeezing the state is isotropic, so rotating alpha alone
        # (with the induced derivative rotation) cannot change F
        u, du = random_u(rng), 0.4 + 0.1j
        f0 = None
        for chi in (0.0, 0.9, 2.2):
            spec = InitialStateSpec(alpha=1.7 * np.exp(1j * chi), r=0.0)
            f = qfi_gaussian(evolve_state(spec, u), state_derivative(spec, u, du))
            f0 = f if f0 is None else f0
            assert f == pytest.approx(f0, rel=1e-10)

    def test_additivity_beta0(self):
        u, du = 0.7 * np.exp(0.3j), 0.2 + 0.1j
        f1 = qfi_gaussian(
            evolve_state(InitialStateSpec(alpha=1.0, r=0.0), u),
            state_derivative(InitialStateSpec(alpha=1.0, r=0.0), u, du),
        )
        f2 = qfi_gaussian(
            evolve_state(InitialStateSpec(alpha=math.sqrt(2.0), r=0.0), u),
            state_derivative(InitialStateSpec(alpha=math.sqrt(2.0), r=0.0), u, du),
        )
        assert f2 == pytest.approx(2.0 * f1, rel=1e-10)

    def test_nonnegative_random(self, rng):
        for _ in range(50):
            spec = InitialStateSpec(alpha=rng.normal() + 1j * rng.normal(), r=rng.uniform(0, 1.5))
            u = random_u(rng)
            du = rng.normal() + 1j * rng.normal()
            f = qfi_gaussian(evolve_state(spec, u), state_derivative(spec, u, du))
            assert f >= -1e-9


class TestQfiMarkovian:
    def test_zero_at_t0(self):
        spec = InitialStateSpec.from_photon_budget(10.0, 0.4)
        assert qfi_markovian(spec, 0.5, 1.0, 0.0) == 0.0

    def test_vanishes_at_long_times(self):
        spec = InitialStateSpec.from_photon_budget(10.0, 0.4)
        # kappa*t = 400: far past the overflow point of naive e^{4 kt}
        val = qfi_markovian(spec, 1.0, 1.0, 400.0)
        assert 0.0 <= val < 1e-300

    def test_beta0_equals_coherent_formula(self):
        # at beta = 0 the closed form must equal 4 nbar (dk)^2 t^2 e^{-2kt}
        spec = InitialStateSpec.from_photon_budget(7.0, 0.0)
        for kt in (0.3, 1.0, 2.5):
            got = qfi_markovian(spec, 1.0, 0.8, kt)
            ref = 4.0 * 7.0 * 0.8**2 * kt**2 * math.exp(-2.0 * kt)
            assert got == pytest.approx(ref, rel=1e-12)

    def test_beta0_matches_coth_form_at_long_times(self):
        # the large-nbar leading form coincides once e^{-2kt} < 1e-10
        spec = InitialStateSpec.from_photon_budget(5.0, 0.0)
        t = 15.0
        got = qfi_markovian(spec, 1.0, 1.0, t)
        lead = qfi_markovian_large_n(5.0, 0.0, 1.0, 1.0, t)
        assert got == pytest.approx(lead, rel=1e-10)

    def test_large_n_limit(self):
        # fixed beta > 0, growing nbar: S16 approaches the leading form
        kappa, t = 0.7, 1.9
        lead = qfi_markovian_large_n(1.0, 0.4, kappa, 1.0, t)
        for nbar, tol in ((1e4, 2e-3), (1e6, 2e-5)):
            spec = InitialStateSpec.from_photon_budget(nbar, 0.4)
            ratio = qfi_markovian(spec, kappa, 1.0, t) / (nbar * lead)
            assert ratio == pytest.approx(1.0, rel=tol)


class TestWigner:
    def test_vacuum_normalization(self):
        state = evolve_state(InitialStateSpec(alpha=0.0, r=0.0), 0.0)
        ax = np.linspace(-6, 6, 161)
        w = wigner(state, ax, ax)
        dx = ax[1] - ax[0]
        assert w.sum() * dx * dx == pytest.approx(1.0, abs=1e-3)
        assert w.max() == pytest.approx(1.0 / (2.0 * math.pi * 0.5), rel=1e-12)

    def test_squeezed_axis_variances(self):
        # |u| = 1 keeps the state pure: quadrature variances e^{+-2r}/2
        r = 1.0
        spec = InitialStateSpec(alpha=0.0, r=r)
        state = evolve_state(spec, 1.0)
        ax = default_wigner_axis(spec)
        w = wigner(state, ax, ax)
        dx = ax[1] - ax[0]
        xx, pp = np.meshgrid(ax, ax)
        norm = w.sum() * dx * dx
        var_x = (w * xx**2).sum() * dx * dx / norm
        var_p = (w * pp**2).sum() * dx * dx / norm
        # the r > 0 squeeze shrinks X1 (since <a^2> < 0) and stretches X2
        assert var_x == pytest.approx(math.exp(-2 * r) / 2.0, rel=1e-3)
        assert var_p == pytest.approx(math.exp(2 * r) / 2.0, rel=1e-3)

    def test_decohered_isotropic(self):
        state = evolve_state(InitialStateSpec(alpha=0.0, r=1.0), 0.0)
        ax = np.linspace(-5, 5, 101)
        w = wigner(state, ax, ax)
        assert np.allclose(w, w.T, atol=1e-14)

    def test_positive(self):
        state = evolve_state(InitialStateSpec(alpha=1.0 + 1j, r=0.7), 0.5 * np.exp(0.2j))
        ax = np.linspace(-8, 8, 81)
        assert (wigner(state, ax, ax) > 0).all()


class TestErrorPropagation:
    def test_coherent_real_case(self):
        # r = 0, real alpha and real du: delta = 1/(2 alpha du)
        spec = InitialStateSpec(alpha=2.0, r=0.0)
        assert error_propagation(spec, 0.9, 0.25) == pytest.approx(1.0 / (2 * 2.0 * 0.25), rel=1e-12)

    def test_divergence_warning(self):
        spec = InitialStateSpec(alpha=1.0, r=0.0)
        with pytest.warns(MeasurementInsensitiveWarning):
            assert error_propagation(spec, 0.5, 0.0) == math.inf

    def test_markovian_error_grows(self):
        # u = e^{-(k+i w0)t} with phase pi/2 input: error diverges with t
        spec = InitialStateSpec(alpha=2.0 * 1j, r=0.0)
        kappa = 0.5
        vals = []
        for t in (2.0, 6.0, 12.0):
            u = np.exp(-(kappa + 1j) * t)
            du = -t * u  # d/d kappa
            vals.append(error_propagation(spec, u, du))
        assert vals[0] < vals[1] < vals[2]


class TestMinMeasurementError:
    def test_one_over_t_scaling(self):
        spec = InitialStateSpec(alpha=2.5 * 1j, r=1.0)
        a = min_measurement_error(spec, 0.8, -0.3, 10.0)
        b = min_measurement_error(spec, 0.8, -0.3, 20.0)
        assert a / b == pytest.approx(2.0, rel=1e-12)

    def test_squeezing_improves(self):
        vals = [
            min_measurement_error(InitialStateSpec(alpha=2.5 * 1j, r=r), 0.8, -0.3, 10.0)
            for r in (0.0, 0.5, 2.5)
        ]
        assert vals[0] > vals[1] > vals[2]

    def test_requires_displacement(self):
        with pytest.raises(ValueError):
            min_measurement_error(InitialStateSpec(alpha=0.0, r=1.0), 0.8, -0.3, 10.0)
