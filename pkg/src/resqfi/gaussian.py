"""Gaussian sensor states: evolution, quantum Fisher information, Wigner
function, and the homodyne-style error-propagation measurement scheme.

States live in the complex (a, a^dag) representation: displacement vector
d_i = <A_i> and covariance sigma_ij = <{Delta A_i, Delta A_j^dag}> with
A = (a, a^dag)^T.  Everything is pure over immutable inputs.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "InitialStateSpec",
    "GaussianState",
    "StateDerivative",
    "IllConditionedError",
    "MeasurementInsensitiveWarning",
    "evolve_state",
    "state_derivative",
    "qfi_gaussian",
    "qfi_markovian",
    "qfi_markovian_large_n",
    "wigner",
    "default_wigner_axis",
    "error_propagation",
    "min_measurement_error",
]

_K = np.diag([1.0, -1.0])
_KK = np.kron(_K, _K)
_PINV_CUT = 1e-10
_PURE_LEAK = 1e-6


class IllConditionedError(RuntimeError):
    """The derivative has weight in a direction the pseudo-inverse discards."""


class MeasurementInsensitiveWarning(UserWarning):
    """The measured observable does not respond to the parameter here."""


@dataclass(frozen=True)
class InitialStateSpec:
    """Coherent-squeezed input state D(alpha) S(r) |0>.

    ``nbar`` = |alpha|^2 + sinh^2 r is the photon budget and ``beta`` the
    share of it carried by squeezing (0 = coherent, 1 = squeezed vacuum).
    """

    alpha: complex
    r: float

    def __post_init__(self) -> None:
        a = complex(self.alpha)
        r = float(self.r)
        if not (math.isfinite(a.real) and math.isfinite(a.imag) and math.isfinite(r)):
            raise ValueError("alpha and r must be finite")
        if r < 0:
            raise ValueError(f"squeezing magnitude r must be >= 0, got {r!r}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "r", r)

    @property
    def nbar(self) -> float:
        return abs(self.alpha) ** 2 + math.sinh(self.r) ** 2

    @property
    def beta(self) -> float:
        n = self.nbar
        return math.sinh(self.r) ** 2 / n if n > 0 else 0.0

    @classmethod
    def from_photon_budget(cls, nbar: float, beta: float, phase: float = 0.0) -> "InitialStateSpec":
        """Build from (nbar, beta) with alpha = sqrt((1-beta) nbar) e^{i phase}."""
        if nbar < 0 or not 0.0 <= beta <= 1.0:
            raise ValueError("need nbar >= 0 and beta in [0, 1]")
        r = math.asinh(math.sqrt(beta * nbar))
        amp = math.sqrt((1.0 - beta) * nbar)
        return cls(alpha=amp * cmath.exp(1j * phase), r=r)


@dataclass(frozen=True)
class GaussianState:
    """Displacement 2-vector and 2x2 covariance of the sensor mode."""

    d: np.ndarray
    sigma: np.ndarray

    def __post_init__(self) -> None:
        d = np.asarray(self.d, dtype=complex).reshape(2)
        sig = np.asarray(self.sigma, dtype=complex).reshape(2, 2)
        if abs(d[1] - np.conj(d[0])) > 1e-9 * max(1.0, abs(d[0])):
            raise ValueError("displacement must satisfy d2 = conj(d1)")
        if abs(sig[0, 0] - sig[1, 1]) > 1e-9 or abs(sig[0, 0].imag) > 1e-9:
            raise ValueError("covariance diagonal must be real and equal")
        if abs(sig[1, 0] - np.conj(sig[0, 1])) > 1e-9:
            raise ValueError("covariance must be Hermitian")
        if sig[0, 0].real < 1.0 - 1e-9 or self._det(sig) < 1.0 - 1e-7:
            raise ValueError("covariance below the vacuum floor")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "sigma", sig)

    @staticmethod
    def _det(sig: np.ndarray) -> float:
        return float((sig[0, 0] * sig[1, 1] - sig[0, 1] * sig[1, 0]).real)

    @property
    def purity_det(self) -> float:
        """det(sigma); equals 1 iff the state is pure."""
        return self._det(self.sigma)


@dataclass(frozen=True)
class StateDerivative:
    """Parameter derivative of a Gaussian state (not itself a valid state)."""

    d: np.ndarray
    sigma: np.ndarray


def evolve_state(spec: InitialStateSpec, u: complex) -> GaussianState:
    """State after the dissipative encoding reduced the propagator to ``u``.

    d = (alpha u, alpha* u*); the diagonal of sigma is 1 + 2|u|^2 sinh^2 r and
    the off-diagonal -u^2 sinh(2r).
    """
    u = complex(u)
    if abs(u) > 1.0 + 1e-6:
        raise ValueError(f"|u| = {abs(u):.8f} exceeds 1 + 1e-6")
    sr2 = math.sinh(spec.r) ** 2
    s2r = math.sinh(2.0 * spec.r)
    diag = 1.0 + 2.0 * abs(u) ** 2 * sr2
    off = -(u * u) * s2r
    d = np.array([spec.alpha * u, np.conj(spec.alpha * u)])
    sigma = np.array([[diag, off], [np.conj(off), diag]])
    return GaussianState(d=d, sigma=sigma)


def state_derivative(spec: InitialStateSpec, u: complex, du: complex) -> StateDerivative:
    """Chain rule of evolve_state through (u, du/dtheta)."""
    u = complex(u)
    du = complex(du)
    sr2 = math.sinh(spec.r) ** 2
    s2r = math.sinh(2.0 * spec.r)
    dabs2 = 2.0 * (np.conj(u) * du).real
    ddiag = 2.0 * sr2 * dabs2
    doff = -2.0 * u * du * s2r
    d = np.array([spec.alpha * du, np.conj(spec.alpha * du)])
    sigma = np.array([[ddiag, doff], [np.conj(doff), ddiag]])
    return StateDerivative(d=d, sigma=sigma)


def qfi_gaussian(state: GaussianState, dstate: StateDerivative) -> float:
    """Quantum Fisher information of a single-mode Gaussian family.

    F = 1/2 vec(d_sigma)^dag M^+ vec(d_sigma) + 2 (d_d)^dag sigma^(-1) d_d
    with M = conj(sigma) (x) sigma - K (x) K, K = diag(1, -1), and M^+ the
    pseudo-inverse with relative eigenvalue cutoff 1e-10.  M is singular for
    pure states; if the discarded directions carry more than 1e-6 of the
    derivative's weight the result would be wrong and an error is raised.
    """
    sigma = state.sigma
    m = np.kron(sigma.conj(), sigma) - _KK
    vec = dstate.sigma.flatten(order="F")
    w, q = np.linalg.eigh(m)
    keep = np.abs(w) > _PINV_CUT * np.abs(w).max()
    coeff = q.conj().T @ vec
    dropped = float(np.linalg.norm(coeff[~keep]))
    total = float(np.linalg.norm(vec))
    # ignore rounding-level weight: a pure-state family puts exactly zero
    # derivative in the singular directions, numerics leave ~eps residue
    noise_floor = 1e3 * np.finfo(float).eps * (float(np.linalg.norm(sigma)) + total)
    if dropped > max(_PURE_LEAK * total, noise_floor):
        raise IllConditionedError(
            f"derivative has {dropped / max(total, 1e-300):.2e} of its weight "
            f"in the singular subspace"
        )
    term1 = 0.5 * float(np.sum(np.abs(coeff[keep]) ** 2 / w[keep]))
    dd = dstate.d
    term2 = 2.0 * float((dd.conj() @ np.linalg.solve(sigma, dd)).real)
    return term1 + term2


def qfi_markovian(spec: InitialStateSpec, kappa: float, dkappa: float, t: float) -> float:
    """Closed-form QFI under the Markovian approximation u = e^{-(kappa+i w0)t}.

    Written in terms of x = e^{-2 kappa t}, which keeps every term bounded for
    arbitrarily large kappa*t (the overflow guard demanded for kappa*t > 300).
    """
    kappa = float(kappa)
    t = float(t)
    if kappa <= 0:
        raise ValueError("kappa must be > 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0
    n = spec.nbar
    b = spec.beta
    nb = n * b
    x = math.exp(-2.0 * kappa * t)
    coth_m1 = 2.0 * x / (1.0 - x)  # coth(kt) - 1
    term1 = b * coth_m1
    term2 = -4.0 * b * (nb + 1.0) * x * x / (1.0 + 2.0 * nb * x * (1.0 - x))
    root = math.sqrt(nb * (nb + 1.0))
    term3 = 2.0 * (1.0 - b) * (x + (2.0 * nb + 2.0 * root) * x * x) / (1.0 + 4.0 * nb * x * (1.0 - x))
    return 2.0 * n * dkappa**2 * t * t * (term1 + term2 + term3)


def qfi_markovian_large_n(
    nbar: float, beta: float, kappa: float, dkappa: float, t: float
) -> float:
    """Leading large-nbar Markovian QFI, 2 (1-beta) (dkappa)^2 [coth(kt)-1] nbar t^2."""
    if t <= 0.0:
        return 0.0
    x = math.exp(-2.0 * kappa * t)
    return 2.0 * (1.0 - beta) * dkappa**2 * nbar * t * t * (2.0 * x / (1.0 - x))


def _quadrature_mean_cov(state: GaussianState):
    # map (d, sigma) to quadrature mean and covariance C of X1, X2
    s11 = state.sigma[0, 0].real
    s12 = state.sigma[0, 1]
    mean = np.array([math.sqrt(2.0) * state.d[0].real, math.sqrt(2.0) * state.d[0].imag])
    cov = 0.5 * np.array(
        [[s11 + s12.real, s12.imag], [s12.imag, s11 - s12.real]]
    )
    return mean, cov


def default_wigner_axis(spec: InitialStateSpec, n_points: int = 161) -> np.ndarray:
    """Symmetric quadrature axis wide enough for the squeezed ellipse."""
    half = (abs(spec.alpha) + 4.0) * max(1.0, math.exp(spec.r))
    return np.linspace(-half, half, n_points)


def wigner(state: GaussianState, x_axis: np.ndarray, p_axis: np.ndarray) -> np.ndarray:
    """Wigner density on a quadrature grid, normalized so sum W dx dp = 1.

    W(X) = exp[-1/2 (X - Xbar)^T C^(-1) (X - Xbar)] / (2 pi sqrt(det C)),
    returned with shape (len(p_axis), len(x_axis)).
    """
    mean, cov = _quadrature_mean_cov(state)
    det = float(np.linalg.det(cov))
    if det <= 0:
        raise ValueError("singular quadrature covariance")
    cinv = np.linalg.inv(cov)
    xx, pp = np.meshgrid(np.asarray(x_axis, float), np.asarray(p_axis, float))
    dx = xx - mean[0]
    dp = pp - mean[1]
    quad_form = cinv[0, 0] * dx * dx + 2.0 * cinv[0, 1] * dx * dp + cinv[1, 1] * dp * dp
    return np.exp(-0.5 * quad_form) / (2.0 * math.pi * math.sqrt(det))


def error_propagation(spec: InitialStateSpec, u: complex, du: complex) -> float:
    """Estimation error of theta when measuring O = a + a^dag.

    delta_theta = sqrt(2|u|^2 sinh^2 r + 1 - sinh(2r) Re[u^2])
                  / |alpha du + alpha* du*|

    Returns +inf (with a warning) when the sensitivity denominator vanishes,
    which is the expected long-time behavior without a bound state.
    """
    u = complex(u)
    du = complex(du)
    var = 2.0 * abs(u) ** 2 * math.sinh(spec.r) ** 2 + 1.0 - math.sinh(2.0 * spec.r) * (u * u).real
    denom = abs(spec.alpha * du + np.conj(spec.alpha) * np.conj(du))
    if denom < 1e-12:
        warnings.warn(
            "measurement insensitive to the parameter at this time",
            MeasurementInsensitiveWarning,
            stacklevel=2,
        )
        return math.inf
    return math.sqrt(max(var, 0.0)) / denom


def min_measurement_error(spec: InitialStateSpec, weight: float, dEb: float, t: float) -> float:
    """Envelope of the error-propagation minima in the bound-state regime.

    At phase = pi/2 and E_b t = n pi the optimum is
    sqrt(1 + 2 Z^2 sinh^2 r - Z^2 sinh 2r) / (2 Z |alpha dEb| t).
    """
    if abs(spec.alpha) == 0:
        raise ValueError("min_measurement_error requires |alpha| > 0")
    if t <= 0:
        raise ValueError("t must be > 0")
    z = float(weight)
    num = math.sqrt(1.0 + 2.0 * z * z * math.sinh(spec.r) ** 2 - z * z * math.sinh(2.0 * spec.r))
    return num / (2.0 * z * abs(spec.alpha) * abs(dEb) * t)
