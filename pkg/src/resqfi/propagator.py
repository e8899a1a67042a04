"""Sensor propagator u(t) by three independent routes.

* time domain: Volterra integro-differential solve (product-trapezoidal
  history, Heun predictor-corrector, free phase rotated out),
* spectral: isolated bound-state pole plus branch-cut (band) integral,
* Markovian: constant-rate exponential.

Plus the band-gapped photonic-crystal closed form.  Distinct solves are
independent and safe to run concurrently; returned trajectories are frozen.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .reservoir import (
    OhmicSpectralDensity,
    PhotonicCrystalReservoir,
    bound_state_criterion,
    evaluate_j,
    level_shift,
    memory_kernel,
    self_energy,
)
from .specfun import gamma

__all__ = [
    "PropagatorTrajectory",
    "BoundState",
    "DivergenceError",
    "QuadratureBudgetError",
    "TrajectoryUnderflowWarning",
    "DegenerateRootWarning",
    "default_dt",
    "solve_volterra",
    "rates",
    "find_bound_state",
    "u_spectral",
    "u_markovian",
    "pc_characteristic_roots",
    "u_photonic_crystal",
]

_UNDERFLOW = 1e-12
_DIVERGENCE_TOL = 1e-3


class DivergenceError(RuntimeError):
    """The time-domain solution left the physical |u| <= 1 ball."""


class QuadratureBudgetError(RuntimeError):
    """The band integral could not meet its accuracy target within budget."""


class TrajectoryUnderflowWarning(UserWarning):
    """|u| fell below the threshold where rates are meaningful."""


class DegenerateRootWarning(UserWarning):
    """Two characteristic roots coincide; pole weights are ill-conditioned."""


@dataclass(frozen=True)
class PropagatorTrajectory:
    """Uniform time grid with u(t), decay rate Gamma(t) and frequency Omega(t)."""

    t: np.ndarray
    u: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        u = np.asarray(self.u, dtype=complex)
        if t.ndim != 1 or t.shape != u.shape or t.size < 2:
            raise ValueError("t and u must be matching 1-d arrays with >= 2 points")
        if abs(u[0] - 1.0) > 1e-12:
            raise ValueError("trajectory must start from u(0) = 1")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "u", u)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


@dataclass(frozen=True)
class BoundState:
    """Isolated eigenenergy below the band and its residue weight."""

    energy: float
    weight: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.energy) and self.energy < 0):
            raise ValueError(f"bound-state energy must be < 0, got {self.energy!r}")
        if not (0.0 < self.weight < 1.0):
            raise ValueError(f"residue weight must lie in (0, 1), got {self.weight!r}")


def default_dt(sd: OhmicSpectralDensity, omega0: float) -> float:
    """Default step: resolves both the sensor phase and the kernel width."""
    return min(0.01 / omega0, 0.1 / sd.omega_c)


def _product_weights(sd: OhmicSpectralDensity, omega0: float, n: int, dt: float):
    # A_m, B_m: exact moments of nu(x) e^{i w0 x} against the linear hat
    # functions on [(m-1) dt, m dt], via 8-point Gauss-Legendre per interval.
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    x_lo = np.arange(n, dtype=float)[:, None] * dt
    xs = x_lo + dt * (gl_x[None, :] + 1.0) / 2.0
    ker = memory_kernel(sd, xs) * np.exp(1j * omega0 * xs)
    wq = dt / 2.0 * gl_w[None, :]
    a = (ker * (xs - x_lo) * wq).sum(axis=1) / dt
    b = (ker * ((x_lo + dt) - xs) * wq).sum(axis=1) / dt
    return a, b


def solve_volterra(
    sd: OhmicSpectralDensity,
    omega0: float,
    t_max: float,
    dt: float | None = None,
) -> PropagatorTrajectory:
    """Solve du/dt + i w0 u + int_0^t nu(t - tau) u(tau) dtau = 0, u(0) = 1.

    The free phase is rotated out (v = u e^{i w0 t}) so the integrator only
    tracks reservoir-induced dynamics; eta -> 0 then yields u = e^{-i w0 t}
    exactly.  The memory integral uses product-trapezoidal weights (kernel
    integrated exactly against piecewise-linear v), advanced by a Heun
    predictor-corrector.  Cost is O(N^2) in the number of steps.
    """
    omega0 = float(omega0)
    t_max = float(t_max)
    if t_max <= 0:
        raise ValueError("t_max must be > 0")
    if dt is None:
        dt = default_dt(sd, omega0)
    dt = float(dt)
    limit = min(0.1 / omega0, 0.1 / sd.omega_c)
    if dt <= 0 or dt > limit * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt!r} rejected; need 0 < dt <= {limit:.4g} for these parameters")

    n = int(round(t_max / dt))
    t = np.arange(n + 1) * dt
    a, b = _product_weights(sd, omega0, n, dt)
    c = np.empty(n + 1, dtype=complex)
    if n > 1:
        c[1:n] = a[0 : n - 1] + b[1:n]
    v = np.ones(n + 1, dtype=complex)
    b1 = b[0]
    for k in range(n):
        if k == 0:
            mem_k = 0.0 + 0.0j
        else:
            mem_k = a[k - 1] * v[0] + b1 * v[k]
            if k > 1:
                mem_k += np.dot(c[1:k], v[k - 1 : 0 : -1])
        f_k = -mem_k
        v_pred = v[k] + dt * f_k
        hist = a[k] * v[0]
        if k >= 1:
            hist += np.dot(c[1 : k + 1], v[k:0:-1])
        f_next = -(hist + b1 * v_pred)
        v[k + 1] = v[k] + 0.5 * dt * (f_k + f_next)

    peak = float(np.abs(v).max())
    if peak > 1.0 + _DIVERGENCE_TOL:
        raise DivergenceError(f"|u| reached {peak:.6f} > 1 + {_DIVERGENCE_TOL}")
    u = v * np.exp(-1j * omega0 * t)
    gam, om = _rates_arrays(t, u)
    return PropagatorTrajectory(t=t, u=u, gamma=gam, omega=om)


def _rates_arrays(t: np.ndarray, u: np.ndarray):
    du = np.gradient(u, t, edge_order=2)
    small = np.abs(u) < _UNDERFLOW
    if small.any():
        first = int(np.argmax(small))
        warnings.warn(
            f"|u| fell below {_UNDERFLOW} at t = {t[first]:.4g}; rates NaN from there",
            TrajectoryUnderflowWarning,
            stacklevel=3,
        )
        ratio = np.full_like(u, np.nan)
        ratio[:first] = du[:first] / u[:first]
    else:
        ratio = du / u
    return -ratio.real, -ratio.imag


def rates(traj: PropagatorTrajectory):
    """Gamma(t) = -Re[du/dt / u], Omega(t) = -Im[du/dt / u].

    Centered differences inside the grid, one-sided at the ends.  Points past
    an |u| underflow are NaN (with a TrajectoryUnderflowWarning).
    """
    return _rates_arrays(traj.t, traj.u)


def find_bound_state(sd: OhmicSpectralDensity, omega0: float) -> BoundState | None:
    """Isolated root of y(E) = E below the band, or None when absent.

    y(E) = omega0 - I(E) is strictly decreasing for E < 0, so y(E) - E has at
    most one root; existence is equivalent to y(0) <= 0.  Bisection runs until
    the residual |y(E) - E| drops below 1e-12, and the residue weight
    Z = [1 + int J(w)/(w - E_b)^2 dw]^(-1) is evaluated by quadrature.
    """
    omega0 = float(omega0)
    if not bound_state_criterion(sd, omega0):
        return None

    def g(e: float) -> float:
        return omega0 - self_energy(sd, e) - e

    hi = -1e-300
    lo = -max(omega0, sd.omega_c)
    while g(lo) <= 0.0:
        lo *= 2.0
        if lo < -1e12:
            raise ArithmeticError("failed to bracket the bound-state root")
    mid = 0.5 * (lo + hi)
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val) <= 1e-12:
            break
        if val > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= abs(mid) * 1e-17:
            break
    else:
        raise ArithmeticError("bound-state bisection did not converge")
    e_b = mid
    kk, _ = quad(lambda w: evaluate_j(sd, w) / (w - e_b) ** 2, 0.0, np.inf, limit=400)
    return BoundState(energy=e_b, weight=1.0 / (1.0 + kk))


# --- spectral reconstruction -------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_PANEL_BUDGET = 400_000


class _BandStructure:
    """Cached smooth data for the branch-cut integral of one (sd, omega0) pair."""

    def __init__(self, sd: OhmicSpectralDensity, omega0: float):
        self.sd = sd
        self.omega0 = omega0
        self.cutoff = self._choose_cutoff()
        grid = np.linspace(0.0, math.sqrt(self.cutoff), 800) ** 2
        shifts = np.array([level_shift(sd, e) for e in grid])
        self._shift = CubicSpline(grid, shifts)
        self.edges = self._structural_edges(grid, shifts)

    def _choose_cutoff(self) -> float:
        sd, w0 = self.sd, self.omega0
        dmax = sd.eta * sd.omega_c * gamma(sd.s)
        from scipy.special import gammaincc

        for mult in (8.0, 10.0, 12.0, 16.0, 20.0, 25.0, 30.0):
            lam = max(mult * sd.omega_c, 2.0 * (w0 + dmax) + 5.0)
            tail_weight = sd.total_weight * float(gammaincc(sd.s + 1.0, lam / sd.omega_c))
            denom = (lam - w0 - dmax) ** 2
            if tail_weight / denom < 1e-6:
                return lam
        return max(30.0 * sd.omega_c, 2.0 * (w0 + dmax) + 5.0)

    def _structural_edges(self, grid: np.ndarray, shifts: np.ndarray) -> np.ndarray:
        base = np.arange(0.0, self.cutoff, self.sd.omega_c / 64.0)
        edges = [base, np.array([self.cutoff])]
        # refine around a band resonance E = w0 + Delta(E), if one exists
        dvals = grid - self.omega0 - shifts
        sign_flip = np.nonzero(np.diff(np.sign(dvals)) != 0)[0]
        for idx in sign_flip:
            e_star = brentq(
                lambda e: e - self.omega0 - float(self._shift(e)), grid[idx], grid[idx + 1]
            )
            width = max(math.pi * evaluate_j(self.sd, e_star), 1e-5 * self.cutoff)
            lo = max(0.0, e_star - 8.0 * width)
            hi = min(self.cutoff, e_star + 8.0 * width)
            edges.append(np.arange(lo, hi, width / 6.0))
        out = np.unique(np.concatenate(edges))
        return out[(out >= 0.0) & (out <= self.cutoff)]

    def density(self, e: np.ndarray) -> np.ndarray:
        j = evaluate_j(self.sd, e)
        d = e - self.omega0 - self._shift(e)
        return j / (d * d + (math.pi * j) ** 2)

    def integral(self, t: float) -> complex:
        """int_0^cutoff density(E) e^{-i E t} dE with oscillation-aware panels."""
        width_cap = math.pi / (4.0 * t) if t > 0 else math.inf
        widths = np.diff(self.edges)
        splits = np.maximum(1, np.ceil(widths / width_cap).astype(int))
        n_panels = int(splits.sum())
        if n_panels > _PANEL_BUDGET:
            raise QuadratureBudgetError(
                f"band integral needs {n_panels} panels at t = {t:.4g} (budget {_PANEL_BUDGET})"
            )
        lo = np.repeat(self.edges[:-1], splits)
        step = np.repeat(widths / splits, splits)
        offs = np.concatenate([np.arange(k) for k in splits]) * step
        a = lo + offs
        half = step / 2.0
        mid = a + half
        nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
        weights = half[:, None] * _GL_W[None, :]
        vals = self.density(nodes.ravel()).reshape(nodes.shape) * np.exp(-1j * nodes * t)
        return complex((vals * weights).sum())


@functools.lru_cache(maxsize=16)
def _band_structure(sd: OhmicSpectralDensity, omega0: float) -> _BandStructure:
    return _BandStructure(sd, omega0)


def u_spectral(
    sd: OhmicSpectralDensity,
    omega0: float,
    bound: BoundState | None,
    t,
):
    """u(t) reconstructed from the energy spectrum.

    Z e^{-i E_b t} (when a bound state is present) plus the band integral

        int_0^inf J(E) e^{-i E t} / {[E - w0 - Delta(E)]^2 + [pi J(E)]^2} dE,

    evaluated by panel quadrature with panel width capped at pi/(4t) and an
    upper cutoff whose analytic tail bound is below 1e-6.  Accepts scalar or
    array ``t``; absolute accuracy target 1e-4.
    """
    band = _band_structure(sd, float(omega0))
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("u_spectral requires t >= 0")
    out = np.empty(ts.shape, dtype=complex)
    for i, ti in enumerate(ts):
        val = band.integral(float(ti))
        if bound is not None:
            val += bound.weight * np.exp(-1j * bound.energy * ti)
        out[i] = val
    if np.isscalar(t) or np.ndim(t) == 0:
        return complex(out[0])
    return out


def u_markovian(
    sd: OhmicSpectralDensity,
    omega0: float,
    t,
    include_shift: bool = False,
):
    """Markovian limit u(t) = e^{-[kappa + i(w0 + Delta)] t} with kappa = pi J(w0)."""
    kappa = math.pi * evaluate_j(sd, omega0)
    freq = float(omega0)
    if include_shift:
        freq += level_shift(sd, omega0)
    ts = np.asarray(t, dtype=float)
    val = np.exp(-(kappa + 1j * freq) * ts)
    if np.isscalar(t) or np.ndim(t) == 0:
        return complex(val)
    return val


# --- photonic crystal --------------------------------------------------------


def pc_characteristic_roots(epsilon: float, delta: float) -> np.ndarray:
    """Roots of eps^(3/2) x^3 + i delta sqrt(eps) x - (i eps)^(3/2) = 0.

    Solved as companion-matrix eigenvalues (np.roots), each verified by
    back-substitution to 1e-10 * eps^(3/2).
    """
    epsilon = float(epsilon)
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise ValueError("epsilon must be > 0")
    scale = epsilon**1.5
    coeffs = np.array([scale, 0.0, 1j * float(delta) * math.sqrt(epsilon), -((1j * epsilon) ** 1.5)])
    roots = np.roots(coeffs)
    resid = np.abs(np.polyval(coeffs, roots))
    if resid.max() > 1e-10 * scale:
        raise ArithmeticError(f"characteristic-root residual {resid.max():.3e} too large")
    gaps = [abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3)]
    if min(gaps) < 1e-8 * max(1.0, float(np.abs(roots).max())):
        warnings.warn("near-degenerate characteristic roots", DegenerateRootWarning, stacklevel=2)
    return roots


def _principal_sqrt_sign(x: complex) -> float:
    # sign s with sqrt(x^2) = s * x for the principal branch
    if x.real > 0 or (x.real == 0 and x.imag >= 0):
        return 1.0
    return -1.0


def u_photonic_crystal(pc: PhotonicCrystalReservoir, omega0: float, t):
    """Closed-form u(t) for the band-gapped reservoir.

    u(t) = e^{-i w0 t} sum_l p_l e^{(i delta + eps x_l^2) t}
           [x_l + sqrt(x_l^2) Erf(sqrt(eps x_l^2 t))]

    with p_l = x_l / prod_{j != l}(x_l - x_j).  sqrt(x_l^2) is the principal
    branch, written as s_l x_l with s_l = +-1; the bracket is evaluated via
    erfcx so the s_l = -1 growth cancellation is exact in floating point.
    u(0) = 1 follows from sum_l p_l x_l = 1 and is asserted to 1e-6.
    """
    omega0 = float(omega0)
    eps = pc.energy_scale(omega0)
    delta = pc.detuning(omega0)
    roots = pc_characteristic_roots(eps, delta)
    p = np.array(
        [
            roots[l] / ((roots[l] - roots[(l + 1) % 3]) * (roots[l] - roots[(l + 2) % 3]))
            for l in range(3)
        ]
    )
    norm = complex((p * roots).sum())
    if abs(norm - 1.0) > 1e-6:
        raise ArithmeticError(f"pole weights violate u(0) = 1: sum p_l x_l = {norm:.8f}")

    from scipy.special import erfcx

    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("u_photonic_crystal requires t >= 0")
    u = np.zeros(ts.shape, dtype=complex)
    for l in range(3):
        x = complex(roots[l])
        sgn = _principal_sqrt_sign(x)
        w2 = eps * x * x * ts
        w = np.sqrt(w2 + 0j)
        # x e^{w^2} + s x [e^{w^2} erf(w)] = (1 + s) x e^{w^2} - s x erfcx(w)
        if sgn > 0:
            bracket = 2.0 * x * np.exp(w2) - x * erfcx(w)
        else:
            bracket = x * erfcx(w)
        u += p[l] * np.exp(1j * delta * ts) * bracket
    u *= np.exp(-1j * omega0 * ts)
    if np.isscalar(t) or np.ndim(t) == 0:
        return complex(u[0])
    return u
