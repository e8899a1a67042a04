"""Estimation analytics: finite-difference derivatives, asymptotic and
Markovian optima, scan drivers, power-law fits, and the Rayleigh-curse
locator.

Scan drivers honor a deterministic parallel-map contract: per-point work is
pure and results are identical to sequential execution regardless of
scheduling.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .gaussian import InitialStateSpec, evolve_state, qfi_gaussian, state_derivative
from .propagator import BoundState, default_dt, find_bound_state, solve_volterra
from .reservoir import OhmicSpectralDensity, PhotonicCrystalReservoir, evaluate_j
from .specfun import gamma, gen_exp_integral, lambert_w0

__all__ = [
    "EstimationTarget",
    "QfiScanResult",
    "SqueezingAdvantage",
    "CancellationWarning",
    "StencilAccuracyWarning",
    "parallel_map",
    "du_dtheta",
    "dEb_dtheta",
    "theta_factor",
    "qfi_asymptotic",
    "markovian_optimum",
    "qfi_time_scan",
    "squeezing_advantage",
    "find_rayleigh_curse",
    "power_law_exponent",
]

_OHMIC_FIELDS = {"eta": "eta", "omega_c": "omega_c", "s": "s"}


class CancellationWarning(UserWarning):
    """Finite-difference numerator is at rounding level."""


class StencilAccuracyWarning(UserWarning):
    """Richardson check of the stencil failed its tolerance."""


@dataclass(frozen=True)
class EstimationTarget:
    """Which reservoir parameter is being estimated, and the stencil step.

    ``eps`` of None means the default 1e-7 scaled by max(1, |theta|), so large
    dimensioned parameters (omega_c ~ 10) are not under-resolved.
    """

    which: str
    eps: float | None = None

    def __post_init__(self) -> None:
        if self.which not in ("eta", "omega_c", "s", "omega_u"):
            raise ValueError(f"unknown estimation target {self.which!r}")
        if self.eps is not None and not self.eps > 0:
            raise ValueError("eps must be > 0")

    def step(self, theta0: float) -> float:
        if self.eps is not None:
            if self.eps > 1e-3 * abs(theta0) and abs(theta0) >= 1e-3:
                raise ValueError("eps too large relative to the parameter")
            return self.eps
        return 1e-7 * max(1.0, abs(theta0))

    def value_of(self, reservoir) -> float:
        if self.which == "omega_u":
            if not isinstance(reservoir, PhotonicCrystalReservoir):
                raise TypeError("omega_u target needs a photonic-crystal reservoir")
            return reservoir.omega_u
        if not isinstance(reservoir, OhmicSpectralDensity):
            raise TypeError(f"{self.which} target needs an Ohmic spectral density")
        return getattr(reservoir, _OHMIC_FIELDS[self.which])

    def replaced(self, reservoir, value: float):
        if self.which == "omega_u":
            return dataclasses.replace(reservoir, omega_u=value)
        return dataclasses.replace(reservoir, **{_OHMIC_FIELDS[self.which]: value})


@dataclass(frozen=True)
class QfiScanResult:
    """QFI values over one scan axis, with per-point failures kept as gaps."""

    axis_name: str
    axis: np.ndarray
    values: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    gaps: tuple = ()

    def __post_init__(self) -> None:
        axis = np.asarray(self.axis, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if axis.shape != vals.shape:
            raise ValueError("axis and values must have matching shapes")
        finite = vals[np.isfinite(vals)]
        if finite.size and finite.min() < -1e-9:
            raise ValueError(f"negative QFI {finite.min():.3e} beyond numerical noise")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SqueezingAdvantage:
    """delta F over a squeezing-fraction grid plus the analytic threshold."""

    betas: np.ndarray
    qfi: np.ndarray
    delta_f: np.ndarray
    beta_threshold: float


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map; with threads > 1 uses a thread pool."""
    if threads is None or threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def du_dtheta(
    u_fn: Callable[[float], complex | np.ndarray],
    theta0: float,
    eps: float | None = None,
    *,
    richardson: bool = False,
):
    """Fourth-order central stencil for the parameter derivative of u.

    [-u(t+2e) + 8 u(t+e) - 8 u(t-e) + u(t-2e)] / (12 e), where ``u_fn`` maps a
    parameter value to u (scalar or an array over a fixed time grid; the grid
    must not change with the parameter).  ``richardson=True`` repeats the
    stencil at eps/2 and warns if the two disagree beyond 1e-4 relative.
    """
    theta0 = float(theta0)
    if eps is None:
        eps = 1e-7 * max(1.0, abs(theta0))
    if theta0 - 2.0 * eps <= 0.0:
        raise ValueError("theta - 2 eps must stay positive; one-sided stencils unsupported")

    def stencil(e: float):
        up2 = np.asarray(u_fn(theta0 + 2.0 * e))
        up1 = np.asarray(u_fn(theta0 + e))
        um1 = np.asarray(u_fn(theta0 - e))
        um2 = np.asarray(u_fn(theta0 - 2.0 * e))
        num = -up2 + 8.0 * up1 - 8.0 * um1 + um2
        scale = np.maximum(np.abs(up1), 1e-300)
        nz = np.abs(num) > 0
        if nz.any():
            if np.max(np.abs(num)[nz] / scale[nz]) < 1e3 * np.finfo(float).eps:
                warnings.warn(
                    "stencil numerator at rounding level; derivative unreliable",
                    CancellationWarning,
                    stacklevel=3,
                )
        return num / (12.0 * e)

    d1 = stencil(eps)
    if richardson:
        d2 = stencil(eps / 2.0)
        ref = np.maximum(np.abs(d2), 1e-300)
        rel = float(np.max(np.abs(d1 - d2) / ref))
        if rel > 1e-4:
            warnings.warn(
                f"stencil eps vs eps/2 disagreement {rel:.2e} > 1e-4",
                StencilAccuracyWarning,
                stacklevel=2,
            )
        d1 = d2
    if d1.ndim == 0:
        return complex(d1)
    return d1


def _dj_dtheta(sd: OhmicSpectralDensity, which: str, w: float) -> float:
    j = evaluate_j(sd, w)
    if which == "eta":
        return j / sd.eta
    if which == "omega_c":
        return j * ((1.0 - sd.s) / sd.omega_c + w / sd.omega_c**2)
    if which == "s":
        return j * math.log(w / sd.omega_c) if w > 0 else 0.0
    raise ValueError(f"unsupported target {which!r}")


def dEb_dtheta(
    sd: OhmicSpectralDensity,
    omega0: float,
    bound: BoundState,
    which: str,
    *,
    method: str = "implicit",
) -> float:
    """Parameter derivative of the bound-state energy.

    ``implicit`` differentiates omega0 - E - I(E; theta) = 0 with both
    integrals by quadrature; ``closed_form`` uses the exponential-integral
    expressions (available for eta and omega_c only).
    """
    if bound is None:
        raise ValueError("no bound state: dEb/dtheta undefined")
    e_b = bound.energy
    if method == "implicit":
        di, _ = quad(lambda w: _dj_dtheta(sd, which, w) / (w - e_b), 0.0, np.inf, limit=400)
        slope, _ = quad(lambda w: evaluate_j(sd, w) / (w - e_b) ** 2, 0.0, np.inf, limit=400)
        return -di / (1.0 + slope)
    if method != "closed_form":
        raise ValueError(f"unknown method {method!r}")

    z = -e_b / sd.omega_c
    eta, wc, s = sd.eta, sd.omega_c, sd.s
    g1 = gamma(s + 1.0)
    e_s = gen_exp_integral(s, z)
    e_s1 = gen_exp_integral(s + 1.0, z)
    if which == "eta":
        # both exponential-integral terms carry Gamma(s+1); follows from
        # d/dz[e^z E_{s+1}(z)] = e^z [E_{s+1}(z) - E_s(z)]
        num = wc * g1 * e_s1
        den = eta * g1 * e_s1 - eta * g1 * e_s - math.exp(-z)
        return num / den
    if which == "omega_c":
        g0 = gamma(s)
        num = eta * g0 * (wc * (wc + e_b) * math.exp(-z) + e_b * (wc + e_b - s * wc) * e_s)
        den = eta * wc * (e_b - s * wc) * g0 * e_s + wc**2 * (eta * g0 - 1.0) * math.exp(-z)
        return num / den
    raise ValueError(f"no closed form for target {which!r}")


def theta_factor(beta: float, nbar: float, weight: float) -> float:
    """Photon-budget factor Theta(beta, nbar) of the asymptotic QFI.

    Reduces to nbar at beta = 0 and to nbar*beta/(1 - Z^2) for large
    nbar*beta.
    """
    z2 = weight * weight
    nb = nbar * beta
    first = 2.0 * z2 * nb * (1.0 + nb) / (1.0 + 2.0 * nb * z2 * (1.0 - z2))
    second = (
        nbar
        * (1.0 - beta)
        * (1.0 - 2.0 * z2 * (math.sqrt(nb * (1.0 + nb)) - nb))
        / (1.0 + 4.0 * nb * z2 * (1.0 - z2))
    )
    return first + second


def qfi_asymptotic(spec: InitialStateSpec, bound: BoundState, dEb: float, t: float) -> float:
    """Long-time QFI 4 Z^2 Theta(beta, nbar) (dEb)^2 t^2 in the bound regime."""
    if bound is None:
        raise ValueError("asymptotic QFI requires a bound state")
    th = theta_factor(spec.beta, spec.nbar, bound.weight)
    return 4.0 * bound.weight**2 * th * dEb**2 * t * t


def markovian_optimum(dlnkappa: float, nbar: float):
    """Optimal encoding time and QFI of the large-nbar Markovian limit.

    Returns (t* kappa, F*) with t* kappa = 1 + W0(-2/e^2)/2 = 0.7968 and
    F* = [-2 W0 - W0^2] (dln kappa)^2 nbar = 0.6476 (dln kappa)^2 nbar.
    """
    if nbar <= 0:
        raise ValueError("nbar must be > 0")
    w = lambert_w0(-2.0 * math.exp(-2.0))
    t_kappa = 1.0 + w / 2.0
    prefactor = -2.0 * w - w * w
    return t_kappa, prefactor * dlnkappa**2 * nbar


def qfi_time_scan(
    spec: InitialStateSpec,
    sd: OhmicSpectralDensity,
    omega0: float,
    target: EstimationTarget,
    t_max: float,
    dt: float | None = None,
    threads: int = 1,
) -> QfiScanResult:
    """Exact QFI versus encoding time.

    Five Volterra solves on one shared grid (central plus the four stencil
    shifts) feed the state derivative and the Gaussian QFI at every grid
    point.  Solver failures at individual points are recorded as gaps.
    """
    theta0 = target.value_of(sd)
    eps = target.step(theta0)
    if dt is None:
        dt = default_dt(sd, omega0)

    def solve(offset: int) -> np.ndarray:
        sd_shift = target.replaced(sd, theta0 + offset * eps)
        return solve_volterra(sd_shift, omega0, t_max, dt).u

    us = parallel_map(solve, [-2, -1, 0, 1, 2], threads)
    du = (-us[4] + 8.0 * us[3] - 8.0 * us[1] + us[0]) / (12.0 * eps)
    u_c = us[2]
    t = np.arange(len(u_c)) * dt

    f = np.empty(len(u_c))
    gaps: list[int] = []
    for i in range(len(u_c)):
        try:
            state = evolve_state(spec, u_c[i])
            dstate = state_derivative(spec, u_c[i], du[i])
            f[i] = qfi_gaussian(state, dstate)
        except Exception:
            f[i] = np.nan
            gaps.append(i)
    params = {
        "eta": sd.eta,
        "omega_c": sd.omega_c,
        "s": sd.s,
        "omega0": float(omega0),
        "nbar": spec.nbar,
        "beta": spec.beta,
        "theta": target.which,
        "eps": eps,
        "dt": float(dt),
    }
    return QfiScanResult(
        axis_name="t", axis=t, values=f, method="exact", params=params, gaps=tuple(gaps)
    )


def squeezing_advantage(
    specs: Sequence[InitialStateSpec],
    sd: OhmicSpectralDensity,
    omega0: float,
    target: EstimationTarget,
    t: float,
    dt: float | None = None,
    threads: int = 1,
) -> SqueezingAdvantage:
    """QFI gain of squeezing over the coherent benchmark at fixed time.

    All input states must share one photon budget nbar.  Also solves
    Theta(beta, nbar) = nbar for the threshold squeezing fraction (bisection,
    tolerance 1e-6); 0.0 means squeezing helps everywhere on the grid, NaN
    that no threshold exists (e.g. without a bound state).
    """
    if not specs:
        raise ValueError("need at least one state spec")
    nbar = specs[0].nbar
    if any(abs(sp.nbar - nbar) > 1e-9 * max(1.0, nbar) for sp in specs):
        raise ValueError("squeezing_advantage requires a fixed nbar across the grid")

    theta0 = target.value_of(sd)
    eps = target.step(theta0)
    if dt is None:
        dt = default_dt(sd, omega0)

    def solve(offset: int) -> complex:
        sd_shift = target.replaced(sd, theta0 + offset * eps)
        return solve_volterra(sd_shift, omega0, t, dt).u[-1]

    u_vals = parallel_map(solve, [-2, -1, 0, 1, 2], threads)
    du = (-u_vals[4] + 8.0 * u_vals[3] - 8.0 * u_vals[1] + u_vals[0]) / (12.0 * eps)
    u_c = u_vals[2]

    ref_spec = InitialStateSpec.from_photon_budget(nbar, 0.0)
    f_ref = qfi_gaussian(
        evolve_state(ref_spec, u_c), state_derivative(ref_spec, u_c, du)
    )
    betas = np.array([sp.beta for sp in specs])
    f = np.array(
        [
            qfi_gaussian(evolve_state(sp, u_c), state_derivative(sp, u_c, du))
            for sp in specs
        ]
    )
    bound = find_bound_state(sd, omega0)
    if bound is None:
        beta_star = math.nan
    else:
        beta_star = _theta_threshold(nbar, bound.weight)
    return SqueezingAdvantage(betas=betas, qfi=f, delta_f=f - f_ref, beta_threshold=beta_star)


def _theta_threshold(nbar: float, weight: float) -> float:
    def h(beta: float) -> float:
        return theta_factor(beta, nbar, weight) - nbar

    grid = np.linspace(1e-6, 1.0, 256)
    vals = np.array([h(b) for b in grid])
    flips = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if flips.size == 0:
        return 0.0 if vals.min() > 0 else math.nan
    lo, hi = grid[flips[0]], grid[flips[0] + 1]
    return float(brentq(h, lo, hi, xtol=1e-6))


def find_rayleigh_curse(
    eta: float,
    omega_c: float,
    omega0: float,
    s_lo: float = 0.5,
    s_hi: float = 3.0,
) -> float:
    """s* where dEb/ds vanishes (and the asymptotic F_s with it).

    Bisection on s -> dEb/ds; requires a sign change on [s_lo, s_hi].
    """

    def slope(s: float) -> float:
        sd = OhmicSpectralDensity(eta=eta, omega_c=omega_c, s=s)
        bound = find_bound_state(sd, omega0)
        if bound is None:
            raise ValueError(f"no bound state at s = {s}")
        return dEb_dtheta(sd, omega0, bound, "s")

    f_lo, f_hi = slope(s_lo), slope(s_hi)
    if f_lo * f_hi > 0:
        raise ValueError("dEb/ds does not change sign on the given range")
    lo, hi = s_lo, s_hi
    val = f_lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = slope(mid)
        if abs(val) <= 1e-8:
            return mid
        if val * f_lo > 0:
            lo = mid
        else:
            hi = mid
    raise ArithmeticError(f"Rayleigh-curse bisection stalled, last |dEb/ds| = {abs(val):.2e}")


def power_law_exponent(t: np.ndarray, f: np.ndarray, t_min: float, t_max: float) -> float:
    """Least-squares slope of log f against log t on the window [t_min, t_max]."""
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    m = (t >= t_min) & (t <= t_max) & (f > 0)
    if m.sum() < 4:
        raise ValueError("too few points in the fit window")
    slope, _ = np.polyfit(np.log(t[m]), np.log(f[m]), 1)
    return float(slope)
