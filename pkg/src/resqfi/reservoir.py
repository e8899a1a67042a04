"""Reservoir spectral densities, memory kernel, and self-energy integrals.

Frequencies are nondimensionalized by the sensor frequency (omega0 = 1 by
default everywhere downstream); all reservoir types are immutable and all
operations are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .specfun import gamma, gen_exp_integral

__all__ = [
    "OhmicSpectralDensity",
    "PhotonicCrystalReservoir",
    "DiscreteReservoir",
    "evaluate_j",
    "memory_kernel",
    "self_energy",
    "self_energy_slope",
    "level_shift",
    "bound_state_criterion",
    "discretize",
]


@dataclass(frozen=True)
class OhmicSpectralDensity:
    """Ohmic-family spectral density J(w) = eta * w * (w/wc)^(s-1) * exp(-w/wc).

    ``s < 1`` is sub-Ohmic, ``s = 1`` Ohmic, ``s > 1`` super-Ohmic.
    """

    eta: float
    omega_c: float
    s: float

    def __post_init__(self) -> None:
        for name in ("eta", "omega_c", "s"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, float(v))

    @property
    def total_weight(self) -> float:
        """int_0^inf J(w) dw = eta * Gamma(s+1) * wc^2."""
        return self.eta * gamma(self.s + 1.0) * self.omega_c**2


@dataclass(frozen=True)
class PhotonicCrystalReservoir:
    """Band-gapped reservoir with quadratic dispersion above the edge omega_u.

    ``gamma0`` is the vacuum spontaneous emission rate of the sensor.  The
    per-sensor detuning and energy scale depend on the sensor frequency and
    are exposed as methods.
    """

    omega_u: float
    gamma0: float

    def __post_init__(self) -> None:
        for name in ("omega_u", "gamma0"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, float(v))

    def detuning(self, omega0: float) -> float:
        """delta = omega0 - omega_u; a bound state forms iff delta < 0."""
        return float(omega0) - self.omega_u

    def energy_scale(self, omega0: float) -> float:
        """epsilon = omega_u * (pi * gamma0 / (2 * omega0))^(2/3), always > 0."""
        if omega0 <= 0:
            raise ValueError("omega0 must be > 0")
        return self.omega_u * (math.pi * self.gamma0 / (2.0 * omega0)) ** (2.0 / 3.0)


@dataclass(frozen=True)
class DiscreteReservoir:
    """Finite sample of a continuum: mode frequencies and couplings.

    ``truncated_weight`` reports the spectral weight beyond the sampling
    window and ``weight_error`` the deviation of sum(g^2) from the in-window
    integral of J.
    """

    omega: np.ndarray
    g: np.ndarray
    truncated_weight: float = 0.0
    weight_error: float = 0.0

    def __post_init__(self) -> None:
        omega = np.asarray(self.omega, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if omega.ndim != 1 or omega.shape != g.shape or omega.size < 1:
            raise ValueError("omega and g must be matching 1-d arrays")
        if np.any(np.diff(omega) <= 0) or omega[0] < 0:
            raise ValueError("mode frequencies must be ascending and >= 0")
        if np.any(g < 0):
            raise ValueError("couplings must be >= 0")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "g", g)

    @property
    def n_modes(self) -> int:
        return int(self.omega.size)


def evaluate_j(sd: OhmicSpectralDensity, omega):
    """J(omega), vectorized over ``omega``; the w -> 0+ limit is 0 for all s > 0.

    Uses the equivalent form eta * wc^(1-s) * w^s * exp(-w/wc), which is
    well defined at w = 0 also for s < 1.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("evaluate_j requires omega >= 0")
    out = np.zeros_like(w)
    m = w > 0
    out[m] = sd.eta * sd.omega_c ** (1.0 - sd.s) * w[m] ** sd.s * np.exp(-w[m] / sd.omega_c)
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def memory_kernel(sd: OhmicSpectralDensity, t):
    """nu(t) = int_0^inf J(w) e^(-i w t) dw, in closed form.

    For the Ohmic family the Fourier-Laplace integral evaluates to
    eta * Gamma(s+1) * wc^2 * (1 + i wc t)^(-(s+1)); the principal complex
    power is analytic for t >= 0.
    """
    tt = np.asarray(t, dtype=float)
    val = sd.total_weight * (1.0 + 1j * sd.omega_c * tt) ** (-(sd.s + 1.0))
    if np.isscalar(t) or np.ndim(t) == 0:
        return complex(val)
    return val


def self_energy(sd: OhmicSpectralDensity, energy: float) -> float:
    """I(E) = int_0^inf J(w)/(w - E) dw for E < 0, via the closed form.

    I(E) = eta * wc * Gamma(s+1) * e^z * E_{s+1}(z) with z = -E/wc.  Agrees
    with direct quadrature of the defining integral (covered by tests).
    """
    energy = float(energy)
    if not (math.isfinite(energy) and energy < 0):
        raise ValueError("self_energy requires E < 0; use level_shift for E >= 0")
    z = -energy / sd.omega_c
    return sd.eta * sd.omega_c * gamma(sd.s + 1.0) * math.exp(z) * gen_exp_integral(sd.s + 1.0, z)


def self_energy_slope(sd: OhmicSpectralDensity, energy: float) -> float:
    """dI/dE = int_0^inf J(w)/(w - E)^2 dw for E < 0 (closed form, > 0)."""
    energy = float(energy)
    if not (math.isfinite(energy) and energy < 0):
        raise ValueError("self_energy_slope requires E < 0")
    z = -energy / sd.omega_c
    g1 = gamma(sd.s + 1.0)
    return sd.eta * g1 * math.exp(z) * (gen_exp_integral(sd.s, z) - gen_exp_integral(sd.s + 1.0, z))


def _tail_cutoff(sd: OhmicSpectralDensity, energy: float) -> float:
    return max(20.0 * sd.omega_c, 5.0 * energy)


def level_shift(sd: OhmicSpectralDensity, energy: float) -> float:
    """Principal-value shift Delta(E) = PV int_0^inf J(w)/(E - w) dw for E >= 0.

    The singularity at w = E is removed by subtracting J(E):

        Delta(E) = int_0^L [J(w) - J(E)]/(E - w) dw
                   + J(E) * ln(E / (L - E))
                   + int_L^inf J(w)/(E - w) dw

    with L = max(20 wc, 5 E), so the last (tail) integral is regular.
    Delta(0) = -eta * wc * Gamma(s) is an ordinary integral.
    """
    energy = float(energy)
    if not (math.isfinite(energy) and energy >= 0):
        raise ValueError("level_shift requires E >= 0")
    if energy == 0.0:
        return -sd.eta * sd.omega_c * gamma(sd.s)
    lam = _tail_cutoff(sd, energy)
    j_at_e = evaluate_j(sd, energy)
    dj_at_e = j_at_e * (sd.s / energy - 1.0 / sd.omega_c)

    def subtracted(w: float) -> float:
        d = energy - w
        if abs(d) < 1e-13 * max(1.0, energy):
            return -dj_at_e
        return (evaluate_j(sd, w) - j_at_e) / d

    v1, _ = quad(subtracted, 0.0, lam, points=[energy], limit=400)
    v2 = j_at_e * math.log(energy / (lam - energy))
    v3, _ = quad(lambda w: evaluate_j(sd, w) / (energy - w), lam, np.inf, limit=200)
    return v1 + v2 + v3


def bound_state_criterion(sd: OhmicSpectralDensity, omega0: float) -> bool:
    """True iff a bound state exists: omega0 <= eta * wc * Gamma(s)."""
    omega0 = float(omega0)
    if not (math.isfinite(omega0) and omega0 > 0):
        raise ValueError("omega0 must be finite and > 0")
    return omega0 <= sd.eta * sd.omega_c * gamma(sd.s)


def discretize(sd: OhmicSpectralDensity, n_modes: int, omega_max: float) -> DiscreteReservoir:
    """Midpoint sampling w_k = (k - 1/2) dw, g_k = sqrt(J(w_k) dw) on [0, omega_max].

    ``omega_max`` of at least ~20 wc is recommended so the truncated weight
    (reported on the result) is negligible; ``n_modes`` sets the recurrence
    time 2 pi / dw, which must exceed the simulated horizon.
    """
    if not isinstance(n_modes, int) or n_modes < 2:
        raise ValueError("n_modes must be an integer >= 2")
    omega_max = float(omega_max)
    if not (math.isfinite(omega_max) and omega_max > 0):
        raise ValueError("omega_max must be finite and > 0")
    dw = omega_max / n_modes
    wk = (np.arange(n_modes) + 0.5) * dw
    g = np.sqrt(evaluate_j(sd, wk) * dw)
    # upper incomplete-gamma tail of the total weight
    from scipy.special import gammaincc

    truncated = sd.total_weight * float(gammaincc(sd.s + 1.0, omega_max / sd.omega_c))
    integral, _ = quad(lambda w: evaluate_j(sd, w), 0.0, omega_max, limit=400)
    weight_error = float(abs((g**2).sum() - integral))
    return DiscreteReservoir(omega=wk, g=g, truncated_weight=truncated, weight_error=weight_error)
