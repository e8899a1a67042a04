"""Scalar special functions used across the reservoir and spectrum machinery.

Everything here is pure and reentrant: gamma for positive real argument, the
generalized exponential integral of real (possibly fractional) order, the
error function continued to the complex plane, and the principal real branch
of the Lambert W function.
"""

from __future__ import annotations

import math

import mpmath
import scipy.special as _sp

__all__ = ["gamma", "gen_exp_integral", "erf_complex", "lambert_w0"]

_INV_E = 1.0 / math.e


def gamma(x: float) -> float:
    """Gamma function for strictly positive real ``x``.

    Negative and zero arguments are rejected: the reservoir formulas only
    ever need ``x > 0`` and the poles on the non-positive axis would
    silently poison downstream integrals.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"gamma requires finite x > 0, got {x!r}")
    return math.gamma(x)


def gen_exp_integral(nu: float, x: float) -> float:
    """Generalized exponential integral E_nu(x) = int_1^inf e^(-x t) t^(-nu) dt.

    Parameters
    ----------
    nu:
        Order, any real >= 0.  Fractional orders are required by the
        sub-Ohmic closed forms (nu = s + 1 with fractional s).
    x:
        Argument, strictly positive.
    """
    nu = float(nu)
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"gen_exp_integral requires finite x > 0, got {x!r}")
    if not math.isfinite(nu) or nu < 0.0:
        raise ValueError(f"gen_exp_integral requires nu >= 0, got {nu!r}")
    if nu == 0.0:
        return math.exp(-x) / x
    return float(mpmath.expint(nu, x))


def erf_complex(z: complex) -> complex:
    """Error function analytically continued to the complex plane."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"erf_complex requires finite z, got {z!r}")
    return complex(_sp.erf(z))


def lambert_w0(x: float) -> float:
    """Principal real branch of the Lambert W function, ``w e^w = x``.

    Defined for ``x >= -1/e``; the branch point itself maps to -1.
    """
    x = float(x)
    if not math.isfinite(x) or x < -_INV_E:
        raise ValueError(f"lambert_w0 requires x >= -1/e, got {x!r}")
    if x == -_INV_E:
        return -1.0
    w = float(_sp.lambertw(x, 0).real)
    # one Newton polish away from the branch point, where 1 + w -> 0
    if abs(1.0 + w) > 1e-6:
        ew = math.exp(w)
        w -= (w * ew - x) / (ew * (1.0 + w))
    resid = abs(w * math.exp(w) - x)
    if resid > 1e-12 * max(1.0, abs(x)):
        raise ArithmeticError(f"lambert_w0 residual {resid:.3e} too large at x={x!r}")
    return w
