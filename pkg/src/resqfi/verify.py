"""Built-in verification suite: oracle equivalence and analytic limits.

Each check records its tolerance and the measured deviation, so the emitted
report doubles as a numerical health dashboard.  This module (and tests) are
the only callers of the brute-force oracles.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import quad

from . import analysis, gaussian, oracle, propagator, reservoir, specfun
from .config import FORMAT_VERSION

__all__ = ["VerifyCheck", "run_checks", "report_dict"]


@dataclass
class VerifyCheck:
    name: str
    tolerance: float
    measured: float
    passed: bool
    seconds: float


def _check(name, tolerance, measured, t0) -> VerifyCheck:
    return VerifyCheck(
        name=name,
        tolerance=float(tolerance),
        measured=float(measured),
        passed=bool(measured <= tolerance),
        seconds=round(time.perf_counter() - t0, 3),
    )


def run_checks(level: str = "quick") -> list[VerifyCheck]:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    checks: list[VerifyCheck] = []
    sd = reservoir.OhmicSpectralDensity(eta=0.4, omega_c=10.0, s=1.0)

    t0 = time.perf_counter()
    ref, _ = quad(lambda t: t**2.7 * math.exp(-t), 0, np.inf, limit=400)
    checks.append(
        _check("gamma_vs_quadrature", 1e-10, abs(specfun.gamma(3.7) - ref) / ref, t0)
    )

    t0 = time.perf_counter()
    ref, _ = quad(lambda t: math.exp(-0.25 * t) * t**-1.5, 1, np.inf, limit=400)
    got = specfun.gen_exp_integral(1.5, 0.25)
    checks.append(_check("expint_vs_quadrature", 1e-8, abs(got - ref) / ref, t0))

    t0 = time.perf_counter()
    worst = 0.0
    for x in (-2.0 * math.exp(-2.0), 0.5, 10.0, 1e3):
        w = specfun.lambert_w0(x)
        worst = max(worst, abs(w * math.exp(w) - x) / max(1.0, abs(x)))
    checks.append(_check("lambert_roundtrip", 1e-12, worst, t0))

    t0 = time.perf_counter()
    sd_sub = reservoir.OhmicSpectralDensity(eta=0.4, omega_c=10.0, s=0.5)
    closed = reservoir.memory_kernel(sd_sub, 0.3)
    re, _ = quad(lambda w: reservoir.evaluate_j(sd_sub, w) * math.cos(w * 0.3), 0, np.inf, limit=600)
    im, _ = quad(lambda w: -reservoir.evaluate_j(sd_sub, w) * math.sin(w * 0.3), 0, np.inf, limit=600)
    checks.append(
        _check("memory_kernel_closed_form", 1e-8, abs(closed - (re + 1j * im)) / abs(closed), t0)
    )

    t0 = time.perf_counter()
    e = 1.0
    got = reservoir.level_shift(sd, e)
    ref = _excision_pv(sd, e)
    checks.append(_check("level_shift_vs_excision", 1e-6, abs(got - ref) / abs(ref), t0))

    t0 = time.perf_counter()
    free = propagator.solve_volterra(
        reservoir.OhmicSpectralDensity(eta=1e-300, omega_c=1.0, s=1.0), 1.0, 10.0, 0.01
    )
    checks.append(
        _check(
            "volterra_free_phase",
            1e-10,
            float(np.abs(free.u - np.exp(-1j * free.t)).max()),
            t0,
        )
    )

    t0 = time.perf_counter()
    fine = propagator.solve_volterra(sd, 1.0, 10.0, 0.00125).u
    e1 = np.abs(propagator.solve_volterra(sd, 1.0, 10.0, 0.01).u - fine[::8]).max()
    e2 = np.abs(propagator.solve_volterra(sd, 1.0, 10.0, 0.005).u - fine[::4]).max()
    checks.append(_check("volterra_second_order", 1.2, abs(e1 / e2 - 4.0), t0))

    bound = propagator.find_bound_state(sd, 1.0)
    t0 = time.perf_counter()
    u0 = propagator.u_spectral(sd, 1.0, bound, 0.0)
    checks.append(_check("spectral_sum_rule", 2e-3, abs(u0 - 1.0), t0))

    t0 = time.perf_counter()
    traj = propagator.solve_volterra(sd, 1.0, 40.0, 0.004)
    ts = np.linspace(0.0, 40.0, 21)
    us = propagator.u_spectral(sd, 1.0, bound, ts)
    idx = np.round(ts / 0.004).astype(int)
    checks.append(
        _check("volterra_vs_spectral", 5e-3, float(np.abs(us - traj.u[idx]).max()), t0)
    )

    t0 = time.perf_counter()
    tk, fstar = analysis.markovian_optimum(1.0, 1.0)
    tk_num, f_num = _maximize_large_n_markovian()
    dev = max(abs(tk_num - 0.80), abs(f_num - 0.65))
    checks.append(_check("markovian_optimum_paper_values", 5e-3, dev, t0))
    checks.append(
        _check("markovian_optimum_closed_form", 1e-6, max(abs(tk - tk_num), abs(fstar - f_num)), t0)
    )

    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        amp = rng.uniform(0.5, 3.0)
        phase = rng.uniform(0, 2 * math.pi)
        spec = gaussian.InitialStateSpec(alpha=amp * np.exp(1j * phase), r=0.0)
        u = rng.uniform(0.2, 0.99) * np.exp(1j * rng.uniform(0, 2 * math.pi))
        du = rng.normal() + 1j * rng.normal()
        f = gaussian.qfi_gaussian(
            gaussian.evolve_state(spec, u), gaussian.state_derivative(spec, u, du)
        )
        ref = 4.0 * spec.nbar * abs(du) ** 2
        worst = max(worst, abs(f - ref) / ref)
    checks.append(_check("qfi_beta0_reduction", 1e-6, worst, t0))

    t0 = time.perf_counter()
    d_closed = analysis.dEb_dtheta(sd, 1.0, bound, "eta", method="closed_form")
    d_impl = analysis.dEb_dtheta(sd, 1.0, bound, "eta", method="implicit")
    checks.append(
        _check("dEb_closed_vs_implicit", 1e-6, abs(d_closed - d_impl) / abs(d_impl), t0)
    )

    t0 = time.perf_counter()
    disc = reservoir.discretize(sd, 800, 20.0 * sd.omega_c)
    ud = oracle.u_discrete(disc, 1.0, traj.t[idx])
    checks.append(
        _check("oracle_discrete_n800", 2.5e-2, float(np.abs(ud - traj.u[idx]).max()), t0)
    )

    if level == "full":
        t0 = time.perf_counter()
        disc = reservoir.discretize(sd, 2000, 20.0 * sd.omega_c)
        ud = oracle.u_discrete(disc, 1.0, traj.t)
        checks.append(
            _check("oracle_discrete_n2000", 5e-3, float(np.abs(ud - traj.u).max()), t0)
        )

        t0 = time.perf_counter()
        spec = gaussian.InitialStateSpec.from_photon_budget(4.0, 0.5)
        u_c = traj.u[int(round(10.0 / 0.004))]
        worst = _fock_crosscheck(spec, u_c)
        checks.append(_check("fock_qfi_crosscheck", 1e-2, worst, t0))

        t0 = time.perf_counter()
        th0 = analysis.theta_factor(0.0, 123.0, bound.weight)
        nb = 1e4
        th = analysis.theta_factor(0.5, nb / 0.5, bound.weight)
        lim = abs(th * (1.0 - bound.weight**2) / nb - 1.0)
        checks.append(_check("theta_limits", 1e-2, max(abs(th0 - 123.0) / 123.0, lim), t0))

    return checks


def _excision_pv(sd, e: float) -> float:
    # Richardson-extrapolated symmetric excision, the PV limit eps -> 0
    vals = []
    for ep in (2e-3, 1e-3):
        a, _ = quad(lambda w: reservoir.evaluate_j(sd, w) / (e - w), 0, e - ep, limit=400)
        b, _ = quad(lambda w: reservoir.evaluate_j(sd, w) / (e - w), e + ep, np.inf, limit=400)
        vals.append(a + b)
    return 2.0 * vals[1] - vals[0]


def _maximize_large_n_markovian():
    # golden-section maximum of t^2 (coth t - 1) in kappa*t units
    phi = (math.sqrt(5.0) - 1.0) / 2.0

    def f(y: float) -> float:
        return gaussian.qfi_markovian_large_n(1.0, 0.0, 1.0, 1.0, y)

    a, b = 0.1, 3.0
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    for _ in range(120):
        if f(c) > f(d):
            b = d
        else:
            a = c
        c = b - phi * (b - a)
        d = a + phi * (b - a)
    y = 0.5 * (a + b)
    return y, f(y)


def _fock_crosscheck(spec, u: complex) -> float:
    # theta-family u(theta) = theta * u around theta = 1
    state = gaussian.evolve_state(spec, u)
    dstate = gaussian.state_derivative(spec, u, u)
    f_gauss = gaussian.qfi_gaussian(state, dstate)
    eps = 1e-4
    dim = 70
    rp = oracle.build_fock_state(gaussian.evolve_state(spec, (1 + eps) * u), dim)
    rm = oracle.build_fock_state(gaussian.evolve_state(spec, (1 - eps) * u), dim)
    f_fock = oracle.qfi_fock_oracle(rp, rm, eps)
    return abs(f_gauss - f_fock) / f_fock


def report_dict(level: str, checks: list[VerifyCheck]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "level": level,
        "all_pass": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
