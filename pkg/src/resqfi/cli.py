"""Command-line front end.

    resqfi <dynamics|spectrum|qfi|measure|photonic|verify>
           --config <path> [--out <dir>] [--svg] [--threads N] [--level L]

Every emitted CSV starts with a comment header embedding the format version
and the resolved configuration; float columns use shortest round-trip
formatting, so identical configs produce byte-identical files.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, gaussian, propagator, reservoir
from .config import FORMAT_VERSION, ConfigError, RunConfig, load_config
from .svgplot import heatmap, line_plot

_NUMERIC_ERRORS = (
    propagator.DivergenceError,
    propagator.QuadratureBudgetError,
    gaussian.IllConditionedError,
    ArithmeticError,
    np.linalg.LinAlgError,
)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _header_lines(command: str, cfg: RunConfig) -> list[str]:
    lines = [f"# resqfi-format: {FORMAT_VERSION}", f"# command: {command}"]
    for key in sorted(cfg.raw):
        lines.append(f"# {key} = {_fmt(cfg.raw[key])}")
    return lines


def _write_csv(path: Path, command: str, cfg: RunConfig, names: list[str], cols: list) -> None:
    rows = zip(*cols) if cols else []
    with open(path, "w", newline="") as fh:
        for line in _header_lines(command, cfg):
            fh.write(line + "\n")
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _ohmic_trajectory(cfg: RunConfig):
    sd = cfg.ohmic
    if cfg.method == "volterra":
        traj = propagator.solve_volterra(sd, cfg.omega0, cfg.t_max, cfg.dt)
        return traj.t, traj.u
    if cfg.method == "spectral":
        dt = cfg.dt if cfg.dt is not None else cfg.t_max / 400.0
        t = np.arange(0.0, cfg.t_max + dt / 2, dt)
        bound = propagator.find_bound_state(sd, cfg.omega0)
        return t, propagator.u_spectral(sd, cfg.omega0, bound, t)
    if cfg.method == "markovian":
        dt = cfg.dt if cfg.dt is not None else propagator.default_dt(sd, cfg.omega0)
        t = np.arange(0.0, cfg.t_max + dt / 2, dt)
        return t, propagator.u_markovian(sd, cfg.omega0, t, cfg.include_shift)
    raise ConfigError(f"method {cfg.method!r} needs a photonic-crystal reservoir")


def cmd_dynamics(cfg: RunConfig, out_dir: Path) -> list[Path]:
    if cfg.reservoir_kind == "photonic_crystal" or cfg.method == "photonic":
        return cmd_photonic(cfg, out_dir)
    t, u = _ohmic_trajectory(cfg)
    gam, om = propagator._rates_arrays(t, u)
    path = out_dir / "dynamics.csv"
    _write_csv(
        path,
        "dynamics",
        cfg,
        ["t", "re_u", "im_u", "abs_u_sq", "gamma", "omega"],
        [t, u.real, u.imag, np.abs(u) ** 2, gam, om],
    )
    written = [path]
    if cfg.svg:
        svg = out_dir / "dynamics.svg"
        line_plot(svg, t, {"|u|^2": np.abs(u) ** 2, "Gamma": gam}, "sensor dynamics", "t", "")
        written.append(svg)
    return written


def cmd_spectrum(cfg: RunConfig, out_dir: Path) -> list[Path]:
    if cfg.ohmic is None:
        raise ConfigError("spectrum command requires an Ohmic reservoir")
    if cfg.scan_axis not in ("eta", "omega_c", "s"):
        raise ConfigError("scan.axis must be eta, omega_c or s")
    axis = np.linspace(cfg.scan_start, cfg.scan_stop, cfg.scan_count)
    target = analysis.EstimationTarget(which=cfg.scan_axis)
    present = np.zeros(len(axis), dtype=int)
    e_b = np.full(len(axis), np.nan)
    weight = np.full(len(axis), np.nan)

    def solve(value: float):
        sd = target.replaced(cfg.ohmic, float(value))
        return propagator.find_bound_state(sd, cfg.omega0)

    bounds = analysis.parallel_map(solve, axis, cfg.threads)
    for i, b in enumerate(bounds):
        if b is not None:
            present[i] = 1
            e_b[i] = b.energy
            weight[i] = b.weight
    path = out_dir / "spectrum.csv"
    _write_csv(
        path,
        "spectrum",
        cfg,
        [cfg.scan_axis, "bound_present", "E_b", "Z", "band_lower"],
        [axis, present, e_b, weight, np.zeros(len(axis))],
    )
    written = [path]
    if cfg.svg:
        svg = out_dir / "spectrum.svg"
        line_plot(svg, axis, {"E_b": e_b}, "bound-state branch", cfg.scan_axis, "E_b")
        written.append(svg)
    return written


def _scalar_u_du(cfg: RunConfig, t_end: float):
    sd = cfg.ohmic
    target = analysis.EstimationTarget(which=cfg.theta, eps=cfg.eps)
    theta0 = target.value_of(sd)
    eps = target.step(theta0)
    dt = cfg.dt if cfg.dt is not None else propagator.default_dt(sd, cfg.omega0)

    def solve(offset: int) -> np.ndarray:
        sd_shift = target.replaced(sd, theta0 + offset * eps)
        return propagator.solve_volterra(sd_shift, cfg.omega0, t_end, dt).u

    us = analysis.parallel_map(solve, [-2, -1, 0, 1, 2], cfg.threads)
    du = (-us[4] + 8.0 * us[3] - 8.0 * us[1] + us[0]) / (12.0 * eps)
    t = np.arange(len(us[2])) * dt
    return t, us[2], du


def cmd_qfi(cfg: RunConfig, out_dir: Path) -> list[Path]:
    if cfg.ohmic is None:
        raise ConfigError("qfi command requires an Ohmic reservoir")
    target = analysis.EstimationTarget(which=cfg.theta, eps=cfg.eps)
    written: list[Path] = []
    if cfg.scan_kind == "time":
        scan = analysis.qfi_time_scan(
            cfg.state, cfg.ohmic, cfg.omega0, target, cfg.t_max, cfg.dt, cfg.threads
        )
        path = out_dir / "qfi_time.csv"
        _write_csv(path, "qfi", cfg, ["t", "qfi"], [scan.axis, scan.values])
        written.append(path)
        if cfg.svg:
            svg = out_dir / "qfi_time.svg"
            line_plot(svg, scan.axis, {"F": scan.values}, "QFI vs time", "t", "log10 F", logy=True)
            written.append(svg)
    elif cfg.scan_kind == "beta":
        nbar = cfg.state.nbar
        if nbar <= 0:
            raise ConfigError("beta scan needs nbar > 0")
        phase = float(np.angle(cfg.state.alpha)) if abs(cfg.state.alpha) else 0.0
        betas = np.linspace(0.0, 1.0, cfg.scan_count)
        specs = [gaussian.InitialStateSpec.from_photon_budget(nbar, b, phase) for b in betas]
        adv = analysis.squeezing_advantage(
            specs, cfg.ohmic, cfg.omega0, target, cfg.t_max, cfg.dt, cfg.threads
        )
        path = out_dir / "qfi_beta.csv"
        with open(path, "w", newline="") as fh:
            for line in _header_lines("qfi", cfg):
                fh.write(line + "\n")
            fh.write(f"# beta_threshold = {_fmt(adv.beta_threshold)}\n")
            fh.write("beta,qfi,delta_qfi\n")
            for b, f, d in zip(adv.betas, adv.qfi, adv.delta_f):
                fh.write(f"{_fmt(b)},{_fmt(f)},{_fmt(d)}\n")
        written.append(path)
        if cfg.svg:
            svg = out_dir / "qfi_beta.svg"
            line_plot(svg, adv.betas, {"delta F": adv.delta_f}, "squeezing gain", "beta", "")
            written.append(svg)
    else:  # nbar scan at beta in {0, 0.5, 1}
        t, u, du = _scalar_u_du(cfg, cfg.t_max)
        u_end, du_end = u[-1], du[-1]
        nbars = np.linspace(cfg.scan_start, cfg.scan_stop, cfg.scan_count)
        cols = {0.0: [], 0.5: [], 1.0: []}
        for nb in nbars:
            for b in cols:
                sp = gaussian.InitialStateSpec.from_photon_budget(float(nb), b)
                f = gaussian.qfi_gaussian(
                    gaussian.evolve_state(sp, u_end),
                    gaussian.state_derivative(sp, u_end, du_end),
                )
                cols[b].append(f)
        path = out_dir / "qfi_nbar.csv"
        _write_csv(
            path,
            "qfi",
            cfg,
            ["nbar", "qfi_beta0", "qfi_beta05", "qfi_beta1"],
            [nbars, np.array(cols[0.0]), np.array(cols[0.5]), np.array(cols[1.0])],
        )
        written.append(path)
    return written


def cmd_measure(cfg: RunConfig, out_dir: Path) -> list[Path]:
    if cfg.ohmic is None:
        raise ConfigError("measure command requires an Ohmic reservoir")
    if abs(cfg.state.alpha) == 0:
        raise ConfigError("measure command needs |alpha| > 0: the a+a^dag signal vanishes")
    t, u, du = _scalar_u_du(cfg, cfg.t_max)
    delta = np.array(
        [
            gaussian.error_propagation(cfg.state, u[i], du[i]) if i > 0 else math.inf
            for i in range(len(t))
        ]
    )
    path = out_dir / "measure.csv"
    _write_csv(path, "measure", cfg, ["t", "delta_theta"], [t, delta])
    written = [path]

    bound = propagator.find_bound_state(cfg.ohmic, cfg.omega0)
    report: dict = {"format_version": FORMAT_VERSION, "bound_state": bound is not None}
    if bound is not None:
        d_eb = analysis.dEb_dtheta(cfg.ohmic, cfg.omega0, bound, cfg.theta)
        t_n, d_num, d_ana = _match_minima(t, delta, bound, cfg.state, d_eb)
        mpath = out_dir / "measure_minima.csv"
        _write_csv(
            mpath,
            "measure",
            cfg,
            ["t_min", "delta_numeric", "delta_analytic", "ratio"],
            [t_n, d_num, d_ana, d_num / d_ana],
        )
        written.append(mpath)
        if len(d_num):
            worst = float(np.abs(d_num / d_ana - 1.0).max())
            report.update({"n_minima": int(len(d_num)), "worst_ratio_error": worst,
                           "within_5pct": worst <= 0.05})
    rpath = out_dir / "measure_report.json"
    rpath.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    written.append(rpath)
    if cfg.svg:
        svg = out_dir / "measure.svg"
        line_plot(svg, t, {"delta theta": delta}, "measurement precision", "t", "", logy=True)
        written.append(svg)
    return written


def _match_minima(t, delta, bound, state, d_eb):
    # analytic minima at E_b t = n pi, paired with scanned local minima
    spacing = math.pi / abs(bound.energy)
    t_marks = np.arange(spacing, t[-1] + 1e-12, spacing)
    finite = np.isfinite(delta)
    loc = []
    for i in range(1, len(t) - 1):
        if finite[i - 1] and finite[i] and finite[i + 1]:
            if delta[i] <= delta[i - 1] and delta[i] < delta[i + 1]:
                loc.append(i)
    t_found, d_found, d_ana = [], [], []
    for tm in t_marks:
        if not loc:
            break
        i = min(loc, key=lambda j: abs(t[j] - tm))
        if abs(t[i] - tm) > 0.5 * spacing:
            continue
        t_found.append(t[i])
        d_found.append(delta[i])
        d_ana.append(gaussian.min_measurement_error(state, bound.weight, d_eb, tm))
    return np.array(t_found), np.array(d_found), np.array(d_ana)


def cmd_photonic(cfg: RunConfig, out_dir: Path) -> list[Path]:
    pc = cfg.photonic
    if pc is None:
        raise ConfigError("photonic command requires reservoir.kind = photonic_crystal")
    dt = cfg.dt if cfg.dt is not None else cfg.t_max / 1000.0
    t = np.arange(0.0, cfg.t_max + dt / 2, dt)
    u = propagator.u_photonic_crystal(pc, cfg.omega0, t)
    target = analysis.EstimationTarget(which="omega_u", eps=cfg.eps)
    eps = target.step(pc.omega_u)

    def u_of(omega_u: float) -> np.ndarray:
        return propagator.u_photonic_crystal(
            dataclasses.replace(pc, omega_u=omega_u), cfg.omega0, t
        )

    du = analysis.du_dtheta(u_of, pc.omega_u, eps)
    f = np.empty(len(t))
    for i in range(len(t)):
        u_i = u[i] / max(1.0, abs(u[i]))  # rounding-level |u| > 1 overshoot
        f[i] = gaussian.qfi_gaussian(
            gaussian.evolve_state(cfg.state, u_i),
            gaussian.state_derivative(cfg.state, u_i, du[i]),
        )
    path = out_dir / "photonic.csv"
    _write_csv(
        path,
        "photonic",
        cfg,
        ["t", "re_u", "im_u", "abs_u_sq", "qfi"],
        [t, u.real, u.imag, np.abs(u) ** 2, f],
    )
    written = [path]
    if cfg.svg:
        svg = out_dir / "photonic.svg"
        line_plot(svg, t, {"|u|^2": np.abs(u) ** 2}, "photonic crystal", "gamma0 t", "")
        written.append(svg)
    return written


def cmd_verify(level: str, out_dir: Path) -> int:
    from .verify import report_dict, run_checks

    checks = run_checks(level)
    report = report_dict(level, checks)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "verify_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    for c in checks:
        flag = "PASS" if c.passed else "FAIL"
        print(f"[{flag}] {c.name}: measured {c.measured:.3e} vs tolerance {c.tolerance:.3e}")
    print(f"verify level={level}: {'all passed' if report['all_pass'] else 'FAILURES present'}")
    return 0 if report["all_pass"] else 4


_COMMANDS = {
    "dynamics": cmd_dynamics,
    "spectrum": cmd_spectrum,
    "qfi": cmd_qfi,
    "measure": cmd_measure,
    "photonic": cmd_photonic,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="resqfi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_COMMANDS, "verify"):
        p = sub.add_parser(name)
        if name != "verify":
            p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--svg", action="store_true")
        p.add_argument("--threads", type=int, default=None)
        if name == "verify":
            p.add_argument("--level", choices=("quick", "full"), default="quick")
    args = parser.parse_args(argv)

    try:
        if args.command == "verify":
            return cmd_verify(args.level, Path(args.out or "out"))
        cfg = load_config(args.config)
        if args.out is not None:
            cfg.out_dir = Path(args.out)
        if args.svg:
            cfg.svg = True
        threads = args.threads
        if threads is None:
            threads = int(os.environ.get("RESQFI_THREADS", "1"))
        cfg.threads = max(1, threads)
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        written = _COMMANDS[args.command](cfg, cfg.out_dir)
        for path in written:
            print(path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
