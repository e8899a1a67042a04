"""Run configuration: flat key=value text with dotted section prefixes.

Example::

    # comment
    method = volterra
    reservoir.kind = ohmic
    reservoir.eta = 0.4
    sensor.omega0 = 1.0
    state.nbar = 100
    state.beta = 0.5

No quoting, no nesting; values are parsed as bool/int/float where they look
like one, otherwise kept as strings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .gaussian import InitialStateSpec
from .reservoir import OhmicSpectralDensity, PhotonicCrystalReservoir

__all__ = ["ConfigError", "RunConfig", "parse_kv_text", "load_config"]

FORMAT_VERSION = "1"

_METHODS = ("volterra", "spectral", "markovian", "photonic")
_THETAS = ("eta", "omega_c", "s", "omega_u")
_SCAN_KINDS = ("time", "beta", "nbar")


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _coerce(text: str):
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_kv_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _coerce(value)
    return out


@dataclass
class RunConfig:
    """Validated run parameters shared by all CLI commands."""

    method: str = "volterra"
    reservoir_kind: str = "ohmic"
    ohmic: OhmicSpectralDensity | None = None
    photonic: PhotonicCrystalReservoir | None = None
    omega0: float = 1.0
    state: InitialStateSpec | None = None
    t_max: float = 40.0
    dt: float | None = None
    theta: str = "s"
    eps: float | None = None
    include_shift: bool = False
    scan_kind: str = "time"
    scan_axis: str = "eta"
    scan_start: float = 0.05
    scan_stop: float = 0.6
    scan_count: int = 24
    out_dir: Path = Path("out")
    svg: bool = False
    threads: int = 1
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, kv: dict) -> "RunConfig":
        known_prefixes = ("reservoir.", "sensor.", "state.", "time.", "target.", "scan.", "output.")
        for key in kv:
            if "." in key and not key.startswith(known_prefixes):
                raise ConfigError(f"unknown config section in key {key!r}")

        cfg = cls(raw=dict(kv))
        cfg.method = str(kv.get("method", cfg.method))
        if cfg.method not in _METHODS:
            raise ConfigError(f"method must be one of {_METHODS}, got {cfg.method!r}")

        cfg.reservoir_kind = str(kv.get("reservoir.kind", "ohmic"))
        if cfg.reservoir_kind == "ohmic":
            try:
                cfg.ohmic = OhmicSpectralDensity(
                    eta=_need_num(kv, "reservoir.eta"),
                    omega_c=_need_num(kv, "reservoir.omega_c"),
                    s=_need_num(kv, "reservoir.s"),
                )
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        elif cfg.reservoir_kind == "photonic_crystal":
            try:
                cfg.photonic = PhotonicCrystalReservoir(
                    omega_u=_need_num(kv, "reservoir.omega_u"),
                    gamma0=_need_num(kv, "reservoir.gamma0"),
                )
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        else:
            raise ConfigError(f"reservoir.kind must be ohmic or photonic_crystal")

        cfg.omega0 = _need_num(kv, "sensor.omega0", default=1.0)
        if not (math.isfinite(cfg.omega0) and cfg.omega0 > 0):
            raise ConfigError("sensor.omega0 must be finite and > 0")

        cfg.state = _parse_state(kv)

        cfg.t_max = _need_num(kv, "time.t_max", default=40.0)
        if cfg.t_max <= 0:
            raise ConfigError("time.t_max must be > 0")
        if "time.dt" in kv:
            cfg.dt = _need_num(kv, "time.dt")
            if cfg.dt <= 0:
                raise ConfigError("time.dt must be > 0")

        cfg.theta = str(kv.get("target.theta", cfg.theta))
        if cfg.theta not in _THETAS:
            raise ConfigError(f"target.theta must be one of {_THETAS}")
        if "target.eps" in kv:
            cfg.eps = _need_num(kv, "target.eps")
            if cfg.eps <= 0:
                raise ConfigError("target.eps must be > 0")

        cfg.include_shift = bool(kv.get("method.include_shift", False))

        cfg.scan_kind = str(kv.get("scan.kind", cfg.scan_kind))
        if cfg.scan_kind not in _SCAN_KINDS:
            raise ConfigError(f"scan.kind must be one of {_SCAN_KINDS}")
        cfg.scan_axis = str(kv.get("scan.axis", cfg.scan_axis))
        cfg.scan_start = _need_num(kv, "scan.start", default=cfg.scan_start)
        cfg.scan_stop = _need_num(kv, "scan.stop", default=cfg.scan_stop)
        cfg.scan_count = int(kv.get("scan.count", cfg.scan_count))
        if cfg.scan_count < 2:
            raise ConfigError("scan.count must be >= 2")

        cfg.out_dir = Path(str(kv.get("output.dir", "out")))
        cfg.svg = bool(kv.get("output.svg", False))
        return cfg


def _need_num(kv: dict, key: str, default=None) -> float:
    if key not in kv:
        if default is not None:
            return float(default)
        raise ConfigError(f"missing required key {key!r}")
    v = kv[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    return float(v)


def _parse_state(kv: dict) -> InitialStateSpec:
    has_budget = "state.nbar" in kv or "state.beta" in kv
    has_direct = "state.alpha_abs" in kv or "state.r" in kv
    if has_budget and has_direct:
        raise ConfigError("state.nbar/state.beta and state.alpha_abs/state.r are mutually exclusive")
    phase = _need_num(kv, "state.phase", default=0.0)
    try:
        if has_budget:
            nbar = _need_num(kv, "state.nbar")
            beta = _need_num(kv, "state.beta", default=0.0)
            return InitialStateSpec.from_photon_budget(nbar, beta, phase)
        amp = _need_num(kv, "state.alpha_abs", default=0.0)
        r = _need_num(kv, "state.r", default=0.0)
        return InitialStateSpec(alpha=amp * complex(math.cos(phase), math.sin(phase)), r=r)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return RunConfig.from_dict(parse_kv_text(p.read_text()))
