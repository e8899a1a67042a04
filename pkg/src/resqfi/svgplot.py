"""Minimal self-contained SVG emitters (line plot and heatmap).

Just enough to eyeball scan output; no external plotting dependencies.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

__all__ = ["line_plot", "heatmap"]

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 70, 20, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _finite(a):
    a = np.asarray(a, dtype=float)
    return a[np.isfinite(a)]


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * span:
        out.append(v)
        v += step
    return out


def line_plot(
    path: str | Path,
    x: np.ndarray,
    series: dict[str, np.ndarray],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logy: bool = False,
) -> None:
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    if logy:
        ys = {k: np.where(v > 0, np.log10(np.maximum(v, 1e-300)), np.nan) for k, v in ys.items()}
    all_y = np.concatenate([_finite(v) for v in ys.values()]) if ys else np.array([0.0, 1.0])
    if all_y.size == 0:
        all_y = np.array([0.0, 1.0])
    x_lo, x_hi = float(np.min(x)), float(np.max(x))
    y_lo, y_hi = float(np.min(all_y)), float(np.max(all_y))
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    def sx(v):
        return _ML + (v - x_lo) / (x_hi - x_lo or 1.0) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (v - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="13">{title}</text>',
    ]
    for tv in _ticks(x_lo, x_hi):
        px = sx(tv)
        parts.append(f'<line x1="{px:.1f}" y1="{_H - _MB}" x2="{px:.1f}" y2="{_MT}" stroke="#eee"/>')
        parts.append(f'<text x="{px:.1f}" y="{_H - _MB + 16}" text-anchor="middle">{tv:g}</text>')
    for tv in _ticks(y_lo, y_hi):
        py = sy(tv)
        label = f"1e{tv:g}" if logy else f"{tv:g}"
        parts.append(f'<line x1="{_ML}" y1="{py:.1f}" x2="{_W - _MR}" y2="{py:.1f}" stroke="#eee"/>')
        parts.append(f'<text x="{_ML - 6}" y="{py + 4:.1f}" text-anchor="end">{label}</text>')
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        f'fill="none" stroke="black"/>'
    )
    for i, (name, y) in enumerate(ys.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = [
            f"{sx(xi):.1f},{sy(yi):.1f}"
            for xi, yi in zip(x, y)
            if math.isfinite(xi) and math.isfinite(yi)
        ]
        if pts:
            parts.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}"/>')
        parts.append(
            f'<text x="{_W - _MR - 8}" y="{_MT + 16 + 14 * i}" text-anchor="end" '
            f'fill="{color}">{name}</text>'
        )
    parts.append(f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="16" y="{_H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text>'
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))


def heatmap(
    path: str | Path,
    x_axis: np.ndarray,
    y_axis: np.ndarray,
    z: np.ndarray,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
) -> None:
    z = np.asarray(z, dtype=float)
    ny, nx = z.shape
    finite = _finite(z)
    z_lo = float(finite.min()) if finite.size else 0.0
    z_hi = float(finite.max()) if finite.size else 1.0
    if z_hi == z_lo:
        z_hi = z_lo + 1.0
    cell_w = (_W - _ML - _MR) / nx
    cell_h = (_H - _MT - _MB) / ny
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="18" text-anchor="middle" font-size="13">{title}</text>',
    ]
    for iy in range(ny):
        for ix in range(nx):
            v = z[iy, ix]
            if not math.isfinite(v):
                fill = "#cccccc"
            else:
                f = (v - z_lo) / (z_hi - z_lo)
                r = int(255 * f)
                b = int(255 * (1 - f))
                fill = f"#{r:02x}40{b:02x}"
            px = _ML + ix * cell_w
            py = _H - _MB - (iy + 1) * cell_h
            parts.append(
                f'<rect x="{px:.1f}" y="{py:.1f}" width="{cell_w + 0.5:.1f}" '
                f'height="{cell_h + 0.5:.1f}" fill="{fill}"/>'
            )
    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" height="{_H - _MT - _MB}" '
        f'fill="none" stroke="black"/>'
    )
    parts.append(
        f'<text x="{_ML}" y="{_H - _MB + 16}">{float(np.min(x_axis)):g}</text>'
        f'<text x="{_W - _MR}" y="{_H - _MB + 16}" text-anchor="end">{float(np.max(x_axis)):g}</text>'
    )
    parts.append(
        f'<text x="{_ML - 6}" y="{_H - _MB}" text-anchor="end">{float(np.min(y_axis)):g}</text>'
        f'<text x="{_ML - 6}" y="{_MT + 10}" text-anchor="end">{float(np.max(y_axis)):g}</text>'
    )
    parts.append(f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{xlabel}</text>')
    parts.append(
        f'<text x="16" y="{_H / 2}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_H / 2})">{ylabel}</text>'
    )
    parts.append(f'<text x="{_W - _MR}" y="{_MT - 6}" text-anchor="end">'
                 f'range [{z_lo:.3g}, {z_hi:.3g}]</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts))
