"""Minimal hand-written SVG charts: stacked line panels and colour maps."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")
# viridis anchor points
_CMAP = np.array(
    [
        [68, 1, 84],
        [59, 82, 139],
        [33, 145, 140],
        [94, 201, 98],
        [253, 231, 37],
    ],
    dtype=float,
)

W, PANEL_H, MARGIN = 640, 260, 56


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _fmt(v: float) -> str:
    return f"{v:.3g}"


def _scale(values, lo, hi, out_lo, out_hi, log=False):
    values = np.asarray(values, dtype=float)
    if log:
        values, lo, hi = np.log10(values), math.log10(lo), math.log10(hi)
    span = hi - lo if hi > lo else 1.0
    return out_lo + (values - lo) / span * (out_hi - out_lo)


def _finite_range(arrays):
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def line_panels(path, panels: Sequence[dict], title: str = "") -> None:
    """Write vertically stacked line charts.

    Each panel is a dict with ``series`` (list of ``(label, xs, ys)``),
    ``xlabel``, ``ylabel`` and optional ``logx`` / ``markers``.
    """
    height = PANEL_H * len(panels) + 30
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{W}" height="{height}" fill="white"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
    ]
    for k, panel in enumerate(panels):
        top = 30 + k * PANEL_H
        x0, x1 = MARGIN, W - 20
        y0, y1 = top + PANEL_H - 40, top + 10
        series = panel["series"]
        logx = panel.get("logx", False)
        xlo, xhi = _finite_range([s[1] for s in series])
        ylo, yhi = _finite_range([s[2] for s in series])
        out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="#444"/>')
        for i, (label, xs, ys) in enumerate(series):
            color = _COLORS[i % len(_COLORS)]
            xs = np.asarray(xs, dtype=float)
            ys = np.asarray(ys, dtype=float)
            ok = np.isfinite(xs) & np.isfinite(ys)
            px = _scale(xs[ok], xlo, xhi, x0, x1, logx)
            py = _scale(ys[ok], ylo, yhi, y0, y1)
            if panel.get("markers"):
                out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2.5" fill="{color}"/>' for a, b in zip(px, py))
            else:
                pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<text x="{x1 - 4}" y="{y1 + 14 + 13 * i}" text-anchor="end" fill="{color}">{_esc(label)}</text>')
        out.append(f'<text x="{x0}" y="{y0 + 14}">{_fmt(xlo)}</text>')
        out.append(f'<text x="{x1}" y="{y0 + 14}" text-anchor="end">{_fmt(xhi)}</text>')
        out.append(f'<text x="{(x0 + x1) / 2}" y="{y0 + 28}" text-anchor="middle">{_esc(panel.get("xlabel", ""))}</text>')
        out.append(f'<text x="{x0 - 4}" y="{y0}" text-anchor="end">{_fmt(ylo)}</text>')
        out.append(f'<text x="{x0 - 4}" y="{y1 + 8}" text-anchor="end">{_fmt(yhi)}</text>')
        out.append(
            f'<text x="14" y="{(y0 + y1) / 2}" transform="rotate(-90 14 {(y0 + y1) / 2})" text-anchor="middle">'
            f'{_esc(panel.get("ylabel", ""))}</text>'
        )
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _color(frac: float) -> str:
    if not math.isfinite(frac):
        return "#bbbbbb"
    pos = min(max(frac, 0.0), 1.0) * (len(_CMAP) - 1)
    i = min(int(pos), len(_CMAP) - 2)
    rgb = _CMAP[i] + (pos - i) * (_CMAP[i + 1] - _CMAP[i])
    return "#%02x%02x%02x" % tuple(int(round(v)) for v in rgb)


def heatmap(path, xs, ys, values, title="", xlabel="", ylabel="") -> None:
    """Colour map of ``values[i, j]`` at ``(xs[i], ys[j])``; NaN cells are grey."""
    values = np.asarray(values, dtype=float)
    nx, ny = values.shape
    x0, x1, y0, y1 = MARGIN, W - 90, 360, 30
    cw, ch = (x1 - x0) / nx, (y0 - y1) / ny
    lo, hi = _finite_range([values])
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="420" font-family="sans-serif" font-size="11">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
    ]
    for i in range(nx):
        for j in range(ny):
            frac = (values[i, j] - lo) / (hi - lo)
            out.append(
                f'<rect x="{x0 + i * cw:.2f}" y="{y0 - (j + 1) * ch:.2f}" width="{cw:.2f}" height="{ch:.2f}" '
                f'fill="{_color(frac)}"/>'
            )
    for k in range(11):
        frac = k / 10
        out.append(f'<rect x="{W - 70}" y="{y0 - (k + 1) * (y0 - y1) / 11:.2f}" width="14" height="{(y0 - y1) / 11:.2f}" fill="{_color(frac)}"/>')
    out.append(f'<text x="{W - 52}" y="{y0}">{_fmt(lo)}</text>')
    out.append(f'<text x="{W - 52}" y="{y1 + 10}">{_fmt(hi)}</text>')
    out.append(f'<text x="{x0}" y="{y0 + 14}">{_fmt(xs[0])}</text>')
    out.append(f'<text x="{x1}" y="{y0 + 14}" text-anchor="end">{_fmt(xs[-1])}</text>')
    out.append(f'<text x="{(x0 + x1) / 2}" y="{y0 + 30}" text-anchor="middle">{_esc(xlabel)}</text>')
    out.append(f'<text x="{x0 - 4}" y="{y0}" text-anchor="end">{_fmt(ys[0])}</text>')
    out.append(f'<text x="{x0 - 4}" y="{y1 + 8}" text-anchor="end">{_fmt(ys[-1])}</text>')
    out.append(
        f'<text x="14" y="{(y0 + y1) / 2}" transform="rotate(-90 14 {(y0 + y1) / 2})" text-anchor="middle">{_esc(ylabel)}</text>'
    )
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
