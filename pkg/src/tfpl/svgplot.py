"""Minimal native SVG line plots for run artifacts.

No plotting dependency: the CLI needs a handful of deterministic line
charts (residual history, steady profile, reflection minima) and nothing
else.  Output is stable byte-for-byte for identical inputs: coordinates
are formatted with fixed precision and nothing timestamped is embedded.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["line_plot"]

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_W, _H = 720, 440
_ML, _MR, _MT, _MB = 72, 24, 42, 52     # margins


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, k: int = 5):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (k - 1) for i in range(k)]


def line_plot(path, xs, series, title="", xlabel="", ylabel="",
              ylog: bool = False):
    """Write a line chart; ``series`` is a list of (label, ys) pairs."""
    xs = np.asarray(xs, dtype=float)
    ys_all = [np.asarray(ys, dtype=float) for _, ys in series]

    if ylog:
        floor = 1e-300
        pos = np.concatenate([y[y > 0] for y in ys_all]) if ys_all else np.array([1.0])
        floor = float(pos.min()) * 0.5 if pos.size else 1e-16
        tf = lambda y: np.log10(np.maximum(y, floor))
    else:
        tf = lambda y: y

    tys = [tf(y) for y in ys_all]
    ylo = min((float(np.min(y)) for y in tys if y.size), default=0.0)
    yhi = max((float(np.max(y)) for y in tys if y.size), default=1.0)
    if yhi <= ylo:
        ylo, yhi = ylo - 0.5, ylo + 0.5
    pad = 0.06 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    xlo = float(xs.min()) if xs.size else 0.0
    xhi = float(xs.max()) if xs.size else 1.0
    if xhi <= xlo:
        xhi = xlo + 1.0

    pw = _W - _ML - _MR
    ph = _H - _MT - _MB

    def X(x):
        return _ML + (x - xlo) / (xhi - xlo) * pw

    def Y(y):
        return _MT + (yhi - y) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
        f'font-size="15">{title}</text>',
    ]
    # frame + grid + ticks
    for ty in _ticks(ylo, yhi):
        y = Y(ty)
        out.append(f'<line x1="{_ML}" y1="{y:.2f}" x2="{_W - _MR}" y2="{y:.2f}" '
                   f'stroke="#dddddd"/>')
        label = _fmt(10 ** ty) if ylog else _fmt(ty)
        out.append(f'<text x="{_ML - 6}" y="{y + 4:.2f}" text-anchor="end">'
                   f'{label}</text>')
    for tx in _ticks(xlo, xhi):
        x = X(tx)
        out.append(f'<line x1="{x:.2f}" y1="{_MT}" x2="{x:.2f}" '
                   f'y2="{_H - _MB}" stroke="#eeeeee"/>')
        out.append(f'<text x="{x:.2f}" y="{_H - _MB + 18}" text-anchor="middle">'
                   f'{_fmt(tx)}</text>')
    out.append(f'<rect x="{_ML}" y="{_MT}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="#333333"/>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 14}" text-anchor="middle">'
               f'{xlabel}</text>')
    out.append(f'<text x="18" y="{_H / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_H / 2:.1f})">{ylabel}</text>')

    for i, ((label, _), ty) in enumerate(zip(series, tys)):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{X(x):.2f},{Y(v):.2f}" for x, v in zip(xs, ty)
                       if math.isfinite(v))
        if pts:
            out.append(f'<polyline points="{pts}" fill="none" '
                       f'stroke="{color}" stroke-width="1.6"/>')
        ly = _MT + 16 + 16 * i
        out.append(f'<line x1="{_W - _MR - 120}" y1="{ly - 4}" '
                   f'x2="{_W - _MR - 96}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{_W - _MR - 90}" y="{ly}">{label}</text>')

    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
