"""Minimal self-contained SVG scatter plots (no plotting dependency)."""

from __future__ import annotations

import math

_W, _H = 640, 480
_ML, _MR, _MT, _MB = 70, 20, 20, 50


def _ticks(lo: float, hi: float):
    """Decade ticks covering [lo, hi] in log10 space."""
    d0 = math.floor(math.log10(lo))
    d1 = math.ceil(math.log10(hi))
    return [10.0**d for d in range(d0, d1 + 1)]


def write_scatter_svg(path, x, y, fit=None, x_label="x", y_label="y",
                      title="") -> None:
    """Log-log scatter with an optional fitted power line.

    ``fit`` is (slope, intercept) of log y = slope*log x + intercept.
    """
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    if len(xs) == 0 or any(v <= 0 for v in xs + ys):
        raise ValueError("log-log scatter needs positive data")
    lo_x, hi_x = min(xs) / 1.5, max(xs) * 1.5
    lo_y, hi_y = min(ys) / 1.5, max(ys) * 1.5

    def sx(v):
        return _ML + (math.log10(v) - math.log10(lo_x)) / (
            math.log10(hi_x) - math.log10(lo_x)) * (_W - _ML - _MR)

    def sy(v):
        return _H - _MB - (math.log10(v) - math.log10(lo_y)) / (
            math.log10(hi_y) - math.log10(lo_y)) * (_H - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
        f'height="{_H - _MT - _MB}" fill="none" stroke="black"/>',
    ]
    for tx in _ticks(lo_x, hi_x):
        if lo_x <= tx <= hi_x:
            px = sx(tx)
            parts.append(f'<line x1="{px:.1f}" y1="{_H - _MB}" x2="{px:.1f}" '
                         f'y2="{_H - _MB + 5}" stroke="black"/>')
            parts.append(f'<text x="{px:.1f}" y="{_H - _MB + 18}" font-size="11" '
                         f'text-anchor="middle">1e{int(math.log10(tx))}</text>')
    for ty in _ticks(lo_y, hi_y):
        if lo_y <= ty <= hi_y:
            py = sy(ty)
            parts.append(f'<line x1="{_ML - 5}" y1="{py:.1f}" x2="{_ML}" '
                         f'y2="{py:.1f}" stroke="black"/>')
            parts.append(f'<text x="{_ML - 8}" y="{py + 4:.1f}" font-size="11" '
                         f'text-anchor="end">1e{int(math.log10(ty))}</text>')
    if fit is not None:
        slope, intercept = fit
        pts = []
        for v in (lo_x * 1.2, hi_x / 1.2):
            w = math.exp(slope * math.log(v) + intercept)
            w = min(max(w, lo_y), hi_y)
            pts.append(f"{sx(v):.1f},{sy(w):.1f}")
        parts.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                     f'stroke="#888" stroke-width="1.5"/>')
        parts.append(f'<text x="{_W - _MR - 6}" y="{_MT + 16}" font-size="12" '
                     f'text-anchor="end">slope {slope:.3f}</text>')
    for px, py in zip(xs, ys):
        parts.append(f'<circle cx="{sx(px):.1f}" cy="{sy(py):.1f}" r="4" '
                     f'fill="#1f77b4"/>')
    parts.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 12}" font-size="13" '
                 f'text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="16" y="{(_MT + _H - _MB) / 2}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{(_MT + _H - _MB) / 2})">{y_label}</text>')
    if title:
        parts.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_MT - 4}" '
                     f'font-size="13" text-anchor="middle">{title}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(parts) + "\n")
