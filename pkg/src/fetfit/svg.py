"""Minimal static SVG line charts for curve overlays.

Fixed 800x600 viewport, linear x axis, linear or log10 y axis, and a
two-entry legend. Deliberately dependency-free; the output is plain text
viewable in any browser.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

WIDTH, HEIGHT = 800, 600
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 80, 25, 40, 55


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    vals = []
    v = start
    while v <= hi + 1e-12 * step:
        vals.append(round(v, 12))
        v += step
    return vals


def _fmt_tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e-3 and abs(v) < 1e4:
        return f"{v:g}"
    return f"{v:.1e}"


def write_overlay_svg(path, x, y_target, y_extracted, title: str,
                      x_label: str, y_label: str, log_y: bool = False):
    """Two-series overlay chart; series are labeled target/extracted."""
    x = np.asarray(x, dtype=float)
    yt = np.asarray(y_target, dtype=float)
    ye = np.asarray(y_extracted, dtype=float)
    if log_y:
        floor = max(min(yt[yt > 0].min(), ye[ye > 0].min()), 1e-300)
        yt = np.log10(np.maximum(yt, floor))
        ye = np.log10(np.maximum(ye, floor))

    x_lo, x_hi = float(x.min()), float(x.max())
    y_lo = float(min(yt.min(), ye.min()))
    y_hi = float(max(yt.max(), ye.max()))
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v):
        return MARGIN_T + (y_hi - v) / (y_hi - y_lo) * plot_h

    def poly(ys):
        return " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, ys))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
    ]
    # axes box
    parts.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="black" stroke-width="1"/>'
    )
    for v in _ticks(x_lo, x_hi):
        if x_lo <= v <= x_hi:
            px = sx(v)
            parts.append(f'<line x1="{px:.2f}" y1="{MARGIN_T + plot_h}" x2="{px:.2f}" '
                         f'y2="{MARGIN_T + plot_h + 5}" stroke="black"/>')
            parts.append(f'<text x="{px:.2f}" y="{MARGIN_T + plot_h + 20}" '
                         f'text-anchor="middle" font-size="12">{_fmt_tick(v)}</text>')
    for v in _ticks(y_lo, y_hi):
        if y_lo <= v <= y_hi:
            py = sy(v)
            label = f"1e{v:g}" if log_y else _fmt_tick(v)
            parts.append(f'<line x1="{MARGIN_L - 5}" y1="{py:.2f}" x2="{MARGIN_L}" '
                         f'y2="{py:.2f}" stroke="black"/>')
            parts.append(f'<text x="{MARGIN_L - 8}" y="{py + 4:.2f}" '
                         f'text-anchor="end" font-size="12">{label}</text>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2:.0f}" y="{HEIGHT - 12}" '
                 f'text-anchor="middle" font-size="13">{x_label}</text>')
    y_axis_label = f"log10({y_label})" if log_y else y_label
    parts.append(f'<text x="18" y="{MARGIN_T + plot_h / 2:.0f}" text-anchor="middle" '
                 f'font-size="13" transform="rotate(-90 18 {MARGIN_T + plot_h / 2:.0f})">'
                 f'{y_axis_label}</text>')
    parts.append(f'<polyline points="{poly(yt)}" fill="none" stroke="#1f77b4" stroke-width="2"/>')
    parts.append(f'<polyline points="{poly(ye)}" fill="none" stroke="#d62728" '
                 'stroke-width="2" stroke-dasharray="6,4"/>')
    # legend
    lx, ly = MARGIN_L + plot_w - 150, MARGIN_T + 14
    parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 30}" y2="{ly}" stroke="#1f77b4" stroke-width="2"/>')
    parts.append(f'<text x="{lx + 36}" y="{ly + 4}" font-size="13">target</text>')
    parts.append(f'<line x1="{lx}" y1="{ly + 20}" x2="{lx + 30}" y2="{ly + 20}" '
                 'stroke="#d62728" stroke-width="2" stroke-dasharray="6,4"/>')
    parts.append(f'<text x="{lx + 36}" y="{ly + 24}" font-size="13">extracted</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
