"""Minimal self-contained SVG writers (scatter plot and heatmap).

Both figures use a fixed ``800 x 800`` viewBox and contain no external
references, scripts or fonts beyond the generic ``sans-serif`` family.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

SIZE = 800
MARGIN = 70
PLOT = SIZE - 2 * MARGIN
HEAT_MAX_CELLS = 128


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>',
        f'<text x="{SIZE / 2:.1f}" y="40" text-anchor="middle" font-family="sans-serif" '
        f'font-size="20">{escape(title)}</text>',
    ]


def _axes(xlabel: str, ylabel: str) -> list[str]:
    out = [f'<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" '
           f'stroke="#000000" stroke-width="1"/>']
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = MARGIN + t * PLOT
        y = MARGIN + (1.0 - t) * PLOT
        out.append(f'<text x="{x:.1f}" y="{SIZE - MARGIN + 22}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="14">{t:g}</text>')
        out.append(f'<text x="{MARGIN - 10}" y="{y + 5:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="14">{t:g}</text>')
    out.append(f'<text x="{SIZE / 2:.1f}" y="{SIZE - 20}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="16">{escape(xlabel)}</text>')
    out.append(f'<text x="22" y="{SIZE / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="16" transform="rotate(-90 22 {SIZE / 2:.1f})">{escape(ylabel)}</text>')
    return out


def scatter_svg(u: np.ndarray, title: str = "pseudo-observations",
                xlabel: str = "u1", ylabel: str = "u2") -> str:
    """Scatter plot of points in the unit square."""
    u = np.asarray(u, dtype=float)
    parts = _header(title) + _axes(xlabel, ylabel)
    parts.append('<g fill="#1f4e99" fill-opacity="0.45" stroke="none">')
    for a, b in u[:, :2]:
        parts.append(f'<circle cx="{MARGIN + a * PLOT:.2f}" cy="{MARGIN + (1.0 - b) * PLOT:.2f}" r="2"/>')
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _diverging(t: float) -> str:
    """Blue (t=0) to white (t=0.5) to red (t=1)."""
    t = min(1.0, max(0.0, t))
    if t < 0.5:
        s = t / 0.5
        r, g, b = 33 + s * (255 - 33), 102 + s * (255 - 102), 172 + s * (255 - 172)
    else:
        s = (t - 0.5) / 0.5
        r, g, b = 255 + s * (178 - 255), 255 + s * (24 - 255), 255 + s * (43 - 255)
    return f"#{int(round(r)):02x}{int(round(g)):02x}{int(round(b)):02x}"


def heatmap_svg(values: np.ndarray, title: str = "density", center: float = 1.0) -> str:
    """Heatmap of ``values[i, j]`` with ``i`` along u1 and ``j`` along u2.

    Grids finer than 128 cells per side are block-averaged for display.
    The colour scale is symmetric about ``center``.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    if n > HEAT_MAX_CELLS:
        f = int(np.ceil(n / HEAT_MAX_CELLS))
        m = n // f
        v = v[:m * f, :m * f].reshape(m, f, m, f).mean(axis=(1, 3))
        n = m
    span = float(np.max(np.abs(v - center))) or 1.0
    cell = PLOT / n
    parts = _header(title) + _axes("u1", "u2")
    parts.append('<g stroke="none">')
    for i in range(n):
        for j in range(n):
            color = _diverging(0.5 + 0.5 * (v[i, j] - center) / span)
            x = MARGIN + i * cell
            y = MARGIN + (n - 1 - j) * cell
            parts.append(f'<rect x="{x:.3f}" y="{y:.3f}" width="{cell + 0.05:.3f}" '
                         f'height="{cell + 0.05:.3f}" fill="{color}"/>')
    parts.append("</g>")
    parts.append(f'<text x="{SIZE - MARGIN}" y="{MARGIN - 12}" text-anchor="end" '
                 f'font-family="sans-serif" font-size="13">range [{center - span:.4g}, '
                 f'{center + span:.4g}]</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
