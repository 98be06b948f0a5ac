"""Bare-bones SVG line plots (polylines and axes only)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]


def line_plot(series, title="", xlabel="", ylabel="", width=640, height=400) -> str:
    """Render ``{label: (x, y)}`` as an SVG document string."""
    margin = 60
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pw, ph = width - 2 * margin, height - 2 * margin

    def px(x):
        return margin + (x - x0) / (x1 - x0) * pw

    def py(y):
        return height - margin - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{width / 2}" y="{margin / 2}" text-anchor="middle">{escape(title)}</text>',
        f'<text x="{width / 2}" y="{height - 15}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="15" y="{height / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {height / 2})">{escape(ylabel)}</text>',
    ]
    for v in (x0, x1):
        out.append(f'<text x="{px(v):.1f}" y="{height - margin + 16}" text-anchor="middle">{v:.4g}</text>')
    for v in (y0, y1):
        out.append(f'<text x="{margin - 6}" y="{py(v) + 4:.1f}" text-anchor="end">{v:.4g}</text>')
    for k, (label, (x, y)) in enumerate(series.items()):
        colour = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
        out.append(
            f'<text x="{width - margin + 4}" y="{margin + 14 * k}" fill="{colour}">{escape(str(label))}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
