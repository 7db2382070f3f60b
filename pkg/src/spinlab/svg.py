"""Minimal self-contained SVG line plots."""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, n)


def _panel(x, series, labels, title, ylabel, box, xlabel):
    x0, y0, w, h = box
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(s, dtype=float) for s in series]
    xmin, xmax = float(x.min()), float(x.max())
    ymin = min(float(s.min()) for s in ys)
    ymax = max(float(s.max()) for s in ys)
    if ymax - ymin < 1e-12:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad
    if xmax <= xmin:
        xmax = xmin + 1.0

    def px(v):
        return x0 + (v - xmin) / (xmax - xmin) * w

    def py(v):
        return y0 + h - (v - ymin) / (ymax - ymin) * h

    out = [f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#000"/>']
    out.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 - 8}" text-anchor="middle" font-size="13">{escape(title)}</text>')
    for tv in _ticks(xmin, xmax):
        out.append(f'<line x1="{px(tv):.2f}" y1="{y0 + h}" x2="{px(tv):.2f}" y2="{y0 + h + 4}" stroke="#000"/>')
        out.append(f'<text x="{px(tv):.2f}" y="{y0 + h + 16}" text-anchor="middle" font-size="10">{tv:.3g}</text>')
    for tv in _ticks(ymin, ymax):
        out.append(f'<line x1="{x0 - 4}" y1="{py(tv):.2f}" x2="{x0}" y2="{py(tv):.2f}" stroke="#000"/>')
        out.append(f'<text x="{x0 - 6}" y="{py(tv) + 3:.2f}" text-anchor="end" font-size="10">{tv:.3g}</text>')
    out.append(
        f'<text x="{x0 - 42}" y="{y0 + h / 2:.1f}" font-size="11" text-anchor="middle" '
        f'transform="rotate(-90 {x0 - 42} {y0 + h / 2:.1f})">{escape(ylabel)}</text>'
    )
    if xlabel:
        out.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 + h + 32}" text-anchor="middle" font-size="11">{escape(xlabel)}</text>')
    for k, (s, label) in enumerate(zip(ys, labels)):
        colour = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, s))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        out.append(f'<text x="{x0 + w + 8}" y="{y0 + 14 + 14 * k}" font-size="10" fill="{colour}">{escape(label)}</text>')
    return out


def line_plot_svg(
    panels: Sequence[dict],
    *,
    width: int = 640,
    panel_height: int = 200,
    xlabel: str = "t",
) -> str:
    """Stack of panels sharing an x axis.

    Each panel is ``{"x": ..., "series": [...], "labels": [...], "title": ..., "ylabel": ...}``.
    """
    left, right, top, gap = 70, 90, 30, 60
    height = top + len(panels) * (panel_height + gap)
    body = []
    for i, p in enumerate(panels):
        box = (left, top + i * (panel_height + gap), width - left - right, panel_height)
        last = i == len(panels) - 1
        body += _panel(p["x"], p["series"], p.get("labels", [""] * len(p["series"])), p.get("title", ""), p.get("ylabel", ""), box, xlabel if last else "")
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">'
    )
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="#fff"/>', *body, "</svg>"]) + "\n"
