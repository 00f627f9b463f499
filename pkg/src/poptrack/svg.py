"""Minimal SVG writer: one <polyline> per series, two stacked panels.

Written by hand so the output is plain, stable XML that diffs cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Sequence
from xml.sax.saxutils import quoteattr

import numpy as np

PALETTE = ("#444444", "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
MAX_POINTS = 4000


@dataclass
class Series:
    label: str
    xs: np.ndarray
    ys: np.ndarray
    color: str | None = None
    dashed: bool = False


def _decimate(xs: np.ndarray, ys: np.ndarray, max_points: int = MAX_POINTS) -> tuple[np.ndarray, np.ndarray]:
    n = len(xs)
    if n <= max_points:
        return xs, ys
    idx = np.unique(np.concatenate([np.linspace(0, n - 1, max_points).astype(int), [n - 1]]))
    return xs[idx], ys[idx]


def _panel(series: Sequence[Series], x0: float, y0: float, w: float, h: float, title: str, equal: bool) -> list[str]:
    all_x = np.concatenate([s.xs for s in series])
    all_y = np.concatenate([s.ys for s in series])
    xmin, xmax = float(all_x.min()), float(all_x.max())
    ymin, ymax = float(all_y.min()), float(all_y.max())
    if xmax - xmin < 1e-9:
        xmin, xmax = xmin - 1.0, xmax + 1.0
    if ymax - ymin < 1e-9:
        ymin, ymax = ymin - 1.0, ymax + 1.0
    pad = 10.0
    sx = (w - 2 * pad) / (xmax - xmin)
    sy = (h - 2 * pad) / (ymax - ymin)
    if equal:
        sx = sy = min(sx, sy)

    out = [
        f'<g class="panel">',
        f'<rect x="{x0:.1f}" y="{y0:.1f}" width="{w:.1f}" height="{h:.1f}" fill="none" stroke="#cccccc"/>',
        f'<text x="{x0 + 6:.1f}" y="{y0 + 14:.1f}" font-size="12" font-family="sans-serif">{_escape(title)}</text>',
    ]
    for i, s in enumerate(series):
        xs, ys = _decimate(np.asarray(s.xs, float), np.asarray(s.ys, float))
        px = x0 + pad + (xs - xmin) * sx
        py = y0 + h - pad - (ys - ymin) * sy
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        color = s.color or PALETTE[i % len(PALETTE)]
        dash = ' stroke-dasharray="4,3"' if s.dashed else ""
        out.append(
            f"<polyline data-label={quoteattr(s.label)} fill=\"none\" stroke=\"{color}\" "
            f'stroke-width="1.2"{dash} points="{points}"/>'
        )
    return out + ["</g>"]


def _legend(series: Sequence[Series], x: float, y: float) -> list[str]:
    out = []
    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        yy = y + 16 * i
        out.append(f'<rect x="{x:.1f}" y="{yy - 9:.1f}" width="12" height="3" fill="{color}"/>')
        out.append(f'<text x="{x + 16:.1f}" y="{yy - 5:.1f}" font-size="11" font-family="sans-serif">{_escape(s.label)}</text>')
    return out


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(
    filename: str | FsPath,
    top: Sequence[Series],
    bottom: Sequence[Series] = (),
    top_title: str = "",
    bottom_title: str = "",
    width: int = 800,
) -> None:
    """Write a map panel (equal aspect) and an optional time-series panel below it."""
    top_h = 480
    bottom_h = 200 if bottom else 0
    height = top_h + bottom_h + 20
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    lines += _panel(top, 5, 5, width - 10, top_h, top_title, equal=True)
    lines += _legend(top, width - 180, 30)
    if bottom:
        lines += _panel(bottom, 5, top_h + 15, width - 10, bottom_h, bottom_title, equal=False)
    lines.append("</svg>")
    FsPath(filename).write_text("\n".join(lines) + "\n")
