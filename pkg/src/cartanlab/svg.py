"""Static SVG figures built from lines, polylines and text."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .lyapunov import ChamberDiagram
from .toral import FurstenbergProfile

SIZE = 400
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _doc(body: list[str], width: int = SIZE, height: int = SIZE) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, f'<rect width="{width}" height="{height}" fill="white"/>', *body, "</svg>"]) + "\n"


def _text(x: float, y: float, s: str, size: int = 12, anchor: str = "middle") -> str:
    return f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" text-anchor="{anchor}">{escape(s)}</text>'


def chamber_svg(diagram: ChamberDiagram) -> str:
    """Kernel lines through the origin with each chamber's sign label (rank 2).

    Higher rank gets a table of realised sign vectors instead.
    """
    c = SIZE / 2
    body = []
    if diagram.family.rank == 2:
        R = 0.45 * SIZE
        for k, v in enumerate(diagram.kernel_directions):
            x, y = v[0] * R, v[1] * R
            body.append(
                f'<line x1="{c - x:.2f}" y1="{c + y:.2f}" x2="{c + x:.2f}" y2="{c - y:.2f}" '
                f'stroke="{COLORS[k % len(COLORS)]}" stroke-width="2"/>'
            )
        for ch in diagram.chambers:
            p = ch.point / max(1e-12, math.hypot(*ch.point))
            body.append(_text(c + 0.33 * SIZE * p[0], c - 0.33 * SIZE * p[1] + 4, ch.label()))
    else:
        for k, ch in enumerate(diagram.chambers):
            body.append(_text(20, 40 + 18 * k, ch.label(), anchor="start"))
    body.append(_text(c, 18, f"{len(diagram)} chambers", 14))
    return _doc(body)


def _polyline(xs: Sequence[float], ys: Sequence[float], box, color: str) -> str:
    x0, x1, y0, y1 = box
    pad = 40
    sx = (SIZE - 2 * pad) / max(x1 - x0, 1e-12)
    sy = (SIZE - 2 * pad) / max(y1 - y0, 1e-12)
    pts = " ".join(f"{pad + (x - x0) * sx:.2f},{SIZE - pad - (y - y0) * sy:.2f}" for x, y in zip(xs, ys))
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'


def _axes(xlabel: str, ylabel: str, box) -> list[str]:
    pad = 40
    x0, x1, y0, y1 = box
    return [
        f'<line x1="{pad}" y1="{SIZE - pad}" x2="{SIZE - pad}" y2="{SIZE - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{SIZE - pad}" stroke="black"/>',
        _text(SIZE / 2, SIZE - 8, xlabel),
        _text(12, SIZE / 2, ylabel, anchor="start"),
        _text(pad, SIZE - pad + 14, f"{x0:.3g}"),
        _text(SIZE - pad, SIZE - pad + 14, f"{x1:.3g}"),
        _text(pad - 4, SIZE - pad, f"{y0:.3g}", anchor="end"),
        _text(pad - 4, pad + 4, f"{y1:.3g}", anchor="end"),
    ]


def ratio_svg(profile: FurstenbergProfile) -> str:
    """Consecutive ratio s_{k+1}/s_k against log10 s_k."""
    xs = [math.log10(s) for s in profile.products[:-1]]
    ys = profile.ratios
    box = (0.0, max(xs), 1.0, max(ys))
    body = _axes("log10 s_k", "ratio", box) + [_polyline(xs, ys, box, COLORS[0])]
    body.append(_text(SIZE / 2, 18, f"x{profile.a} x{profile.b}, N = {profile.n_max}", 14))
    return _doc(body)


def slope_svg(details: dict) -> str:
    """Mean -log mu(B_n(x, r)) against n, one polyline per radius."""
    series = [
        (r, d["usable_steps"], d["mean_neg_log_measure"]) for r, d in sorted(details["radii"].items()) if d["usable_steps"]
    ]
    if not series:
        return _doc([_text(SIZE / 2, SIZE / 2, "no usable radius")])
    xmax = max(max(n) for _, n, _ in series)
    ymin = min(min(h) for _, _, h in series)
    ymax = max(max(h) for _, _, h in series)
    box = (1.0, float(max(xmax, 2)), ymin, ymax)
    body = _axes("n", "-log mu", box)
    for k, (r, ns, hs) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        body.append(_polyline(ns, hs, box, color))
        body.append(f'<text x="{SIZE - 110}" y="{60 + 16 * k}" font-size="12" fill="{color}">r = {r}</text>')
    return _doc(body)
