"""Minimal deterministic SVG line/point plots."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from .errors import DomainError

__all__ = ["FigureArtifact", "emit_svg", "PLOTTABLE"]

PLOTTABLE = ("spectrum-vs-N", "trajectory")
WIDTH, HEIGHT, MARGIN = 640, 480, 60
PALETTE = ("#1f4e9c", "#b0302a", "#2f7d32", "#7a3fa0", "#c77700", "#00838f", "#6d4c41", "#455a64")


@dataclass
class FigureArtifact:
    """``series`` is a list of ``{"name", "points": [(x, y), ...], "style"}``
    with style ``"line"`` or ``"points"``."""

    kind: str
    series: list
    provenance: dict
    title: str = ""
    xlabel: str = "x"
    ylabel: str = "y"
    equal_aspect: bool = False
    extra: dict = field(default_factory=dict)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


def emit_svg(artifact: FigureArtifact) -> str:
    """Render ``artifact`` as a standalone SVG document (same input, same bytes)."""
    if artifact.kind not in PLOTTABLE:
        raise DomainError(f"artifact kind {artifact.kind!r} cannot be plotted")
    pts = [p for s in artifact.series for p in s["points"]]
    if not pts:
        raise DomainError("nothing to plot: empty dataset")
    xs = [float(p[0]) for p in pts]
    ys = [float(p[1]) for p in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    sx, sy = pw / (x1 - x0), ph / (y1 - y0)
    if artifact.equal_aspect:
        sx = sy = min(sx, sy)
    cx = MARGIN + 0.5 * (pw - sx * (x1 - x0))
    cy = MARGIN + 0.5 * (ph - sy * (y1 - y0))

    def X(v):
        return cx + (v - x0) * sx

    def Y(v):
        return HEIGHT - (cy + (v - y0) * sy)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        "<metadata>" + escape(json.dumps(artifact.provenance, sort_keys=True)) + "</metadata>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<text x="{_fmt(X(t))}" y="{HEIGHT - MARGIN + 16}" font-size="11" '
                   f'text-anchor="middle">{_fmt(t)}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<text x="{MARGIN - 6}" y="{_fmt(Y(t) + 4)}" font-size="11" '
                   f'text-anchor="end">{_fmt(t)}</text>')
    out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" font-size="13" '
               f'text-anchor="middle">{escape(artifact.xlabel)}</text>')
    out.append(f'<text x="15" y="{HEIGHT / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(artifact.ylabel)}</text>')
    if artifact.title:
        out.append(f'<text x="{WIDTH / 2}" y="30" font-size="15" '
                   f'text-anchor="middle">{escape(artifact.title)}</text>')
    for i, s in enumerate(artifact.series):
        colour = PALETTE[i % len(PALETTE)]
        coords = [(X(float(a)), Y(float(b))) for a, b in s["points"]]
        if not coords:
            continue
        if s.get("style", "line") == "points":
            for a, b in coords:
                out.append(f'<circle cx="{_fmt(a)}" cy="{_fmt(b)}" r="1.6" fill="{colour}"/>')
        else:
            path = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in coords)
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.2" '
                       f'points="{path}"><title>{escape(str(s.get("name", "")))}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
