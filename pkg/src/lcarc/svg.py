"""SVG rendering of a polyline over a set.  Lossy: coordinates become 12-digit
decimals here and nowhere else."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Tuple

from .geometry import RationalBox

SIZE = 512


def _num(q: Fraction) -> str:
    return format(float(q), ".12g")


def render(vertices: Sequence[Tuple[Fraction, ...]], frame: RationalBox,
           extra: Sequence[Sequence[Tuple[Fraction, ...]]] = ()) -> str:
    """Draw the polyline (and optional background polylines) inside ``frame``,
    y axis pointing up."""
    w = frame.hi[0] - frame.lo[0]
    h = frame.hi[1] - frame.lo[1] if len(frame.lo) > 1 else Fraction(1)
    scale = Fraction(SIZE) / max(w, h)

    def xy(p):
        x = (p[0] - frame.lo[0]) * scale
        y = (frame.hi[1] - p[1]) * scale if len(p) > 1 else Fraction(SIZE, 2)
        return f"{_num(x)},{_num(y)}"

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        "<!-- decimal coordinates are rounded to 12 digits; exact values are in the JSON -->",
    ]
    for poly in extra:
        pts = " ".join(xy(p) for p in poly)
        lines.append(f'<polyline points="{pts}" fill="none" stroke="#bbbbbb" stroke-width="6"/>')
    pts = " ".join(xy(p) for p in vertices)
    lines.append(f'<polyline points="{pts}" fill="none" stroke="#c0392b" stroke-width="2"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
