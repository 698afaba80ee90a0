"""Bare-bones log-log SVG plots of convergence data.

The root element records the axis mapping (``data-log-x0`` ... and the plot
box) so that coordinates in the file can be mapped back to data values.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

__all__ = ["loglog_svg"]

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


def _decades(lo: float, hi: float):
    lo, hi = math.floor(lo), math.ceil(hi)
    if hi == lo:
        hi = lo + 1
    return lo, hi


def loglog_svg(series: dict, guides=(), title: str = "", xlabel: str = "", ylabel: str = "",
               width: int = 520, height: int = 380) -> str:
    """Render ``{label: (xs, ys)}`` as markers plus polylines on log axes.

    ``guides`` is a sequence of orders ``p``; each becomes a dashed line of
    slope ``p`` anchored at the first point of the first series, shifted
    down by a factor of 2 so that it does not hide the data.
    """
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys) if x > 0 and y > 0]
    if not pts:
        raise ValueError("nothing to plot")
    lx0, lx1 = _decades(min(math.log10(x) for x, _ in pts), max(math.log10(x) for x, _ in pts))
    ly0, ly1 = _decades(min(math.log10(y) for _, y in pts), max(math.log10(y) for _, y in pts))
    left, top, right, bottom = 70, 30, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (math.log10(x) - lx0) / (lx1 - lx0) * pw

    def py(y):
        return top + (ly1 - math.log10(y)) / (ly1 - ly0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'data-log-x0="{lx0}" data-log-x1="{lx1}" data-log-y0="{ly0}" data-log-y1="{ly1}" '
        f'data-plot-left="{left}" data-plot-top="{top}" data-plot-width="{pw}" data-plot-height="{ph}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for d in range(lx0, lx1 + 1):
        x = left + (d - lx0) / (lx1 - lx0) * pw
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" font-size="11" text-anchor="middle">1e{d}</text>')
    for d in range(ly0, ly1 + 1):
        y = top + (ly1 - d) / (ly1 - ly0) * ph
        out.append(f'<text x="{left - 6}" y="{y + 4:.2f}" font-size="11" text-anchor="end">1e{d}</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="18" font-size="13" text-anchor="middle">{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2}" y="{height - 10}" font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="14" y="{top + ph / 2}" font-size="12" text-anchor="middle" '
                   f'transform="rotate(-90 14 {top + ph / 2})">{escape(ylabel)}</text>')

    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        good = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
        coords = " ".join(f"{px(x):.3f},{py(y):.3f}" for x, y in good)
        out.append(f'<polyline class="series" data-label="{escape(label)}" points="{coords}" '
                   f'fill="none" stroke="{color}"/>')
        for x, y in good:
            out.append(f'<circle cx="{px(x):.3f}" cy="{py(y):.3f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{left + pw - 5}" y="{top + 16 + 14 * i}" font-size="11" '
                   f'text-anchor="end" fill="{color}">{escape(label)}</text>')

    first = next(iter(series.values()))
    x_a, y_a = first[0][0], first[1][0] / 2
    x_b = first[0][-1]
    for order in guides:
        y_b = y_a * (x_b / x_a) ** order
        out.append(
            f'<polyline class="guide" data-order="{order!r}" '
            f'points="{px(x_a):.6f},{py(y_a):.6f} {px(x_b):.6f},{py(y_b):.6f}" '
            f'fill="none" stroke="gray" stroke-dasharray="5,4"/>'
        )
        out.append(f'<text x="{px(x_b):.2f}" y="{py(y_b) - 4:.2f}" font-size="10" fill="gray">order {order:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
