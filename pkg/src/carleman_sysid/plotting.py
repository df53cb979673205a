"""Static SVG line plots: polylines, axes, tick labels and a legend."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]
W, H = 640, 420
L, R, T, B = 70, 20, 40, 55


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def line_plot(path, series, title="", xlabel="", ylabel="", logy=False, shade=None):
    """Write an SVG with one polyline per entry of ``series``.

    ``series`` maps a legend label to ``(x, y)``.  Non-finite points (and
    non-positive ones when ``logy``) break the polyline.  ``shade`` is an
    optional ``(x0, x1)`` span drawn in grey, e.g. to mark times outside a
    certified horizon.
    """
    data = {}
    for name, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logy:
            ok &= y > 0
            y = np.where(ok, np.log10(np.where(ok, y, 1.0)), np.nan)
        data[name] = (x, np.where(ok, y, np.nan))
    xs = np.concatenate([x[np.isfinite(y)] for x, y in data.values()] or [np.zeros(1)])
    ys = np.concatenate([y[np.isfinite(y)] for _, y in data.values()] or [np.zeros(1)])
    if xs.size == 0:
        xs, ys = np.zeros(1), np.zeros(1)
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return L + (v - x0) / (x1 - x0) * (W - L - R)

    def py(v):
        return H - B - (v - y0) / (y1 - y0) * (H - T - B)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>']
    if shade is not None:
        a, b = max(shade[0], x0), min(shade[1], x1)
        if b > a:
            out.append(f'<rect x="{px(a):.2f}" y="{T}" width="{px(b) - px(a):.2f}" '
                       f'height="{H - T - B}" fill="#eeeeee"/>')
    out.append(f'<line x1="{L}" y1="{H - B}" x2="{W - R}" y2="{H - B}" stroke="black"/>')
    out.append(f'<line x1="{L}" y1="{T}" x2="{L}" y2="{H - B}" stroke="black"/>')
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{px(v):.2f}" y1="{H - B}" x2="{px(v):.2f}" y2="{H - B + 5}" stroke="black"/>')
        out.append(f'<text x="{px(v):.2f}" y="{H - B + 18}" text-anchor="middle">{v:g}</text>')
    for v in _ticks(y0, y1):
        label = f"1e{v:g}" if logy else f"{v:.3g}"
        out.append(f'<line x1="{L - 5}" y1="{py(v):.2f}" x2="{L}" y2="{py(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{L - 8}" y="{py(v) + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{(L + W - R) / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{(T + H - B) / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(T + H - B) / 2})">{escape(ylabel)}</text>')

    for k, (name, (x, y)) in enumerate(data.items()):
        color = _COLORS[k % len(_COLORS)]
        segment = []
        for xv, yv in zip(x, y):
            if np.isfinite(yv):
                segment.append(f"{px(xv):.2f},{py(yv):.2f}")
                continue
            if segment:
                out.append(_polyline(segment, color))
            segment = []
        if segment:
            out.append(_polyline(segment, color))
        ly = T + 14 + 16 * k
        out.append(f'<line x1="{W - R - 150}" y1="{ly}" x2="{W - R - 125}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{W - R - 120}" y="{ly + 4}">{escape(name)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _polyline(points, color):
    if len(points) == 1:
        x, y = points[0].split(",")
        return f'<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>'
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{" ".join(points)}"/>'
