"""Minimal dependency-free SVG emitters for line plots and scale heatmaps."""

from __future__ import annotations

import numpy as np

__all__ = ["line_plot", "heatmap"]

_MARGIN = 48.0
_PALETTE = ["#1f6fb2", "#d95f02", "#2a9d54", "#7b4fa6", "#c03a55"]


def _ticks(lo: float, hi: float, n: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, n)
    return [float(v) for v in raw]


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_plot(path, x, series, title: str = "", width: int = 720, height: int = 360,
              labels=None):
    """Write a multi-series line plot; `series` is a list of y-arrays over x."""
    x = np.asarray(x, dtype=float)
    series = [np.asarray(s, dtype=float) for s in series]
    labels = labels or [f"series {i}" for i in range(len(series))]
    ymin = min(float(np.min(s)) for s in series)
    ymax = max(float(np.max(s)) for s in series)
    if ymax == ymin:
        ymax = ymin + 1.0
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad
    w_in, h_in = width - 2 * _MARGIN, height - 2 * _MARGIN

    def sx(v):
        return _MARGIN + (v - x[0]) / (x[-1] - x[0]) * w_in

    def sy(v):
        return height - _MARGIN - (v - ymin) / (ymax - ymin) * h_in

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
    ]
    for tv in _ticks(float(x[0]), float(x[-1])):
        parts.append(f'<line x1="{sx(tv):.1f}" y1="{height-_MARGIN:.1f}" '
                     f'x2="{sx(tv):.1f}" y2="{height-_MARGIN+4:.1f}" stroke="black"/>')
        parts.append(f'<text x="{sx(tv):.1f}" y="{height-_MARGIN+16:.1f}" '
                     f'text-anchor="middle">{_fmt(tv)}</text>')
    for tv in _ticks(ymin, ymax):
        parts.append(f'<line x1="{_MARGIN-4:.1f}" y1="{sy(tv):.1f}" '
                     f'x2="{_MARGIN:.1f}" y2="{sy(tv):.1f}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN-6:.1f}" y="{sy(tv)+3:.1f}" '
                     f'text-anchor="end">{_fmt(tv)}</text>')
    parts.append(f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{w_in}" height="{h_in}" '
                 'fill="none" stroke="black"/>')
    # decimate long series so files stay diffable
    step = max(1, x.size // 2000)
    for i, s in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{sx(xv):.2f},{sy(yv):.2f}" for xv, yv in zip(x[::step], s[::step]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        parts.append(f'<text x="{width-_MARGIN:.1f}" y="{_MARGIN+14*(i+1):.1f}" '
                     f'text-anchor="end" fill="{color}">{labels[i]}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))


def _color(v: float) -> str:
    """Map [0, 1] to a dark-blue -> yellow ramp."""
    v = min(max(v, 0.0), 1.0)
    r = int(255 * min(1.0, 2.0 * v))
    g = int(255 * v)
    b = int(96 * (1.0 - v) + 40)
    return f"rgb({r},{g},{b})"


def heatmap(path, times, scales, mags, title: str = "", width: int = 760, height: int = 420,
            max_cells: tuple = (256, 128)):
    """Magnitude heatmap over (time, log-scale); large grids are block-averaged."""
    times = np.asarray(times, dtype=float)
    scales = np.asarray(scales, dtype=float)
    mags = np.asarray(mags, dtype=float)
    ct, cs = max_cells
    ti = np.linspace(0, times.size - 1, min(ct, times.size) + 1).astype(int)
    si = np.linspace(0, scales.size - 1, min(cs, scales.size) + 1).astype(int)
    peak = float(np.max(mags)) or 1.0
    w_in, h_in = width - 2 * _MARGIN, height - 2 * _MARGIN
    log_s = np.log(scales)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width/2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>',
    ]

    def sx(i):
        return _MARGIN + (times[i] - times[0]) / (times[-1] - times[0]) * w_in

    def sy(j):
        return height - _MARGIN - (log_s[j] - log_s[0]) / (log_s[-1] - log_s[0]) * h_in

    for a0, a1 in zip(ti[:-1], ti[1:]):
        for b0, b1 in zip(si[:-1], si[1:]):
            block = float(np.mean(mags[a0:a1 + 1, b0:b1 + 1]))
            x0, x1 = sx(a0), sx(a1)
            y1v, y0v = sy(b0), sy(b1)
            parts.append(
                f'<rect x="{x0:.1f}" y="{y0v:.1f}" width="{x1-x0:.2f}" '
                f'height="{y1v-y0v:.2f}" fill="{_color(block/peak)}"/>'
            )
    for j in (0, scales.size - 1):
        parts.append(f'<text x="{_MARGIN-6:.1f}" y="{sy(j)+3:.1f}" '
                     f'text-anchor="end">{_fmt(float(scales[j]))}</text>')
    for frac in (0.0, 0.5, 1.0):
        i = int(frac * (times.size - 1))
        parts.append(f'<text x="{sx(i):.1f}" y="{height-_MARGIN+16:.1f}" '
                     f'text-anchor="middle">{_fmt(float(times[i]))}</text>')
    parts.append(f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{w_in}" height="{h_in}" '
                 'fill="none" stroke="black"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts))
