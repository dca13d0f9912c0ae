"""Minimal static SVG charts.

Hand-rolled rather than delegating to a plotting library so the output is
byte-stable for identical inputs: fixed viewport, repr-formatted
coordinates, no timestamps or generated ids.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

WIDTH, HEIGHT = 640, 360
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 60, 16, 28, 44
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10 ** np.floor(np.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    start = np.ceil(lo / step) * step
    return [float(start + i * step) for i in range(int((hi - start) / step) + 1)]


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH/2}" y="18" text-anchor="middle" font-size="14">{title}</text>',
            f'<text x="{WIDTH/2}" y="{HEIGHT-8}" text-anchor="middle" font-size="12">{xlabel}</text>',
            f'<text x="14" y="{HEIGHT/2}" text-anchor="middle" font-size="12" '
            f'transform="rotate(-90 14 {HEIGHT/2})">{ylabel}</text>',
        ]

    def finish(self, path: str) -> None:
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n")


def _scales(xlo, xhi, ylo, yhi):
    span_x = (xhi - xlo) or 1.0
    span_y = (yhi - ylo) or 1.0
    px = lambda x: MARGIN_L + (x - xlo) / span_x * (WIDTH - MARGIN_L - MARGIN_R)
    py = lambda y: HEIGHT - MARGIN_B - (y - ylo) / span_y * (HEIGHT - MARGIN_T - MARGIN_B)
    return px, py


def _axes(cv: _Canvas, px, py, xticks, yticks, xfmt=_fmt):
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    cv.parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    cv.parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for t in xticks:
        cv.parts.append(
            f'<text x="{_fmt(px(t))}" y="{y0 + 16}" text-anchor="middle" font-size="10">{xfmt(t)}</text>'
        )
    for t in yticks:
        cv.parts.append(
            f'<text x="{x0 - 6}" y="{_fmt(py(t) + 3)}" text-anchor="end" font-size="10">{_fmt(t)}</text>'
        )
        cv.parts.append(
            f'<line x1="{x0}" y1="{_fmt(py(t))}" x2="{x1}" y2="{_fmt(py(t))}" stroke="#dddddd"/>'
        )


def line_chart(
    path: str,
    series: dict[str, tuple[np.ndarray, np.ndarray]],
    title: str,
    xlabel: str,
    ylabel: str,
    bands: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] | None = None,
) -> None:
    """Polyline chart; ``series`` maps label -> (x, y).  ``bands`` optionally
    maps label -> (x, y_lo, y_hi) shaded regions drawn beneath the lines."""
    xs = np.concatenate([np.asarray(x, dtype=float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, dtype=float) for _, y in series.values()])
    if bands:
        for _, lo, hi in bands.values():
            ys = np.concatenate([ys, np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)])
    xlo, xhi = float(xs.min()), float(xs.max())
    ylo, yhi = float(ys.min()), float(ys.max())
    pad = 0.05 * (yhi - ylo or 1.0)
    ylo, yhi = ylo - pad, yhi + pad
    cv = _Canvas(title, xlabel, ylabel)
    px, py = _scales(xlo, xhi, ylo, yhi)
    _axes(cv, px, py, _nice_ticks(xlo, xhi), _nice_ticks(ylo, yhi))
    if bands:
        for i, (label, (x, lo, hi)) in enumerate(sorted(bands.items())):
            color = COLORS[i % len(COLORS)]
            pts_up = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, hi))
            pts_dn = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(reversed(list(x)), reversed(list(lo))))
            cv.parts.append(f'<polygon points="{pts_up} {pts_dn}" fill="{color}" opacity="0.15"/>')
    for i, (label, (x, y)) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(f"{_fmt(px(a))},{_fmt(py(b))}" for a, b in zip(x, y))
        cv.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        cv.parts.append(
            f'<text x="{WIDTH - MARGIN_R - 4}" y="{MARGIN_T + 14 * (i + 1)}" text-anchor="end" '
            f'font-size="11" fill="{color}">{label}</text>'
        )
    cv.finish(path)


def bar_chart(
    path: str,
    labels: list[str],
    groups: dict[str, list[float]],
    title: str,
    ylabel: str,
) -> None:
    """Grouped bars; ``labels`` name the x positions, ``groups`` maps a
    legend entry to one value per label."""
    values = [v for vs in groups.values() for v in vs]
    ylo = min(0.0, min(values))
    yhi = max(values) * 1.08 if values else 1.0
    cv = _Canvas(title, "", ylabel)
    px, py = _scales(-0.5, len(labels) - 0.5, ylo, yhi)
    _axes(cv, px, py, [], _nice_ticks(ylo, yhi))
    n_groups = len(groups)
    slot = 0.8 / max(n_groups, 1)
    for gi, (gname, vals) in enumerate(groups.items()):
        color = COLORS[gi % len(COLORS)]
        for li, v in enumerate(vals):
            x_left = li - 0.4 + gi * slot
            cv.parts.append(
                f'<rect x="{_fmt(px(x_left))}" y="{_fmt(py(max(v, 0.0)))}" '
                f'width="{_fmt(px(x_left + slot * 0.92) - px(x_left))}" '
                f'height="{_fmt(abs(py(v) - py(0.0)))}" fill="{color}"/>'
            )
        cv.parts.append(
            f'<text x="{WIDTH - MARGIN_R - 4}" y="{MARGIN_T + 14 * (gi + 1)}" text-anchor="end" '
            f'font-size="11" fill="{color}">{gname}</text>'
        )
    for li, label in enumerate(labels):
        cv.parts.append(
            f'<text x="{_fmt(px(li))}" y="{HEIGHT - MARGIN_B + 16}" text-anchor="middle" '
            f'font-size="10">{label}</text>'
        )
    cv.finish(path)
