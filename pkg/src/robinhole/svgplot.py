"""Minimal hand-rolled SVG log-log plots (one polyline per series)."""
from __future__ import annotations

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 40, 50

_COLORS = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2",
]


def _ticks(lo: float, hi: float):
    lo_d, hi_d = int(np.floor(lo)), int(np.ceil(hi))
    return [d for d in range(lo_d, hi_d + 1)]


def loglog_plot(
    path: str,
    x: np.ndarray,
    series: dict,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    annotations: list | None = None,
) -> None:
    """Write a log-log SVG plot with one polyline per series."""
    x = np.asarray(x, dtype=float)
    all_y = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    pos_y = all_y[all_y > 0]
    if len(pos_y) == 0 or np.any(x <= 0):
        raise ValueError("log-log plot needs positive data")
    lx = np.log10(x)
    ylo, yhi = np.log10(pos_y.min()), np.log10(pos_y.max())
    xlo, xhi = lx.min(), lx.max()
    if xhi - xlo < 1e-12:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    padx, pady = 0.05 * (xhi - xlo), 0.08 * (yhi - ylo)
    xlo, xhi = xlo - padx, xhi + padx
    ylo, yhi = ylo - pady, yhi + pady
    pw = WIDTH - MARGIN_L - MARGIN_R
    ph = HEIGHT - MARGIN_T - MARGIN_B

    def sx(v):
        return MARGIN_L + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return MARGIN_T + (yhi - v) / (yhi - ylo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    if title:
        out.append(
            f'<text x="{WIDTH / 2}" y="{MARGIN_T - 14}" text-anchor="middle" '
            f'font-size="15" font-family="sans-serif">{title}</text>'
        )
    for d in _ticks(xlo, xhi):
        if xlo <= d <= xhi:
            out.append(
                f'<line x1="{sx(d):.2f}" y1="{MARGIN_T}" x2="{sx(d):.2f}" '
                f'y2="{MARGIN_T + ph}" stroke="#ddd" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{sx(d):.2f}" y="{MARGIN_T + ph + 18}" text-anchor="middle" '
                f'font-size="12" font-family="sans-serif">1e{d}</text>'
            )
    for d in _ticks(ylo, yhi):
        if ylo <= d <= yhi:
            out.append(
                f'<line x1="{MARGIN_L}" y1="{sy(d):.2f}" x2="{MARGIN_L + pw}" '
                f'y2="{sy(d):.2f}" stroke="#ddd" stroke-width="1"/>'
            )
            out.append(
                f'<text x="{MARGIN_L - 8}" y="{sy(d):.2f}" text-anchor="end" '
                f'dy="4" font-size="12" font-family="sans-serif">1e{d}</text>'
            )
    if xlabel:
        out.append(
            f'<text x="{MARGIN_L + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif">{xlabel}</text>'
        )
    if ylabel:
        out.append(
            f'<text x="18" y="{MARGIN_T + ph / 2}" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif" transform="rotate(-90 18 {MARGIN_T + ph / 2})">{ylabel}</text>'
        )
    for idx, (label, ys) in enumerate(series.items()):
        ys = np.asarray(ys, dtype=float)
        color = _COLORS[idx % len(_COLORS)]
        keep = ys > 0
        pts = " ".join(
            f"{sx(np.log10(xv)):.2f},{sy(np.log10(yv)):.2f}"
            for xv, yv in zip(x[keep], ys[keep])
        )
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        for xv, yv in zip(x[keep], ys[keep]):
            out.append(
                f'<circle cx="{sx(np.log10(xv)):.2f}" cy="{sy(np.log10(yv)):.2f}" '
                f'r="2.6" fill="{color}"/>'
            )
        out.append(
            f'<text x="{MARGIN_L + pw - 6}" y="{MARGIN_T + 16 + 15 * idx}" text-anchor="end" '
            f'font-size="12" font-family="sans-serif" fill="{color}">{label}</text>'
        )
    for j, note in enumerate(annotations or []):
        out.append(
            f'<text x="{MARGIN_L + 8}" y="{MARGIN_T + 16 + 14 * j}" font-size="12" '
            f'font-family="sans-serif" fill="#222">{note}</text>'
        )
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
