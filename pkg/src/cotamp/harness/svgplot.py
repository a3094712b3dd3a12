"""Minimal hand-rolled SVG charts (line charts and grouped bars).

CSV files remain the canonical experiment output; these are quick visual
summaries with no plotting dependency.
"""

from __future__ import annotations

import math
from pathlib import Path

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 46, 56
PLOT_W = WIDTH - MARGIN_L - MARGIN_R
PLOT_H = HEIGHT - MARGIN_T - MARGIN_B
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12:
        out.append(round(t, 10))
        t += step
    return out


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="22" text-anchor="middle" font-size="15">{_esc(title)}</text>',
            f'<text x="{MARGIN_L + PLOT_W / 2}" y="{HEIGHT - 12}" text-anchor="middle">{_esc(xlabel)}</text>',
            f'<text x="18" y="{MARGIN_T + PLOT_H / 2}" text-anchor="middle" '
            f'transform="rotate(-90 18 {MARGIN_T + PLOT_H / 2})">{_esc(ylabel)}</text>',
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{PLOT_W}" height="{PLOT_H}" '
            f'fill="none" stroke="#333"/>',
        ]

    def x_of(self, v, lo, hi):
        return MARGIN_L + (v - lo) / (hi - lo) * PLOT_W

    def y_of(self, v, lo, hi):
        return MARGIN_T + PLOT_H - (v - lo) / (hi - lo) * PLOT_H

    def y_axis(self, lo, hi):
        for t in _ticks(lo, hi):
            if t < lo - 1e-12 or t > hi + 1e-12:
                continue
            y = self.y_of(t, lo, hi)
            self.parts.append(f'<line x1="{MARGIN_L - 4}" y1="{y:.1f}" x2="{MARGIN_L}" y2="{y:.1f}" stroke="#333"/>')
            self.parts.append(f'<text x="{MARGIN_L - 8}" y="{y + 4:.1f}" text-anchor="end">{t:g}</text>')

    def x_axis(self, lo, hi):
        for t in _ticks(lo, hi):
            if t < lo - 1e-12 or t > hi + 1e-12:
                continue
            x = self.x_of(t, lo, hi)
            y0 = MARGIN_T + PLOT_H
            self.parts.append(f'<line x1="{x:.1f}" y1="{y0}" x2="{x:.1f}" y2="{y0 + 4}" stroke="#333"/>')
            self.parts.append(f'<text x="{x:.1f}" y="{y0 + 18}" text-anchor="middle">{t:g}</text>')

    def legend(self, labels):
        x = MARGIN_L + 10
        y = MARGIN_T + 14
        for i, label in enumerate(labels):
            c = COLORS[i % len(COLORS)]
            self.parts.append(f'<rect x="{x}" y="{y - 9}" width="14" height="9" fill="{c}"/>')
            self.parts.append(f'<text x="{x + 18}" y="{y}">{_esc(label)}</text>')
            y += 16

    def write(self, path):
        self.parts.append("</svg>")
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text("\n".join(self.parts) + "\n")


def line_chart(path, series: dict, title: str, xlabel: str, ylabel: str) -> None:
    """series: label -> (xs, ys)."""
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys]
    if not xs_all:
        raise ValueError("empty series")
    x_lo, x_hi = min(xs_all), max(xs_all)
    y_lo, y_hi = min(ys_all), max(ys_all)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    cv = _Canvas(title, xlabel, ylabel)
    cv.x_axis(x_lo, x_hi)
    cv.y_axis(y_lo, y_hi)
    for i, (label, (xs, ys)) in enumerate(series.items()):
        color = COLORS[i % len(COLORS)]
        pts = " ".join(
            f"{cv.x_of(x, x_lo, x_hi):.1f},{cv.y_of(y, y_lo, y_hi):.1f}" for x, y in zip(xs, ys)
        )
        cv.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
    cv.legend(series.keys())
    cv.write(path)


def grouped_bars(path, group_labels, series: dict, title: str, ylabel: str) -> None:
    """series: label -> (means, stds); one bar group per group label, with
    std whiskers."""
    n_groups = len(group_labels)
    n_series = len(series)
    if n_groups == 0 or n_series == 0:
        raise ValueError("empty chart")
    tops = [m + s for means, stds in series.values() for m, s in zip(means, stds)]
    y_hi = max(max(tops), 1e-9) * 1.1
    y_lo = 0.0
    cv = _Canvas(title, "", ylabel)
    cv.y_axis(y_lo, y_hi)
    group_w = PLOT_W / n_groups
    bar_w = group_w * 0.8 / n_series
    for gi, label in enumerate(group_labels):
        cx = MARGIN_L + group_w * (gi + 0.5)
        cv.parts.append(
            f'<text x="{cx:.1f}" y="{MARGIN_T + PLOT_H + 18}" text-anchor="middle">{_esc(str(label))}</text>'
        )
    for si, (label, (means, stds)) in enumerate(series.items()):
        color = COLORS[si % len(COLORS)]
        for gi, (m, s) in enumerate(zip(means, stds)):
            x = MARGIN_L + group_w * gi + group_w * 0.1 + si * bar_w
            y = cv.y_of(m, y_lo, y_hi)
            h = MARGIN_T + PLOT_H - y
            cv.parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w * 0.92:.1f}" height="{h:.1f}" fill="{color}"/>'
            )
            if s > 0:
                cx = x + bar_w * 0.46
                y1 = cv.y_of(max(y_lo, m - s), y_lo, y_hi)
                y2 = cv.y_of(min(y_hi, m + s), y_lo, y_hi)
                cv.parts.append(
                    f'<line x1="{cx:.1f}" y1="{y1:.1f}" x2="{cx:.1f}" y2="{y2:.1f}" '
                    f'stroke="#e6a100" stroke-width="2"/>'
                )
    cv.legend(series.keys())
    cv.write(path)
