"""Tiny deterministic SVG chart writer (no plotting dependencies).

Only the two chart shapes the pipeline emits: line-with-scatter series over a
numeric x axis, and interval (point + error bar) charts over labelled
categories. Output is plain SVG text with fixed-precision coordinates so that
identical data always yields identical bytes.
"""
from __future__ import annotations

import math
from pathlib import Path

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def _fmt(v: float) -> str:
    return f"{v:.2f}"


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
    ticks = []
    t = first
    while t <= hi + 1e-12 * span:
        ticks.append(round(t, 12))
        t += step
    return ticks


class _Canvas:
    def __init__(self, width: int, height: int, title: str,
                 xlabel: str, ylabel: str):
        self.w, self.h = width, height
        self.ml, self.mr, self.mt, self.mb = 64, 16, 34, 46
        self.parts: list[str] = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>',
            f'<text x="{width / 2:.0f}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{_esc(title)}</text>',
            f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{_esc(xlabel)}</text>',
            f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12" '
            f'transform="rotate(-90 14 {height / 2:.0f})">{_esc(ylabel)}</text>',
        ]

    def set_ranges(self, xlo, xhi, ylo, yhi):
        if xhi <= xlo:
            xhi = xlo + 1.0
        if yhi <= ylo:
            yhi = ylo + 1.0
        pad_x = 0.02 * (xhi - xlo)
        pad_y = 0.05 * (yhi - ylo)
        self.xlo, self.xhi = xlo - pad_x, xhi + pad_x
        self.ylo, self.yhi = ylo - pad_y, yhi + pad_y

    def px(self, x: float) -> float:
        frac = (x - self.xlo) / (self.xhi - self.xlo)
        return self.ml + frac * (self.w - self.ml - self.mr)

    def py(self, y: float) -> float:
        frac = (y - self.ylo) / (self.yhi - self.ylo)
        return self.h - self.mb - frac * (self.h - self.mt - self.mb)

    def axes(self, x_tick_labels: dict[float, str] | None = None):
        x0, x1 = self.ml, self.w - self.mr
        y0, y1 = self.h - self.mb, self.mt
        self.parts.append(
            f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
        self.parts.append(
            f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
        if x_tick_labels is None:
            x_tick_labels = {t: f"{t:g}" for t in _ticks(self.xlo, self.xhi)}
        for xv, label in x_tick_labels.items():
            px = self.px(xv)
            if px < x0 - 0.5 or px > x1 + 0.5:
                continue
            self.parts.append(
                f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" '
                f'y2="{y0 + 4}" stroke="black"/>')
            self.parts.append(
                f'<text x="{_fmt(px)}" y="{y0 + 18}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10">{_esc(label)}</text>')
        for yv in _ticks(self.ylo, self.yhi):
            py = self.py(yv)
            if py > y0 + 0.5 or py < y1 - 0.5:
                continue
            self.parts.append(
                f'<line x1="{x0 - 4}" y1="{_fmt(py)}" x2="{x0}" '
                f'y2="{_fmt(py)}" stroke="black"/>')
            self.parts.append(
                f'<text x="{x0 - 7}" y="{_fmt(py + 3)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10">{yv:g}</text>')

    def legend(self, labels: list[str]):
        for i, label in enumerate(labels):
            color = _PALETTE[i % len(_PALETTE)]
            y = self.mt + 14 * i
            self.parts.append(
                f'<rect x="{self.w - self.mr - 150}" y="{y}" width="10" '
                f'height="10" fill="{color}"/>')
            self.parts.append(
                f'<text x="{self.w - self.mr - 136}" y="{y + 9}" '
                f'font-family="sans-serif" font-size="10">{_esc(label)}</text>')

    def save(self, path: str | Path):
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n", encoding="utf-8")


def _esc(s: str) -> str:
    return (s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))


def line_chart(path, series, *, scatter=None, title="", xlabel="", ylabel="",
               width=900, height=460, x_tick_labels=None):
    """Write a line chart; series is a list of (label, xs, ys).

    scatter, if given, is a list of (label, xs, ys) drawn as small dots behind
    the lines (used for daily values behind per-period means).
    """
    xs_all, ys_all = [], []
    for _, xs, ys in list(series) + list(scatter or []):
        xs_all.extend(xs)
        ys_all.extend(ys)
    if not xs_all:
        raise ValueError("nothing to plot")
    cv = _Canvas(width, height, title, xlabel, ylabel)
    cv.set_ranges(min(xs_all), max(xs_all), min(ys_all), max(ys_all))
    cv.axes(x_tick_labels)
    labels = []
    for i, (label, xs, ys) in enumerate(scatter or []):
        color = _PALETTE[i % len(_PALETTE)]
        for x, y in zip(xs, ys):
            cv.parts.append(
                f'<circle cx="{_fmt(cv.px(x))}" cy="{_fmt(cv.py(y))}" r="1.5" '
                f'fill="{color}" fill-opacity="0.35"/>')
    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(cv.px(x))},{_fmt(cv.py(y))}"
                       for x, y in zip(xs, ys))
        cv.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>')
        labels.append(label)
    cv.legend(labels)
    cv.save(path)


def interval_chart(path, groups, *, title="", xlabel="", ylabel="",
                   width=900, height=460):
    """Point-and-interval chart. groups is a list of
    (series_label, [(category_label, mid, lo, hi), ...]); categories share an
    integer x position in input order."""
    cats: list[str] = []
    for _, rows in groups:
        for cat, *_ in rows:
            if cat not in cats:
                cats.append(cat)
    ys = [v for _, rows in groups for _, mid, lo, hi in rows
          for v in (mid, lo, hi)]
    cv = _Canvas(width, height, title, xlabel, ylabel)
    cv.set_ranges(-0.5, len(cats) - 0.5, min(ys), max(ys))
    tick_labels = {float(i): c for i, c in enumerate(cats)}
    cv.axes(tick_labels)
    n = max(len(groups), 1)
    for i, (label, rows) in enumerate(groups):
        color = _PALETTE[i % len(_PALETTE)]
        offset = (i - (n - 1) / 2) * 0.8 / n
        for cat, mid, lo, hi in rows:
            x = cv.px(cats.index(cat) + offset)
            cv.parts.append(
                f'<line x1="{_fmt(x)}" y1="{_fmt(cv.py(lo))}" x2="{_fmt(x)}" '
                f'y2="{_fmt(cv.py(hi))}" stroke="{color}" stroke-width="1.2"/>')
            cv.parts.append(
                f'<circle cx="{_fmt(x)}" cy="{_fmt(cv.py(mid))}" r="2.5" '
                f'fill="{color}"/>')
    cv.legend([label for label, _ in groups])
    cv.save(path)
