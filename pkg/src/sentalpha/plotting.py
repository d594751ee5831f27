"""Minimal deterministic SVG charts: line, bar and box plots.

Byte-identical reruns are a package-level contract, so figures are rendered
here with fixed geometry and fixed-precision coordinates instead of going
through a plotting library with environment-dependent output. Every figure
the CLI emits sits next to a CSV holding the plotted numbers.
"""

from pathlib import Path

import numpy as np

WIDTH = 720
HEIGHT = 440
MARGIN_L = 70
MARGIN_R = 24
MARGIN_T = 44
MARGIN_B = 52

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

_PLOT_W = WIDTH - MARGIN_L - MARGIN_R
_PLOT_H = HEIGHT - MARGIN_T - MARGIN_B


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _nice_ticks(lo: float, hi: float, target: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    raw = span / target
    mag = 10.0 ** np.floor(np.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        step = mult * mag
        if span / step <= target:
            break
    first = np.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(v) < 1e-12 * span else float(v))
        v += step
    return ticks


def _fmt_num(v: float) -> str:
    return f"{v:g}"


class _Canvas:
    def __init__(self, title, x_label, y_label):
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{_esc(title)}</text>',
        ]
        if x_label:
            self.parts.append(
                f'<text x="{MARGIN_L + _PLOT_W / 2:.1f}" y="{HEIGHT - 12}" '
                f'text-anchor="middle" font-family="sans-serif" '
                f'font-size="12">{_esc(x_label)}</text>'
            )
        if y_label:
            cy = MARGIN_T + _PLOT_H / 2
            self.parts.append(
                f'<text x="18" y="{cy:.1f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="12" '
                f'transform="rotate(-90 18 {cy:.1f})">{_esc(y_label)}</text>'
            )

    def frame(self, x_lo, x_hi, y_lo, y_hi):
        self.x_lo, self.x_hi = x_lo, max(x_hi, x_lo + 1e-12)
        if y_hi <= y_lo:
            y_lo, y_hi = y_lo - 1.0, y_lo + 1.0
        pad = 0.06 * (y_hi - y_lo)
        self.y_lo, self.y_hi = y_lo - pad, y_hi + pad
        self.parts.append(
            f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{_PLOT_W}" '
            f'height="{_PLOT_H}" fill="none" stroke="#333"/>'
        )
        for tick in _nice_ticks(self.y_lo, self.y_hi):
            py = self.py(tick)
            self.parts.append(
                f'<line x1="{MARGIN_L}" y1="{py:.2f}" x2="{WIDTH - MARGIN_R}" '
                f'y2="{py:.2f}" stroke="#ddd"/>'
                f'<text x="{MARGIN_L - 6}" y="{py + 4:.2f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="11">{_fmt_num(tick)}</text>'
            )

    def x_ticks(self, ticks, labels):
        for tick, label in zip(ticks, labels):
            px = self.px(tick)
            self.parts.append(
                f'<line x1="{px:.2f}" y1="{HEIGHT - MARGIN_B}" x2="{px:.2f}" '
                f'y2="{HEIGHT - MARGIN_B + 5}" stroke="#333"/>'
                f'<text x="{px:.2f}" y="{HEIGHT - MARGIN_B + 18}" '
                f'text-anchor="middle" font-family="sans-serif" '
                f'font-size="11">{_esc(label)}</text>'
            )

    def px(self, x: float) -> float:
        return MARGIN_L + (x - self.x_lo) / (self.x_hi - self.x_lo) * _PLOT_W

    def py(self, y: float) -> float:
        return MARGIN_T + (self.y_hi - y) / (self.y_hi - self.y_lo) * _PLOT_H

    def legend(self, labels):
        x = WIDTH - MARGIN_R - 150
        y = MARGIN_T + 10
        for i, label in enumerate(labels):
            color = PALETTE[i % len(PALETTE)]
            self.parts.append(
                f'<rect x="{x}" y="{y + 16 * i - 8}" width="10" height="10" '
                f'fill="{color}"/>'
                f'<text x="{x + 15}" y="{y + 16 * i + 1}" '
                f'font-family="sans-serif" font-size="11">{_esc(label)}</text>'
            )

    def save(self, path):
        self.parts.append("</svg>")
        Path(path).write_text("\n".join(self.parts) + "\n")


def line_plot(path, title, series, x_label="", y_label="",
              x_tick_labels=None) -> None:
    """series: iterable of (label, xs, ys) with numeric xs."""
    series = [(label, np.asarray(xs, float), np.asarray(ys, float))
              for label, xs, ys in series]
    canvas = _Canvas(title, x_label, y_label)
    all_x = np.concatenate([xs for _, xs, _ in series])
    all_y = np.concatenate([ys for _, _, ys in series])
    canvas.frame(float(all_x.min()), float(all_x.max()),
                 float(all_y.min()), float(all_y.max()))
    x_ticks = _nice_ticks(canvas.x_lo, canvas.x_hi, 6)
    if x_tick_labels is None:
        canvas.x_ticks(x_ticks, [_fmt_num(t) for t in x_ticks])
    else:
        positions = [t for t in x_ticks
                     if 0 <= int(round(t)) < len(x_tick_labels)
                     and abs(t - round(t)) < 1e-9]
        canvas.x_ticks(positions,
                       [x_tick_labels[int(round(t))] for t in positions])
    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(
            f"{canvas.px(float(x)):.2f},{canvas.py(float(y)):.2f}"
            for x, y in zip(xs, ys)
        )
        canvas.parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="1.5"/>'
        )
    if len(series) > 1:
        canvas.legend([label for label, _, _ in series])
    canvas.save(path)


def bar_plot(path, title, labels, values, x_label="", y_label="") -> None:
    values = np.asarray(values, dtype=float)
    canvas = _Canvas(title, x_label, y_label)
    canvas.frame(-0.5, len(values) - 0.5, min(0.0, float(values.min())),
                 max(0.0, float(values.max())))
    step = max(1, len(labels) // 10)
    idx = list(range(0, len(labels), step))
    canvas.x_ticks(idx, [str(labels[i]) for i in idx])
    width = 0.8 * _PLOT_W / len(values)
    base = canvas.py(0.0)
    for i, v in enumerate(values):
        px = canvas.px(float(i)) - width / 2
        py = canvas.py(float(v))
        top, h = (py, base - py) if v >= 0 else (base, py - base)
        canvas.parts.append(
            f'<rect x="{px:.2f}" y="{top:.2f}" width="{width:.2f}" '
            f'height="{h:.2f}" fill="{PALETTE[0]}"/>'
        )
    canvas.save(path)


def box_plot(path, title, groups, y_label="") -> None:
    """groups: iterable of (label, values); draws five-number boxes."""
    stats = []
    for label, values in groups:
        arr = np.asarray(values, dtype=float)
        qs = np.quantile(arr, (0.0, 0.25, 0.5, 0.75, 1.0))
        stats.append((label, qs))
    canvas = _Canvas(title, "", y_label)
    lo = min(float(q[0]) for _, q in stats)
    hi = max(float(q[4]) for _, q in stats)
    canvas.frame(-0.5, len(stats) - 0.5, lo, hi)
    canvas.x_ticks(range(len(stats)), [label for label, _ in stats])
    width = min(60.0, 0.5 * _PLOT_W / len(stats))
    for i, (label, (mn, q1, med, q3, mx)) in enumerate(stats):
        cx = canvas.px(float(i))
        color = PALETTE[i % len(PALETTE)]
        for pair in ((mn, q1), (q3, mx)):
            canvas.parts.append(
                f'<line x1="{cx:.2f}" y1="{canvas.py(pair[0]):.2f}" '
                f'x2="{cx:.2f}" y2="{canvas.py(pair[1]):.2f}" stroke="#333"/>'
            )
        top, bottom = canvas.py(float(q3)), canvas.py(float(q1))
        canvas.parts.append(
            f'<rect x="{cx - width / 2:.2f}" y="{top:.2f}" width="{width:.2f}" '
            f'height="{bottom - top:.2f}" fill="{color}" fill-opacity="0.5" '
            f'stroke="#333"/>'
            f'<line x1="{cx - width / 2:.2f}" y1="{canvas.py(float(med)):.2f}" '
            f'x2="{cx + width / 2:.2f}" y2="{canvas.py(float(med)):.2f}" '
            f'stroke="#000" stroke-width="1.5"/>'
        )
    canvas.save(path)
