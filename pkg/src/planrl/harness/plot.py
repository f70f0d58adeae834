"""Self-contained SVG line and bar plots, no external assets.

A series is a dict with a label, shared x values, and one or more y runs;
multiple runs render as a mean line with a +-std band.
"""

from __future__ import annotations

import numpy as np

PALETTE = ("#1f77b4", "#111111", "#d62728", "#2ca02c", "#9467bd",
           "#ff7f0e", "#8c564b", "#17becf")

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 18, 38, 50


def _ticks(lo: float, hi: float, n: int = 5) -> np.ndarray:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** np.floor(np.log10(raw))
    step = min((m for m in (1.0, 2.0, 2.5, 5.0, 10.0) if m * mag >= raw),
               default=10.0) * mag
    first = np.ceil(lo / step) * step
    return np.arange(first, hi + 0.5 * step, step)


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 10000 or abs(v) < 0.001:
        return f"{v:.1e}"
    return f"{v:g}"


def _esc(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


class _Canvas:
    def __init__(self, x_lo, x_hi, y_lo, y_hi):
        if x_hi <= x_lo:
            x_hi = x_lo + 1.0
        pad = 0.05 * (y_hi - y_lo) or 0.5
        self.x_lo, self.x_hi = x_lo, x_hi
        self.y_lo, self.y_hi = y_lo - pad, y_hi + pad
        self.parts = []

    def px(self, x):
        return _ML + (np.asarray(x) - self.x_lo) / (self.x_hi - self.x_lo) \
            * (_W - _ML - _MR)

    def py(self, y):
        return _H - _MB - (np.asarray(y) - self.y_lo) \
            / (self.y_hi - self.y_lo) * (_H - _MT - _MB)

    def axes(self, title, x_label, y_label, x_ticks: bool = True):
        p = self.parts
        p.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
                 f'height="{_H - _MT - _MB}" fill="none" stroke="#888" '
                 'stroke-width="1"/>')
        for tx in _ticks(self.x_lo, self.x_hi) if x_ticks else ():
            x = float(self.px(tx))
            p.append(f'<line x1="{x:.1f}" y1="{_H - _MB}" x2="{x:.1f}" '
                     f'y2="{_H - _MB + 5}" stroke="#444"/>')
            p.append(f'<text x="{x:.1f}" y="{_H - _MB + 18}" '
                     'font-size="11" text-anchor="middle" '
                     f'fill="#333">{_fmt(tx)}</text>')
        for ty in _ticks(self.y_lo, self.y_hi):
            y = float(self.py(ty))
            p.append(f'<line x1="{_ML - 5}" y1="{y:.1f}" x2="{_ML}" '
                     f'y2="{y:.1f}" stroke="#444"/>')
            p.append(f'<line x1="{_ML}" y1="{y:.1f}" x2="{_W - _MR}" '
                     f'y2="{y:.1f}" stroke="#eee"/>')
            p.append(f'<text x="{_ML - 8}" y="{y + 4:.1f}" font-size="11" '
                     f'text-anchor="end" fill="#333">{_fmt(ty)}</text>')
        if title:
            p.append(f'<text x="{_W / 2}" y="22" font-size="14" '
                     f'text-anchor="middle" fill="#111">{_esc(title)}</text>')
        if x_label:
            p.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 10}" '
                     'font-size="12" text-anchor="middle" '
                     f'fill="#111">{_esc(x_label)}</text>')
        if y_label:
            p.append(f'<text x="16" y="{(_MT + _H - _MB) / 2}" '
                     'font-size="12" text-anchor="middle" fill="#111" '
                     f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2})">'
                     f'{_esc(y_label)}</text>')

    def legend(self, entries):
        if not entries:
            return
        x0, y0 = _ML + 10, _MT + 8
        h = 16 * len(entries) + 8
        w = 10 + 22 + 7 * max(len(str(l)) for l, _ in entries) + 12
        self.parts.append(f'<rect x="{x0}" y="{y0}" width="{w}" '
                          f'height="{h}" fill="#fff" fill-opacity="0.85" '
                          'stroke="#999"/>')
        for i, (label, color) in enumerate(entries):
            y = y0 + 16 * i + 14
            self.parts.append(f'<line x1="{x0 + 6}" y1="{y - 4}" '
                              f'x2="{x0 + 26}" y2="{y - 4}" '
                              f'stroke="{color}" stroke-width="2.5"/>')
            self.parts.append(f'<text x="{x0 + 31}" y="{y}" font-size="11" '
                              f'fill="#111">{_esc(label)}</text>')

    def render(self) -> str:
        body = "\n".join(self.parts)
        return ('<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">\n'
                f'<rect width="{_W}" height="{_H}" fill="#ffffff"/>\n'
                f"{body}\n</svg>\n")


def _poly(xs, ys) -> str:
    return " ".join(f"{float(x):.2f},{float(y):.2f}" for x, y in zip(xs, ys))


def emit_plot(series, path, title: str = "", x_label: str = "",
              y_label: str = "") -> str:
    """Write a line plot; each series shows its mean and a +-std band.

    series: iterable of dicts with keys label, x, runs (list of equal
    length y arrays; a single run plots as a plain line).
    """
    series = list(series)
    if not series:
        raise ValueError("series must be nonempty")
    stats = []
    for spec in series:
        x = np.asarray(spec["x"], dtype=float)
        runs = np.asarray(spec["runs"], dtype=float)
        if runs.ndim == 1:
            runs = runs[None, :]
        if runs.shape[1] != x.shape[0]:
            raise ValueError(f"series {spec['label']!r}: x and y lengths "
                             "differ")
        stats.append((spec["label"], x, runs.mean(axis=0), runs.std(axis=0)))
    x_lo = min(float(s[1].min()) for s in stats)
    x_hi = max(float(s[1].max()) for s in stats)
    y_lo = min(float((s[2] - s[3]).min()) for s in stats)
    y_hi = max(float((s[2] + s[3]).max()) for s in stats)
    cv = _Canvas(x_lo, x_hi, y_lo, y_hi)
    cv.axes(title, x_label, y_label)
    entries = []
    for i, (label, x, mean, std) in enumerate(stats):
        color = PALETTE[i % len(PALETTE)]
        if std.any():
            xs = np.concatenate([cv.px(x), cv.px(x)[::-1]])
            ys = np.concatenate([cv.py(mean + std), cv.py(mean - std)[::-1]])
            cv.parts.append(f'<polygon points="{_poly(xs, ys)}" '
                            f'fill="{color}" fill-opacity="0.18" '
                            'stroke="none"/>')
        cv.parts.append(f'<polyline points="{_poly(cv.px(x), cv.py(mean))}" '
                        f'fill="none" stroke="{color}" stroke-width="2"/>')
        entries.append((label, color))
    cv.legend(entries)
    svg = cv.render()
    with open(path, "w") as fh:
        fh.write(svg)
    return svg


def emit_bar_plot(labels, means, stds, path, title: str = "",
                  x_label: str = "", y_label: str = "") -> str:
    """Write a bar chart with std error bars; NaN cells render as gaps."""
    labels = [str(l) for l in labels]
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    if means.size == 0 or means.shape != stds.shape or \
            len(labels) != means.size:
        raise ValueError("labels, means, and stds must align and be nonempty")
    ok = np.isfinite(means)
    y_hi = float((means[ok] + stds[ok]).max()) if ok.any() else 1.0
    y_lo = min(0.0, float((means[ok] - stds[ok]).min()) if ok.any() else 0.0)
    cv = _Canvas(0.0, float(len(labels)), y_lo, y_hi)
    cv.axes(title, x_label, y_label, x_ticks=False)
    width = (_W - _ML - _MR) / len(labels)
    for i, label in enumerate(labels):
        xc = _ML + (i + 0.5) * width
        cv.parts.append(f'<text x="{xc:.1f}" y="{_H - _MB + 18}" '
                        'font-size="11" text-anchor="middle" '
                        f'fill="#333">{_esc(label)}</text>')
        if not np.isfinite(means[i]):
            cv.parts.append(f'<text x="{xc:.1f}" y="{float(cv.py(0)) - 6:.1f}"'
                            ' font-size="10" text-anchor="middle" '
                            'fill="#999">missing</text>')
            continue
        y_top = float(cv.py(max(means[i], 0.0)))
        y_bot = float(cv.py(min(means[i], 0.0)))
        cv.parts.append(f'<rect x="{xc - 0.3 * width:.1f}" y="{y_top:.1f}" '
                        f'width="{0.6 * width:.1f}" '
                        f'height="{max(y_bot - y_top, 0.5):.1f}" '
                        f'fill="{PALETTE[0]}" fill-opacity="0.8"/>')
        if stds[i] > 0:
            y1 = float(cv.py(means[i] - stds[i]))
            y2 = float(cv.py(means[i] + stds[i]))
            cv.parts.append(f'<line x1="{xc:.1f}" y1="{y1:.1f}" '
                            f'x2="{xc:.1f}" y2="{y2:.1f}" stroke="#222" '
                            'stroke-width="1.5"/>')
            for yy in (y1, y2):
                cv.parts.append(f'<line x1="{xc - 5:.1f}" y1="{yy:.1f}" '
                                f'x2="{xc + 5:.1f}" y2="{yy:.1f}" '
                                'stroke="#222" stroke-width="1.5"/>')
    svg = cv.render()
    with open(path, "w") as fh:
        fh.write(svg)
    return svg
