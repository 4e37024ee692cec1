"""Minimal deterministic SVG line/scatter plots (no rendering backend)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#222222", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")


@dataclass
class _Series:
    kind: str
    x: np.ndarray
    y: np.ndarray
    label: str
    color: str


@dataclass
class Plot:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logy: bool = False
    width: int = 640
    height: int = 440
    series: list = field(default_factory=list)

    def line(self, x, y, label="", color=None):
        self._add("line", x, y, label, color)
        return self

    def scatter(self, x, y, label="", color=None):
        self._add("scatter", x, y, label, color)
        return self

    def _add(self, kind, x, y, label, color):
        color = color or PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(_Series(kind, np.asarray(x, float), np.asarray(y, float), label, color))

    def _ty(self, y):
        if not self.logy:
            return y
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log10(y)

    def render(self) -> str:
        ml, mr, mt, mb = 70, 20, 36, 56
        pw, ph = self.width - ml - mr, self.height - mt - mb
        xs = np.concatenate([s.x for s in self.series]) if self.series else np.zeros(1)
        ys = np.concatenate([self._ty(s.y) for s in self.series]) if self.series else np.zeros(1)
        xf, yf = xs[np.isfinite(xs)], ys[np.isfinite(ys)]
        x0, x1 = _span(xf)
        y0, y1 = _span(yf)

        def px(x):
            return ml + (x - x0) / (x1 - x0) * pw

        def py(y):
            return mt + ph - (y - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}">',
            f'<rect x="0" y="0" width="{self.width}" height="{self.height}" fill="white"/>',
            f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        ]
        for t in _ticks(x0, x1):
            out.append(f'<line x1="{px(t):.2f}" y1="{mt + ph}" x2="{px(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
            out.append(f'<text x="{px(t):.2f}" y="{mt + ph + 18}" font-size="11" text-anchor="middle">{_num(t)}</text>')
        for t in _ticks(y0, y1):
            lab = f"1e{_num(t)}" if self.logy else _num(t)
            out.append(f'<line x1="{ml - 5}" y1="{py(t):.2f}" x2="{ml}" y2="{py(t):.2f}" stroke="black"/>')
            out.append(f'<text x="{ml - 8}" y="{py(t) + 4:.2f}" font-size="11" text-anchor="end">{lab}</text>')
        out.append(f'<text class="title" x="{self.width / 2}" y="22" font-size="14" text-anchor="middle">{escape(self.title)}</text>')
        out.append(f'<text class="xlabel" x="{ml + pw / 2}" y="{self.height - 14}" font-size="12" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(
            f'<text class="ylabel" x="16" y="{mt + ph / 2}" font-size="12" text-anchor="middle" '
            f'transform="rotate(-90 16 {mt + ph / 2})">{escape(self.ylabel)}</text>'
        )
        for s in self.series:
            y = self._ty(s.y)
            ok = np.isfinite(s.x) & np.isfinite(y)
            if s.kind == "line":
                pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(s.x[ok], y[ok]))
                out.append(f'<path class="series" d="M {pts}" fill="none" stroke="{s.color}" stroke-width="1.5"/>'
                           if pts else "")
            else:
                out.append(f'<g class="series" fill="{s.color}">')
                out.extend(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="2.5"/>' for a, b in zip(s.x[ok], y[ok]))
                out.append("</g>")
        for i, s in enumerate(s for s in self.series if s.label):
            yy = mt + 14 + 16 * i
            out.append(f'<rect x="{ml + pw - 150}" y="{yy - 8}" width="10" height="10" fill="{s.color}"/>')
            out.append(f'<text x="{ml + pw - 135}" y="{yy + 1}" font-size="11">{escape(s.label)}</text>')
        out.append("</svg>")
        return "\n".join(line for line in out if line) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.render(), encoding="utf-8")
        return path


def _span(v):
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi - lo < 1e-12 * max(1.0, abs(hi)):
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo, hi, target=5):
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step) + 1)]


def _num(t):
    return f"{t:.6g}" if abs(t) > 1e-12 else "0"
