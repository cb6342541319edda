"""Static SVG rendering of impulse responses with shaded bands."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import pandas as pd

from .exceptions import DataError


@dataclass(frozen=True)
class PlotStyle:
    panel_width: float = 240.0
    panel_height: float = 180.0
    margin: float = 36.0
    line_color: str = "#1f4e79"
    band_color: str = "#1f4e79"
    band_opacity: float = 0.25
    zero_color: str = "#888888"
    font_size: float = 11.0
    title: str | None = None


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _check(table: pd.DataFrame) -> None:
    if len(table) == 0:
        raise DataError("cannot plot an empty IRF table")
    for i, rec in enumerate(table.itertuples(index=False)):
        for name in ("horizon", "beta", "ci_low", "ci_high"):
            v = float(getattr(rec, name))
            if not math.isfinite(v):
                raise DataError(f"non-finite {name} in row {i} (label {rec.label!r}, horizon {rec.horizon})")


def _ticks(lo: float, hi: float, n: int = 4) -> list[float]:
    span = hi - lo
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    out, t = [], first
    while t <= hi + 1e-12 * span:
        out.append(round(t, 12))
        t += step
    return out


def emit_irf_plot(table: pd.DataFrame, style: PlotStyle | None = None) -> str:
    """One panel per label, left to right in order of first appearance."""
    style = style or PlotStyle()
    _check(table)
    labels = list(dict.fromkeys(table["label"]))
    m, W, H = style.margin, style.panel_width, style.panel_height
    top = m + (style.font_size * 1.6 if style.title else 0)
    width = len(labels) * (W + m) + m
    height = top + H + m
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}" font-family="sans-serif" font-size="{_f(style.font_size)}">',
    ]
    if style.title:
        out.append(f'<text x="{_f(width / 2)}" y="{_f(m * 0.6)}" text-anchor="middle">{escape(style.title)}</text>')
    for k, lab in enumerate(labels):
        sub = table[table["label"] == lab].sort_values("horizon")
        hs = [float(h) for h in sub["horizon"]]
        b = [float(v) for v in sub["beta"]]
        lo = [float(v) for v in sub["ci_low"]]
        hi = [float(v) for v in sub["ci_high"]]
        x0 = m + k * (W + m)
        ymin, ymax = min(min(lo), 0.0), max(max(hi), 0.0)
        if ymax - ymin < 1e-12:
            ymin, ymax = ymin - 1.0, ymax + 1.0
        pad = 0.05 * (ymax - ymin)
        ymin, ymax = ymin - pad, ymax + pad
        hmin, hmax = min(hs), max(hs)
        hspan = hmax - hmin

        def px(h):
            return x0 + (W / 2 if hspan == 0 else (h - hmin) / hspan * W)

        def py(v):
            return top + (ymax - v) / (ymax - ymin) * H

        out.append(f'<g id="panel-{k}">')
        out.append(f'<rect x="{_f(x0)}" y="{_f(top)}" width="{_f(W)}" height="{_f(H)}" fill="none" stroke="#cccccc"/>')
        out.append(f'<text x="{_f(x0 + W / 2)}" y="{_f(top - 6)}" text-anchor="middle">{escape(str(lab))}</text>')
        for t in _ticks(ymin, ymax):
            out.append(f'<text x="{_f(x0 - 4)}" y="{_f(py(t) + 4)}" text-anchor="end">{_f(t)}</text>')
        for h in hs:
            out.append(f'<text x="{_f(px(h))}" y="{_f(top + H + 14)}" text-anchor="middle">{int(h)}</text>')
        out.append(
            f'<line class="zero" x1="{_f(x0)}" y1="{_f(py(0))}" x2="{_f(x0 + W)}" y2="{_f(py(0))}" '
            f'stroke="{style.zero_color}" stroke-dasharray="4 3"/>'
        )
        if len(hs) == 1:
            x = px(hs[0])
            out.append(
                f'<line class="band" x1="{_f(x)}" y1="{_f(py(lo[0]))}" x2="{_f(x)}" y2="{_f(py(hi[0]))}" '
                f'stroke="{style.band_color}" stroke-opacity="{_f(style.band_opacity * 2)}" stroke-width="6"/>'
            )
            for v in (lo[0], hi[0]):
                out.append(
                    f'<line class="cap" x1="{_f(x - 5)}" y1="{_f(py(v))}" x2="{_f(x + 5)}" y2="{_f(py(v))}" '
                    f'stroke="{style.line_color}"/>'
                )
            out.append(f'<circle class="beta" cx="{_f(x)}" cy="{_f(py(b[0]))}" r="3" fill="{style.line_color}"/>')
        else:
            pts = [(px(h), py(v)) for h, v in zip(hs, hi)] + [(px(h), py(v)) for h, v in zip(reversed(hs), reversed(lo))]
            out.append(
                f'<polygon class="band" points="{" ".join(f"{_f(x)},{_f(y)}" for x, y in pts)}" '
                f'fill="{style.band_color}" fill-opacity="{_f(style.band_opacity)}" stroke="none"/>'
            )
            line = " ".join(f"{_f(px(h))},{_f(py(v))}" for h, v in zip(hs, b))
            out.append(
                f'<polyline class="beta" points="{line}" fill="none" stroke="{style.line_color}" stroke-width="2"/>'
            )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
