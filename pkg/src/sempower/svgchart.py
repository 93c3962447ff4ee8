"""Minimal self-contained SVG line charts (no plotting dependency).

Deterministic output: the same series always render to the same bytes.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .errors import DomainError

__all__ = ["line_chart"]

_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#e377c2",
)
_DASHES = ("", "6,3", "2,2", "8,3,2,3")


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def line_chart(
    series: list[tuple[str, list[float], list[float]]],
    xlabel: str,
    ylabel: str,
    title: str = "",
    log_y: bool = True,
    width: int = 760,
    height: int = 500,
) -> str:
    """Render labelled (x, y) series to an SVG document string.

    With ``log_y`` the vertical axis is logarithmic with decade ticks;
    points that are non-finite (or non-positive on a log axis) are
    dropped from their polyline.
    """
    cleaned = []
    for label, xs, ys in series:
        pts = [
            (float(x), float(y))
            for x, y in zip(xs, ys)
            if math.isfinite(x) and math.isfinite(y) and (not log_y or y > 0.0)
        ]
        if pts:
            cleaned.append((label, pts))
    if not cleaned:
        raise DomainError("no plottable points in any series")

    all_x = [x for _, pts in cleaned for x, _ in pts]
    all_y = [y for _, pts in cleaned for _, y in pts]
    x_lo, x_hi = min(all_x), max(all_x)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if log_y:
        y_lo = math.floor(math.log10(min(all_y)))
        y_hi = math.ceil(math.log10(max(all_y)))
        if y_hi == y_lo:
            y_hi += 1
    else:
        y_lo, y_hi = min(all_y), max(all_y)
        if y_hi == y_lo:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    ml, mr, mt, mb = 86, 24, 42 if title else 24, 58
    pw, ph = width - ml - mr, height - mt - mb

    def px(x: float) -> float:
        return ml + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        t = (math.log10(y) - y_lo) / (y_hi - y_lo) if log_y else (y - y_lo) / (y_hi - y_lo)
        return mt + (1.0 - t) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
            f'font-size="15">{escape(title)}</text>'
        )

    # gridlines and ticks
    if log_y:
        y_tick_vals = [10.0**e for e in range(int(y_lo), int(y_hi) + 1)]
        y_tick_text = [f"1e{e:d}" for e in range(int(y_lo), int(y_hi) + 1)]
    else:
        y_tick_vals = _nice_ticks(y_lo, y_hi)
        y_tick_text = [_fmt(v) for v in y_tick_vals]
    for v, txt in zip(y_tick_vals, y_tick_text):
        yy = py(v)
        out.append(
            f'<line x1="{ml}" y1="{yy:.2f}" x2="{ml + pw}" y2="{yy:.2f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{ml - 8}" y="{yy + 4:.2f}" text-anchor="end">{escape(txt)}</text>'
        )
    for v in _nice_ticks(x_lo, x_hi):
        xx = px(v)
        out.append(
            f'<line x1="{xx:.2f}" y1="{mt}" x2="{xx:.2f}" y2="{mt + ph}" '
            f'stroke="#eeeeee" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{xx:.2f}" y="{mt + ph + 18}" text-anchor="middle">{escape(_fmt(v))}</text>'
        )

    # axes
    out.append(
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black" stroke-width="1.5"/>'
    )
    out.append(
        f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" '
        f'stroke="black" stroke-width="1.5"/>'
    )
    out.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 14}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="18" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {mt + ph / 2:.1f})">{escape(ylabel)}</text>'
    )

    # series
    for idx, (label, pts) in enumerate(cleaned):
        color = _PALETTE[idx % len(_PALETTE)]
        dash = _DASHES[(idx // len(_PALETTE)) % len(_DASHES)]
        attr = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in pts)
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.8"{attr} points="{coords}"/>'
        )
        for x, y in pts:
            out.append(
                f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.4" fill="{color}"/>'
            )

    # legend
    lx, ly = ml + pw - 188, mt + 10
    out.append(
        f'<rect x="{lx - 8}" y="{ly - 14}" width="196" height="{18 * len(cleaned) + 10}" '
        f'fill="white" stroke="#999999"/>'
    )
    for idx, (label, _) in enumerate(cleaned):
        color = _PALETTE[idx % len(_PALETTE)]
        yy = ly + 18 * idx
        out.append(
            f'<line x1="{lx}" y1="{yy:.2f}" x2="{lx + 22}" y2="{yy:.2f}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{lx + 28}" y="{yy + 4:.2f}">{escape(label)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
