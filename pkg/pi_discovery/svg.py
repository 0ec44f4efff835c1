"""
Minimal SVG charts: line plots with an optional log-scaled y axis, CDF step
plots and scatter plots, each with axes, grid and a legend.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from html import escape

__all__ = ["Series", "cdf_chart", "line_chart", "scatter_chart"]

PALETTE = (
    "#0d6efd",
    "#dc3545",
    "#198754",
    "#fd7e14",
    "#6f42c1",
    "#20c997",
    "#6c757d",
)
COLORS = {"bg": "#ffffff", "grid": "#e9ecef", "text": "#212529", "muted": "#6c757d"}
FONT = "system-ui, -apple-system, 'Segoe UI', sans-serif"
MARGIN = {"top": 50, "right": 30, "bottom": 60, "left": 80}


@dataclass(frozen=True)
class Series:
    name: str
    xs: Sequence[float]
    ys: Sequence[float]
    color: str | None = None


# ─── Primitives ──────────────────────────────────────────────────────────────


def _header(width: int, height: int, title: str) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" '
        f'width="{width}" height="{height}" style="font-family: {FONT}; background: {COLORS["bg"]}">\n'
        f"<title>{escape(title)}</title>\n"
    )


def _nice_ticks(lo: float, hi: float, max_ticks: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1
    raw = (hi - lo) / max(max_ticks - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = mag * min((1, 2, 2.5, 5, 10), key=lambda n: abs(n * mag - raw))
    v = math.floor(lo / step) * step
    ticks = []
    while v <= hi + step * 0.01:
        ticks.append(round(v, 10))
        v += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    return [10.0**e for e in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)]


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    a = abs(v)
    if a >= 1e5 or a < 1e-3:
        return f"{v:.0e}"
    if a >= 100:
        return f"{v:.0f}"
    if a >= 10:
        return f"{v:.1f}"
    if a >= 1:
        return f"{v:.2f}"
    return f"{v:.3f}"


class _Frame:
    """Maps data coordinates to the plot area and draws axes, grid and legend."""

    def __init__(
        self, series: Sequence[Series], width: int, height: int, log_y: bool, y_range: tuple[float, float] | None
    ) -> None:
        self.width, self.height, self.log_y = width, height, log_y
        self.plot_w = width - MARGIN["left"] - MARGIN["right"]
        self.plot_h = height - MARGIN["top"] - MARGIN["bottom"]
        xs = [x for s in series for x in s.xs]
        ys = [y for s in series for y in s.ys if not log_y or y > 0]
        self.x_ticks = _nice_ticks(min(xs, default=0.0), max(xs, default=1.0))
        if y_range is not None:
            y_lo, y_hi = y_range
        else:
            y_lo, y_hi = min(ys, default=0.0), max(ys, default=1.0)
        if log_y:
            y_lo = y_lo if y_lo > 0 else 1.0
            y_hi = max(y_hi, y_lo * 10)
            self.y_ticks = _log_ticks(y_lo, y_hi)
        else:
            self.y_ticks = _nice_ticks(min(0.0, y_lo), y_hi)
        self.x0, self.x1 = self.x_ticks[0], self.x_ticks[-1]
        self.y0, self.y1 = self.y_ticks[0], self.y_ticks[-1]

    def x(self, v: float) -> float:
        span = (self.x1 - self.x0) or 1.0
        return MARGIN["left"] + self.plot_w * (v - self.x0) / span

    def y(self, v: float) -> float:
        if self.log_y:
            lo, hi = math.log10(self.y0), math.log10(self.y1)
            t = (math.log10(max(v, self.y0)) - lo) / ((hi - lo) or 1.0)
        else:
            t = (v - self.y0) / ((self.y1 - self.y0) or 1.0)
        return MARGIN["top"] + self.plot_h * (1 - t)

    def axes(self, title: str, x_label: str, y_label: str) -> list[str]:
        left, top = MARGIN["left"], MARGIN["top"]
        bottom = top + self.plot_h
        parts = [
            _header(self.width, self.height, title),
            f'<text x="{self.width / 2}" y="28" text-anchor="middle" font-size="15" '
            f'font-weight="600" fill="{COLORS["text"]}">{escape(title)}</text>\n',
        ]
        for t in self.y_ticks:
            y = self.y(t)
            parts.append(
                f'<line x1="{left}" y1="{y:.1f}" x2="{self.width - MARGIN["right"]}" y2="{y:.1f}" '
                f'stroke="{COLORS["grid"]}" stroke-width="1"/>\n'
                f'<text x="{left - 8}" y="{y + 4:.1f}" text-anchor="end" font-size="11" '
                f'fill="{COLORS["muted"]}">{_fmt(t)}</text>\n'
            )
        for t in self.x_ticks:
            x = self.x(t)
            parts.append(
                f'<text x="{x:.1f}" y="{bottom + 18}" text-anchor="middle" font-size="11" '
                f'fill="{COLORS["muted"]}">{_fmt(t)}</text>\n'
            )
        parts.append(
            f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="{COLORS["muted"]}"/>\n'
            f'<line x1="{left}" y1="{bottom}" x2="{self.width - MARGIN["right"]}" y2="{bottom}" '
            f'stroke="{COLORS["muted"]}"/>\n'
            f'<text x="{left + self.plot_w / 2}" y="{self.height - 12}" text-anchor="middle" '
            f'font-size="12" fill="{COLORS["muted"]}">{escape(x_label)}</text>\n'
        )
        yl_y = top + self.plot_h / 2
        parts.append(
            f'<text x="16" y="{yl_y}" text-anchor="middle" font-size="12" fill="{COLORS["muted"]}" '
            f'transform="rotate(-90 16 {yl_y})">{escape(y_label)}</text>\n'
        )
        return parts

    def legend(self, series: Sequence[Series]) -> list[str]:
        parts = []
        lx = self.width - MARGIN["right"] - 150
        for i, s in enumerate(series):
            ly = MARGIN["top"] + 10 + i * 16
            parts.append(
                f'<rect x="{lx}" y="{ly - 9}" width="12" height="12" fill="{_color(s, i)}" rx="2"/>\n'
                f'<text x="{lx + 16}" y="{ly + 1}" font-size="11" fill="{COLORS["text"]}">'
                f"{escape(s.name)}</text>\n"
            )
        return parts


def _color(s: Series, i: int) -> str:
    return s.color or PALETTE[i % len(PALETTE)]


# ─── Charts ──────────────────────────────────────────────────────────────────


def line_chart(
    title: str,
    series: Sequence[Series],
    x_label: str = "",
    y_label: str = "",
    *,
    log_y: bool = False,
    width: int = 720,
    height: int = 420,
) -> str:
    f = _Frame(series, width, height, log_y, None)
    parts = f.axes(title, x_label, y_label)
    for i, s in enumerate(series):
        pts = " ".join(
            f"{f.x(x):.1f},{f.y(y):.1f}" for x, y in zip(s.xs, s.ys, strict=True) if not log_y or y > 0
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{_color(s, i)}" stroke-width="2">'
            f"<title>{escape(s.name)}</title></polyline>\n"
        )
    parts += f.legend(series)
    parts.append("</svg>\n")
    return "".join(parts)


def cdf_chart(
    title: str,
    series: Sequence[Series],
    x_label: str = "latency [s]",
    *,
    width: int = 720,
    height: int = 420,
) -> str:
    """Step plot of empirical CDFs; each series holds sorted xs and cumulative ys."""
    f = _Frame(series, width, height, False, (0.0, 1.0))
    parts = f.axes(title, x_label, "fraction of discoveries")
    for i, s in enumerate(series):
        pts: list[str] = []
        prev = 0.0
        for x, y in zip(s.xs, s.ys, strict=True):
            pts.append(f"{f.x(x):.1f},{f.y(prev):.1f}")
            pts.append(f"{f.x(x):.1f},{f.y(y):.1f}")
            prev = y
        parts.append(
            f'<polyline points="{" ".join(pts)}" fill="none" stroke="{_color(s, i)}" stroke-width="2"/>\n'
        )
    parts += f.legend(series)
    parts.append("</svg>\n")
    return "".join(parts)


def scatter_chart(
    title: str,
    series: Sequence[Series],
    x_label: str = "",
    y_label: str = "",
    *,
    width: int = 720,
    height: int = 420,
    radius: float = 2.0,
) -> str:
    f = _Frame(series, width, height, False, None)
    parts = f.axes(title, x_label, y_label)
    for i, s in enumerate(series):
        c = _color(s, i)
        parts.extend(
            f'<circle cx="{f.x(x):.1f}" cy="{f.y(y):.1f}" r="{radius}" fill="{c}" fill-opacity="0.6"/>\n'
            for x, y in zip(s.xs, s.ys, strict=True)
        )
    parts += f.legend(series)
    parts.append("</svg>\n")
    return "".join(parts)
