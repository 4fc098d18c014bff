"""Minimal self-contained SVG line charts."""

from __future__ import annotations

from datetime import date
from typing import Sequence
from xml.sax.saxutils import escape

from episense.series import DailySeries

WIDTH, HEIGHT = 720, 360
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 20, 36, 48
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def line_chart(
    series: Sequence[tuple[str, DailySeries]],
    *,
    title: str = "",
    y_label: str = "daily new cases",
    marker: date | None = None,
    marker_label: str = "divergence",
) -> str:
    """Render dated series on a shared axis with an optional vertical date marker."""
    if not series:
        raise ValueError("nothing to plot")
    start = min(s.start_date for _, s in series)
    end = max(s.end_date for _, s in series)
    span_days = max(1, (end - start).days)
    ys = [v for _, s in series for v in s.values]
    y_lo, y_hi = min(0.0, min(ys)), max(ys)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(d: date) -> float:
        return MARGIN_L + plot_w * (d - start).days / span_days

    def py(v: float) -> float:
        return MARGIN_T + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    x0, x1 = MARGIN_L, WIDTH - MARGIN_R
    y0, y1 = HEIGHT - MARGIN_B, MARGIN_T
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    for frac in (0.0, 0.5, 1.0):
        v = y_lo + frac * (y_hi - y_lo)
        out.append(f'<text x="{x0 - 6}" y="{_fmt(py(v) + 4)}" text-anchor="end" font-size="10">{v:.4g}</text>')
    for d in (start, end):
        out.append(f'<text x="{_fmt(px(d))}" y="{y0 + 16}" text-anchor="middle" font-size="10">{d.isoformat()}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 8}" text-anchor="middle" font-size="12">date</text>')
    out.append(
        f'<text x="14" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {(y0 + y1) / 2:.0f})">{escape(y_label)}</text>'
    )
    for k, (name, s) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        pts = " ".join(f"{_fmt(px(d))},{_fmt(py(v))}" for d, v in zip(s.dates(), s.values))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = MARGIN_T + 14 * k
        out.append(f'<line x1="{x1 - 120}" y1="{ly}" x2="{x1 - 100}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{x1 - 96}" y="{ly + 4}" font-size="11">{escape(name)}</text>')
    if marker is not None and start <= marker <= end:
        mx = _fmt(px(marker))
        out.append(f'<line x1="{mx}" y1="{y0}" x2="{mx}" y2="{y1}" stroke="black" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{mx}" y="{y1 - 4}" text-anchor="middle" font-size="10">{escape(marker_label)} {marker.isoformat()}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
