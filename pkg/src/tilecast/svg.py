"""Standalone SVG emission for recall-versus-time step plots.

One SVG per data rate; one panel per transmission time limit; exactly
two step polylines per panel (baseline and proposed). No plotting
dependency: the files are small, deterministic XML.
"""

from __future__ import annotations

from dataclasses import dataclass

from .metrics import TimelineReport

_PANEL_W = 300
_PANEL_H = 220
_MARGIN_L = 46
_MARGIN_R = 14
_MARGIN_T = 34
_MARGIN_B = 36

_BASE_COLOR = "#c0392b"
_PROP_COLOR = "#2471a3"


@dataclass(frozen=True)
class Panel:
    title: str
    baseline: TimelineReport
    proposed: TimelineReport


def _step_points(report: TimelineReport, t_max: float) -> list[tuple[float, float]]:
    pts = [(0.0, 0.0)]
    level = 0.0
    for ev in report.events:
        pts.append((ev.time_s, level))
        pts.append((ev.time_s, ev.recall))
        level = ev.recall
    if not report.events or report.events[-1].time_s < t_max:
        pts.append((t_max, level))
    return pts


def _polyline(points, x0, y0, w, h, t_max, color, name) -> str:
    def sx(t):
        return x0 + (t / t_max) * w if t_max > 0 else x0

    def sy(r):
        return y0 + h - r * h

    coords = " ".join(f"{sx(t):.2f},{sy(r):.2f}" for t, r in points)
    return (
        f'<polyline class="{name}" fill="none" stroke="{color}" '
        f'stroke-width="1.6" points="{coords}"/>'
    )


def render_recall_svg(path, rate_kbps: float, panels: list[Panel]) -> None:
    """Write the recall-vs-time figure for one data rate."""
    total_w = len(panels) * _PANEL_W
    total_h = _PANEL_H
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" '
        f'viewBox="0 0 {total_w} {total_h}">',
        f'<title>recall vs time at {rate_kbps:g} kbit/s</title>',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, panel in enumerate(panels):
        ox = i * _PANEL_W
        x0 = ox + _MARGIN_L
        y0 = _MARGIN_T
        w = _PANEL_W - _MARGIN_L - _MARGIN_R
        h = _PANEL_H - _MARGIN_T - _MARGIN_B
        t_max = max(panel.baseline.t_rs, panel.proposed.t_rs, 1e-9)
        parts.append(f'<g class="panel" data-limit="{panel.title}">')
        parts.append(
            f'<text x="{ox + _PANEL_W / 2:.1f}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{panel.title}</text>'
        )
        # axes
        parts.append(
            f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y0 + h}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{x0}" y1="{y0 + h}" x2="{x0 + w}" y2="{y0 + h}" stroke="black" stroke-width="1"/>'
        )
        for frac, label in ((0.0, "0"), (0.5, "0.5"), (1.0, "1")):
            yy = y0 + h - frac * h
            parts.append(
                f'<text x="{x0 - 6}" y="{yy + 4:.1f}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10">{label}</text>'
            )
        parts.append(
            f'<text x="{x0 + w:.1f}" y="{y0 + h + 14}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{t_max:.0f}</text>'
        )
        parts.append(
            f'<text x="{x0 + w / 2:.1f}" y="{y0 + h + 28}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">time (s)</text>'
        )
        parts.append(
            _polyline(_step_points(panel.baseline, t_max), x0, y0, w, h, t_max, _BASE_COLOR, "baseline")
        )
        parts.append(
            _polyline(_step_points(panel.proposed, t_max), x0, y0, w, h, t_max, _PROP_COLOR, "proposed")
        )
        parts.append("</g>")
    parts.append(
        f'<text x="{_MARGIN_L}" y="18" font-family="sans-serif" font-size="11">'
        f'<tspan fill="{_BASE_COLOR}">baseline</tspan> '
        f'<tspan fill="{_PROP_COLOR}">proposed</tspan></text>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
