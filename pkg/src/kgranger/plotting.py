"""Minimal SVG rendering of benchmark results (no plotting dependencies).

One grouped boxplot: x groups are series lengths, one box per method inside
each group.  Boxes span Q1..Q3 with the median marked, whiskers span the
bootstrap CI of the median, and IQR outliers appear as diamonds.  Output is
a plain SVG string built deterministically from the summaries.
"""

from __future__ import annotations

from .evaluate import BenchmarkReport, MethodSummary

_PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3")

_WIDTH = 820
_HEIGHT = 480
_MARGIN_LEFT = 64
_MARGIN_RIGHT = 150
_MARGIN_TOP = 36
_MARGIN_BOTTOM = 56


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def render_boxplot(
    summaries: list[MethodSummary] | tuple[MethodSummary, ...],
    title: str = "edge-detection AUC by series length",
) -> str:
    """Render method summaries as a grouped SVG boxplot."""
    drawable = [s for s in summaries if s.summary is not None]
    if not drawable:
        raise ValueError("nothing to plot: every summary is empty")
    lengths = sorted({s.n_samples for s in drawable})
    methods = []
    for s in drawable:  # preserve first-seen method order
        if s.method not in methods:
            methods.append(s.method)
    by_key = {(s.method, s.n_samples): s for s in drawable}

    plot_w = _WIDTH - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = _HEIGHT - _MARGIN_TOP - _MARGIN_BOTTOM
    group_w = plot_w / len(lengths)
    slot_w = group_w / (len(methods) + 1)
    box_w = slot_w * 0.62

    def x_pos(length_idx: int, method_idx: int) -> float:
        left = _MARGIN_LEFT + length_idx * group_w
        return left + slot_w * (method_idx + 1)

    def y_pos(value: float) -> float:
        clamped = min(max(value, 0.0), 1.0)
        return _MARGIN_TOP + (1.0 - clamped) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_MARGIN_LEFT}" y="22" font-family="sans-serif" '
        f'font-size="14">{title}</text>',
    ]
    # y gridlines and labels every 0.1
    for tick in range(11):
        v = tick / 10.0
        y = y_pos(v)
        parts.append(
            f'<line x1="{_MARGIN_LEFT}" y1="{_fmt(y)}" '
            f'x2="{_MARGIN_LEFT + plot_w}" y2="{_fmt(y)}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{_fmt(y + 4)}" '
            f'font-family="sans-serif" font-size="11" '
            f'text-anchor="end">{v:.1f}</text>'
        )
    # x group labels
    for gi, length in enumerate(lengths):
        cx = _MARGIN_LEFT + gi * group_w + group_w / 2
        parts.append(
            f'<text x="{_fmt(cx)}" y="{_HEIGHT - _MARGIN_BOTTOM + 22}" '
            f'font-family="sans-serif" font-size="12" '
            f'text-anchor="middle">T={length}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_LEFT + plot_w / 2:.0f}" y="{_HEIGHT - 12}" '
        f'font-family="sans-serif" font-size="12" '
        f'text-anchor="middle">series length</text>'
    )
    parts.append(
        f'<text x="16" y="{_MARGIN_TOP + plot_h / 2:.0f}" '
        f'font-family="sans-serif" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {_MARGIN_TOP + plot_h / 2:.0f})">AUC</text>'
    )
    # boxes
    for gi, length in enumerate(lengths):
        for mi, method in enumerate(methods):
            entry = by_key.get((method, length))
            if entry is None or entry.summary is None:
                continue
            s = entry.summary
            color = _PALETTE[mi % len(_PALETTE)]
            cx = x_pos(gi, mi)
            half = box_w / 2
            y_q1, y_q3 = y_pos(s.q1), y_pos(s.q3)
            y_med = y_pos(s.median)
            y_lo, y_hi = y_pos(s.ci_low), y_pos(s.ci_high)
            parts.append(
                f'<line x1="{_fmt(cx)}" y1="{_fmt(y_hi)}" x2="{_fmt(cx)}" '
                f'y2="{_fmt(y_lo)}" stroke="{color}" stroke-width="1"/>'
            )
            for y_cap in (y_hi, y_lo):
                parts.append(
                    f'<line x1="{_fmt(cx - half * 0.6)}" y1="{_fmt(y_cap)}" '
                    f'x2="{_fmt(cx + half * 0.6)}" y2="{_fmt(y_cap)}" '
                    f'stroke="{color}" stroke-width="1"/>'
                )
            parts.append(
                f'<rect x="{_fmt(cx - half)}" y="{_fmt(y_q3)}" '
                f'width="{_fmt(box_w)}" height="{_fmt(max(y_q1 - y_q3, 0.5))}" '
                f'fill="{color}" fill-opacity="0.35" stroke="{color}" '
                f'stroke-width="1.2"/>'
            )
            parts.append(
                f'<line x1="{_fmt(cx - half)}" y1="{_fmt(y_med)}" '
                f'x2="{_fmt(cx + half)}" y2="{_fmt(y_med)}" '
                f'stroke="#e07b00" stroke-width="2"/>'
            )
            for value in s.outliers:
                y_out = y_pos(value)
                parts.append(
                    f'<path d="M {_fmt(cx)} {_fmt(y_out - 4)} '
                    f'L {_fmt(cx + 4)} {_fmt(y_out)} '
                    f'L {_fmt(cx)} {_fmt(y_out + 4)} '
                    f'L {_fmt(cx - 4)} {_fmt(y_out)} Z" '
                    f'fill="#2e8b57" stroke="none"/>'
                )
    # legend
    legend_x = _MARGIN_LEFT + plot_w + 16
    for mi, method in enumerate(methods):
        color = _PALETTE[mi % len(_PALETTE)]
        y = _MARGIN_TOP + 10 + mi * 22
        parts.append(
            f'<rect x="{legend_x}" y="{y}" width="14" height="14" '
            f'fill="{color}" fill-opacity="0.35" stroke="{color}"/>'
        )
        parts.append(
            f'<text x="{legend_x + 20}" y="{y + 11}" '
            f'font-family="sans-serif" font-size="12">{method}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def save_boxplot(report: BenchmarkReport, path, title: str | None = None) -> None:
    svg = (
        render_boxplot(report.summaries)
        if title is None
        else render_boxplot(report.summaries, title)
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg)
