"""Minimal self-contained SVG charts (no plotting library, deterministic output)."""
from __future__ import annotations

from xml.sax.saxutils import escape

W, H = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 40, 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def _f(x: float) -> str:
    return format(x, ".2f")


def _frame(title: str, xlabel: str, ylabel: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W // 2}" y="22" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<text x="{(LEFT + W - RIGHT) // 2}" y="{H - 15}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="18" y="{(TOP + H - BOTTOM) // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 18 {(TOP + H - BOTTOM) // 2})">{escape(ylabel)}</text>',
        f'<line x1="{LEFT}" y1="{H - BOTTOM}" x2="{W - RIGHT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{H - BOTTOM}" stroke="black"/>',
    ]


def _yaxis(lo: float, hi: float, sy) -> list[str]:
    out = []
    for i in range(6):
        v = lo + (hi - lo) * i / 5
        y = sy(v)
        out.append(f'<line x1="{LEFT - 4}" y1="{_f(y)}" x2="{W - RIGHT}" y2="{_f(y)}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_f(y + 4)}" text-anchor="end" font-size="10">{v:.3g}</text>')
    return out


def _legend(labels) -> list[str]:
    out = []
    for i, label in enumerate(labels):
        y = TOP + 10 + 18 * i
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{W - RIGHT + 12}" y="{y - 9}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{W - RIGHT + 30}" y="{y + 1}" font-size="11">{escape(label)}</text>')
    return out


def line_chart(series: dict[str, list[tuple[float, float]]], title: str = "", xlabel: str = "",
               ylabel: str = "", ylim: tuple[float, float] | None = None) -> str:
    if not series or not any(series.values()):
        raise ValueError("no data to plot")
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = min(0.0, min(xs)), max(xs)
    y0, y1 = ylim if ylim else (min(0.0, min(ys)), max(ys) * 1.05 or 1.0)
    sx = lambda x: LEFT + (x - x0) / ((x1 - x0) or 1) * (W - LEFT - RIGHT)
    sy = lambda y: H - BOTTOM - (y - y0) / ((y1 - y0) or 1) * (H - TOP - BOTTOM)
    out = _frame(title, xlabel, ylabel) + _yaxis(y0, y1, sy)
    for x in sorted(set(xs)):
        out.append(f'<text x="{_f(sx(x))}" y="{H - BOTTOM + 16}" text-anchor="middle" font-size="10">{x:g}</text>')
    for i, (label, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        path = " ".join(f"{_f(sx(x))},{_f(sy(y))}" for x, y in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            out.append(f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="3" fill="{color}"/>')
    out += _legend(series)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def grouped_bars(groups: dict[str, dict[str, float]], title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    if not groups or not any(groups.values()):
        raise ValueError("no data to plot")
    labels = list(dict.fromkeys(l for bars in groups.values() for l in bars))
    top = max(v for bars in groups.values() for v in bars.values()) * 1.1 or 1.0
    sy = lambda y: H - BOTTOM - y / top * (H - TOP - BOTTOM)
    out = _frame(title, xlabel, ylabel) + _yaxis(0.0, top, sy)
    slot = (W - LEFT - RIGHT) / len(groups)
    bar = slot * 0.8 / len(labels)
    for g, (name, bars) in enumerate(groups.items()):
        gx = LEFT + g * slot + slot * 0.1
        out.append(f'<text x="{_f(LEFT + (g + 0.5) * slot)}" y="{H - BOTTOM + 16}" text-anchor="middle" '
                   f'font-size="10">{escape(str(name))}</text>')
        for i, label in enumerate(labels):
            if label not in bars:
                continue
            y = sy(bars[label])
            out.append(f'<rect x="{_f(gx + i * bar)}" y="{_f(y)}" width="{_f(bar * 0.95)}" '
                       f'height="{_f(H - BOTTOM - y)}" fill="{PALETTE[i % len(PALETTE)]}"/>')
    out += _legend(labels)
    out.append("</svg>")
    return "\n".join(out) + "\n"
