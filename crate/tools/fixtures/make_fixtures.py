"""Writes the chart fixtures under crates/core/tests/fixtures (except bars6)."""
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[2] / "crates/core/tests/fixtures"


def bars3series():
    rnd = random.Random(3)
    colors = ["#d62728", "#1f77b4", "#2ca02c"]
    lines = ['<svg xmlns="http://www.w3.org/2000/svg" width="640" height="360">',
             '  <line id="x-axis" x1="40" y1="320" x2="620" y2="320" stroke="#333333" stroke-width="1"/>',
             '  <line id="y-axis" x1="40" y1="20" x2="40" y2="320" stroke="#333333" stroke-width="1"/>']
    for c in range(8):
        for s, color in enumerate(colors):
            h = rnd.randint(40, 280)
            x = 50 + c * 72 + s * 20
            lines.append(f'  <rect id="s{s}c{c}" x="{x}" y="{320 - h}" width="18" height="{h}" fill="{color}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def scatter():
    rnd = random.Random(11)
    lines = ['<svg xmlns="http://www.w3.org/2000/svg" width="500" height="400">',
             '  <rect id="plot" x="40" y="20" width="440" height="340" fill="#fafafa" stroke="#cccccc" stroke-width="1"/>']
    for i in range(14):
        cx, cy, r = rnd.randint(60, 460), rnd.randint(40, 340), rnd.randint(4, 12)
        lines.append(f'  <circle id="p{i}" cx="{cx}" cy="{cy}" r="{r}" fill="#9e9e9e" stroke="#000000" stroke-width="0.1"/>')
    for i in range(5):
        cx, cy, r = rnd.randint(200, 320), rnd.randint(150, 250), rnd.randint(5, 9)
        lines.append(f'  <circle id="g{i}" cx="{cx}" cy="{cy}" r="{r}" fill="#2ca02c" stroke="#000000" stroke-width="0.1"/>')
    lines.append('  <circle id="legend-dot" cx="60" cy="385" r="5" fill="#2ca02c"/>')
    lines.append('  <text id="legend-label" x="70" y="389" font-size="11" fill="#333333">habitable</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def lines_chart():
    rnd = random.Random(5)
    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="480" height="300">',
           '  <line id="x-axis" x1="40" y1="260" x2="460" y2="260" stroke="#444444" stroke-width="1"/>',
           '  <line id="y-axis" x1="40" y1="20" x2="40" y2="260" stroke="#444444" stroke-width="1"/>']
    for name, color, base in [("a", "#ff7f0e", 200), ("b", "#9467bd", 120)]:
        pts = [(60 + 80 * k, base + rnd.randint(-40, 40)) for k in range(5)]
        d = "M " + " L ".join(f"{x} {y}" for x, y in pts)
        out.append(f'  <path id="line-{name}" d="{d}" fill="none" stroke="{color}" stroke-width="2"/>')
        for k, (x, y) in enumerate(pts):
            out.append(f'  <circle id="m{name}{k}" cx="{x}" cy="{y}" r="3.5" fill="{color}"/>')
    out.append('  <text id="title" x="240" y="14" font-size="12" fill="#222222">Two series</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def heatmap():
    rnd = random.Random(8)
    out = ['<svg xmlns="http://www.w3.org/2000/svg" width="360" height="260">', '  <g transform="translate(60,20)">']
    for r in range(4):
        for c in range(5):
            light = rnd.choice([30, 45, 60, 75, 90])
            out.append(f'    <rect id="h{r}{c}" x="{c * 56}" y="{r * 52}" width="54" height="50" fill="hsl(210,60%,{light}%)"/>')
    out.append("  </g>")
    for r in range(4):
        out.append(f'  <text id="row{r}" x="10" y="{50 + r * 52}" font-size="11" fill="#333333">row {r}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    for name, text in [("bars3series.svg", bars3series()), ("scatter.svg", scatter()),
                       ("lines.svg", lines_chart()), ("heatmap.svg", heatmap())]:
        (OUT / name).write_text(text)
