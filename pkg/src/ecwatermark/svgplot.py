"""Minimal static SVG renderings for the CLI's optional figure output.

Deliberately tiny: results are data-first (CSV); these files are read-only
visual summaries, so no plotting dependency is pulled in.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

MARGIN = 40
WIDTH = 640
HEIGHT = 400


def _color(i: int) -> str:
    return f"hsl({(i * 47) % 360},65%,55%)"


def histogram_svg(filename, labels, values, reference_line=None, title=""):
    """Bar chart of relative frequencies with an optional dashed reference."""
    n = max(len(values), 1)
    vmax = max(list(values) + ([reference_line] if reference_line else [])) or 1.0
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
    bar_w = plot_w / n
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">'
        f"{escape(title)}</text>",
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for i, (label, value) in enumerate(zip(labels, values)):
        h = plot_h * value / vmax
        x = MARGIN + i * bar_w
        y = HEIGHT - MARGIN - h
        parts.append(
            f'<rect x="{x + 1:.1f}" y="{y:.1f}" width="{bar_w - 2:.1f}" '
            f'height="{h:.1f}" fill="{_color(i)}"/>'
        )
        parts.append(
            f'<text x="{x + bar_w / 2:.1f}" y="{HEIGHT - MARGIN + 12}" '
            f'text-anchor="middle" font-size="7">{escape(str(label))}</text>'
        )
    if reference_line:
        y = HEIGHT - MARGIN - plot_h * reference_line / vmax
        parts.append(
            f'<line x1="{MARGIN}" y1="{y:.1f}" x2="{WIDTH - MARGIN}" y2="{y:.1f}" '
            f'stroke="black" stroke-dasharray="6,4"/>'
        )
    parts.append("</svg>")
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def voronoi_svg(filename, s, cells, title=""):
    """Partition map: one colored square per grid cell, seeds as dots.

    `cells` is an iterable of (gx, gy, seed_point); colors key on the seed.
    """
    cells = list(cells)
    seeds = sorted({c[2] for c in cells}, key=lambda p: (p.x, p.y))
    index = {p: i for i, p in enumerate(seeds)}
    side = WIDTH - 2 * MARGIN
    n = round(len(cells) ** 0.5) or 1
    cell_px = side / n
    scale = side / s
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{WIDTH}">',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">'
        f"{escape(title)}</text>",
    ]
    for gx, gy, owner in cells:
        x = MARGIN + gx * scale
        y = WIDTH - MARGIN - (gy * scale) - cell_px
        parts.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="{cell_px + 0.5:.1f}" '
            f'height="{cell_px + 0.5:.1f}" fill="{_color(index[owner])}"/>'
        )
    for p in seeds:
        x = MARGIN + p.x * scale
        y = WIDTH - MARGIN - p.y * scale
        parts.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="3" fill="black"/>')
    parts.append("</svg>")
    with open(filename, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
