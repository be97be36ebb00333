"""Static SVG charts: x = stem, y = filtration."""
from __future__ import annotations

from typing import Iterable, Mapping
from xml.sax.saxutils import escape

from .linalg import AbelianGroupPresentation

GENERATOR = "tqmf-chart 1"
CELL = 28
MARGIN = 40
DOT = 3.5


def _summands(g: AbelianGroupPresentation) -> list[str]:
    return ["Z"] * g.free_rank + [f"Z/{d}" for d in g.torsion]


def adams_chart(
    groups: Mapping[tuple[int, int], AbelianGroupPresentation],
    arrows: Iterable[tuple[tuple[int, int], tuple[int, int]]] = (),
    labels: Mapping[tuple[int, int], Iterable[str]] | None = None,
    title: str = "",
    x_max: int | None = None,
    y_max: int | None = None,
) -> str:
    """Render groups keyed by (filtration, stem).

    Z/2 summands are dots, other summands are labelled squares; each arrow
    joins a source spot to a target spot.  Output is deterministic.
    """
    labels = labels or {}
    spots = {k: g for k, g in groups.items() if not g.is_trivial()}
    xs = [k[1] for k in spots] or [0]
    ys = [k[0] for k in spots] or [0]
    x_max = max(xs) if x_max is None else x_max
    y_max = max(ys) if y_max is None else y_max
    width = 2 * MARGIN + (x_max + 1) * CELL
    height = 2 * MARGIN + (y_max + 1) * CELL

    def px(stem: int) -> float:
        return MARGIN + (stem + 0.5) * CELL

    def py(s: int) -> float:
        return height - MARGIN - (s + 0.5) * CELL

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="9">',
        f"<!-- generator: {GENERATOR} -->",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN / 2:.1f}" font-size="12">{escape(title)}</text>')
    for x in range(x_max + 2):
        gx = MARGIN + x * CELL
        out.append(f'<line x1="{gx}" y1="{MARGIN}" x2="{gx}" y2="{height - MARGIN}" stroke="#eee"/>')
        if x <= x_max and x % 2 == 0:
            out.append(f'<text x="{px(x):.1f}" y="{height - MARGIN + 14}" text-anchor="middle">{x}</text>')
    for y in range(y_max + 2):
        gy = height - MARGIN - y * CELL
        out.append(f'<line x1="{MARGIN}" y1="{gy}" x2="{width - MARGIN}" y2="{gy}" stroke="#eee"/>')
        if y <= y_max:
            out.append(f'<text x="{MARGIN - 8}" y="{py(y) + 3:.1f}" text-anchor="end">{y}</text>')
    out.append(f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle">stem</text>')
    out.append(f'<text x="12" y="{height / 2:.1f}" transform="rotate(-90 12 {height / 2:.1f})" text-anchor="middle">filtration s</text>')

    for (src, tgt) in sorted(arrows):
        if src in spots and tgt in spots:
            out.append(
                f'<line x1="{px(src[1]):.1f}" y1="{py(src[0]):.1f}" x2="{px(tgt[1]):.1f}" y2="{py(tgt[0]):.1f}" '
                'stroke="#c33" stroke-width="1"/>'
            )
    for (s, stem), g in sorted(spots.items()):
        parts = _summands(g)
        names = ", ".join(sorted(labels.get((s, stem), ())))
        tip = escape(f"(s={s}, stem={stem}) {g}" + (f" [{names}]" if names else ""))
        k = len(parts)
        out.append("<g>")
        out.append(f"<title>{tip}</title>")
        for i, part in enumerate(parts):
            cx = px(stem) + (i - (k - 1) / 2) * min(7.0, (CELL - 6) / max(k, 1))
            cy = py(s)
            if part == "Z/2":
                out.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="{DOT}" fill="black"/>')
            else:
                out.append(
                    f'<rect x="{cx - 4:.1f}" y="{cy - 4:.1f}" width="8" height="8" fill="none" stroke="black"/>'
                )
        if any(p != "Z/2" for p in parts):
            free = g.free_rank
            tag = f"Z^{free}" if free > 1 else ("Z" if free else "")
            extra = [p for p in parts if p not in ("Z", "Z/2")]
            text = " ".join([t for t in [tag] + extra if t])
            out.append(f'<text x="{px(stem):.1f}" y="{py(s) - 7:.1f}" text-anchor="middle" font-size="7">{escape(text)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
