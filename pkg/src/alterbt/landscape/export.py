"""JSON and SVG output for a computed landscape."""

from __future__ import annotations

import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .contours import BleuGrid, ContourRegionSet
from .plane import PlaneBasis
from .project import ProjectedPoint


def landscape_dict(grid: BleuGrid, regions: ContourRegionSet, points: list[ProjectedPoint],
                   plane: PlaneBasis | None = None, meta: dict | None = None) -> dict:
    levels = regions.levels
    bounds = [None] + list(levels) + [None]
    out = {
        "grid": {"xs": grid.xs.tolist(), "ys": grid.ys.tolist(), "values": grid.values.tolist()},
        "levels": list(levels),
        "contours": [
            {"level": levels[li], "polylines": [[list(p) for p in line] for line in lines]}
            for li, lines in regions.contours.items()
        ],
        "regions": [
            {
                "id": r.id,
                "band": r.band,
                "band_range": [bounds[r.band], bounds[r.band + 1]],
                "area": r.area,
                "rings": [[list(p) for p in ring] for ring in r.rings],
            }
            for r in regions.regions
        ],
        "points": [p.to_dict() for p in points],
    }
    if plane is not None:
        out["plane"] = {"A": plane.A, "B": plane.B, "C": plane.C, "config_hash": plane.config_hash}
    if meta:
        out["meta"] = meta
    return out


def export_landscape(grid, regions, points, path, plane=None, meta=None) -> None:
    data = landscape_dict(grid, regions, points, plane, meta)
    Path(path).write_text(json.dumps(data, allow_nan=False), encoding="utf-8")


def load_landscape(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _band_color(band: int, n_bands: int) -> str:
    # light yellow (low BLEU) to dark blue (high BLEU)
    lo, hi = (255, 247, 188), (37, 52, 148)
    t = band / max(n_bands - 1, 1)
    r, g, b = (round(a + t * (c - a)) for a, c in zip(lo, hi))
    return f"#{r:02x}{g:02x}{b:02x}"


def _star(cx: float, cy: float, r: float) -> str:
    pts = []
    for k in range(10):
        rad = r if k % 2 == 0 else r * 0.45
        ang = -math.pi / 2 + k * math.pi / 5
        pts.append(f"{cx + rad * math.cos(ang):.2f},{cy + rad * math.sin(ang):.2f}")
    return " ".join(pts)


def render_svg(grid: BleuGrid, regions: ContourRegionSet, points: list[ProjectedPoint], path,
               size: int = 600, margin: int = 40) -> None:
    """Filled bands, contour lines and the projected trajectory.

    Segments ending in an S-phase checkpoint are dashed, A-phase ones solid.
    """
    x0, x1, y0, y1 = grid.bounds
    w = size - 2 * margin

    def px(x, y):
        return margin + (x - x0) / (x1 - x0) * w, margin + (y1 - y) / (y1 - y0) * w

    n_bands = len(regions.levels) + 1
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    for r in regions.regions:
        d = " ".join(
            "M " + " L ".join("%.3f %.3f" % px(*p) for p in ring) + " Z" for ring in r.rings if len(ring) >= 3
        )
        parts.append(
            f'<path d="{d}" fill="{_band_color(r.band, n_bands)}" fill-rule="evenodd" stroke="none">'
            f"<title>region {r.id}, band {r.band}</title></path>"
        )
    for li, lines in regions.contours.items():
        for line in lines:
            pts = " ".join("%.3f,%.3f" % px(*p) for p in line)
            parts.append(f'<polyline points="{pts}" fill="none" stroke="#333" stroke-width="0.8"/>')
    for a, b in zip(points, points[1:]):
        (ax, ay), (bx, by) = px(a.x, a.y), px(b.x, b.y)
        dash = ' stroke-dasharray="6,4"' if b.phase == "S" else ""
        parts.append(
            f'<line x1="{ax:.3f}" y1="{ay:.3f}" x2="{bx:.3f}" y2="{by:.3f}" stroke="#d62728" stroke-width="1.8"{dash}/>'
        )
    for p in points:
        cx, cy = px(p.x, p.y)
        parts.append(
            f'<polygon points="{_star(cx, cy, 7)}" fill="#d62728" stroke="black" stroke-width="0.5">'
            f"<title>{escape(p.id)}: BLEU {p.dev_bleu:.2f}</title></polygon>"
        )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{w}" height="{w}" fill="none" stroke="black"/>'
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")
