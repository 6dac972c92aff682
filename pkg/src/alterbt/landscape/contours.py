"""Marching-squares contours and the BLEU-band regions they bound.

Each grid cell is cut by straight chords joining the linear-interpolation
crossings on its edges (saddles resolved by the cell-center average). The
resulting faces are labelled by band, merged across shared edges into
connected regions, and each region keeps its boundary edges, which is all
that point location and nearest-boundary queries need.
"""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

Point = tuple[float, float]
Edge = tuple[Point, Point]


@dataclass
class BleuGrid:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # shape (len(ys), len(xs)); values[j, i] = f(xs[i], ys[j])

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=np.float64)
        self.ys = np.asarray(self.ys, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.ys), len(self.xs)):
            raise ValueError("values must have shape (len(ys), len(xs))")
        if len(self.xs) < 2 or len(self.ys) < 2:
            raise ValueError("grid needs at least 2x2 nodes")
        if np.any(np.diff(self.xs) <= 0) or np.any(np.diff(self.ys) <= 0):
            raise ValueError("grid axes must be strictly increasing")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return float(self.xs[0]), float(self.xs[-1]), float(self.ys[0]), float(self.ys[-1])

    def node(self, x: float, y: float) -> float:
        i = int(np.flatnonzero(self.xs == x)[0])
        j = int(np.flatnonzero(self.ys == y)[0])
        return float(self.values[j, i])

    def edge_value(self, p: Point) -> float:
        """Linear interpolation of node values at a point on a grid line."""
        x, y = p
        i = int(np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.xs) - 2))
        j = int(np.clip(np.searchsorted(self.ys, y, side="right") - 1, 0, len(self.ys) - 2))
        x0, x1, y0, y1 = self.xs[i], self.xs[i + 1], self.ys[j], self.ys[j + 1]
        v = self.values
        if y == y0 or y == y1:
            jj = j if y == y0 else j + 1
            t = (x - x0) / (x1 - x0)
            return float(v[jj, i] + t * (v[jj, i + 1] - v[jj, i]))
        if x == x0 or x == x1:
            ii = i if x == x0 else i + 1
            t = (y - y0) / (y1 - y0)
            return float(v[j, ii] + t * (v[j + 1, ii] - v[j, ii]))
        raise ValueError("point is not on a grid line")


def grid_axis(lo: float, hi: float, n: int) -> np.ndarray:
    """Evenly spaced nodes computed so that exact dyadic nodes (0, 1) come out exact."""
    i = np.arange(n, dtype=np.float64)
    return (lo * (n - 1 - i) + hi * i) / (n - 1)


def band_index(levels, value: float) -> int:
    """Band ``j`` holds ``levels[j-1] <= value < levels[j]``; band 0 is below all levels."""
    return bisect.bisect_right(list(levels), value)


def default_levels(grid: BleuGrid, count: int = 6) -> list[float]:
    lo, hi = float(grid.values.min()), float(grid.values.max())
    if hi <= lo:
        return []
    return list(np.linspace(lo, hi, count + 2)[1:-1])


@dataclass
class Face:
    vertices: list[Point]
    band: int
    area: float


@dataclass
class Region:
    id: int
    band: int
    faces: list[int]
    edges: list[Edge]
    rings: list[list[Point]] = field(default_factory=list)
    area: float = 0.0

    def contains(self, p: Point) -> bool:
        return point_in_edges(p, self.edges)

    def outer_ring(self) -> list[Point]:
        return max(self.rings, key=lambda r: abs(_ring_area(r))) if self.rings else []


@dataclass
class ContourRegionSet:
    levels: list[float]
    contours: dict[int, list[list[Point]]]
    faces: list[Face]
    regions: list[Region]
    bounds: tuple[float, float, float, float]

    def band_of(self, value: float) -> int:
        return band_index(self.levels, value)

    def regions_in_band(self, band: int) -> list[Region]:
        return [r for r in self.regions if r.band == band]

    def band_edges(self, band: int) -> list[tuple[Edge, int]]:
        return [(e, r.id) for r in self.regions_in_band(band) for e in r.edges]

    def locate(self, p: Point) -> int | None:
        """Id of the region containing ``p`` (even-odd rule), or None off-grid."""
        for r in self.regions:
            if r.contains(p):
                return r.id
        return None

    def in_band(self, p: Point, band: int) -> bool:
        return any(r.contains(p) for r in self.regions_in_band(band))


def point_in_edges(p: Point, edges) -> bool:
    """Even-odd ray casting against an unordered edge set (holes handled for free)."""
    x, y = p
    inside = False
    for (x1, y1), (x2, y2) in edges:
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xc:
                inside = not inside
    return inside


def _ring_area(ring) -> float:
    a = 0.0
    for (x1, y1), (x2, y2) in zip(ring, ring[1:] + ring[:1]):
        a += x1 * y2 - x2 * y1
    return 0.5 * a


def _crossing(grid: BleuGrid, n1: tuple[int, int], n2: tuple[int, int], level: float) -> Point:
    # canonical node order so both cells sharing the edge compute identical bits
    a, b = sorted((n1, n2))
    (ia, ja), (ib, jb) = a, b
    va, vb = grid.values[ja, ia], grid.values[jb, ib]
    t = (level - va) / (vb - va)
    if ja == jb:
        xa, xb = grid.xs[ia], grid.xs[ib]
        return (float(xa + t * (xb - xa)), float(grid.ys[ja]))
    ya, yb = grid.ys[ja], grid.ys[jb]
    return (float(grid.xs[ia]), float(ya + t * (yb - ya)))


def _cell_faces(grid: BleuGrid, i: int, j: int, levels: list[float]):
    """Faces of one cell plus the chords (per level index) that separate them."""
    corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]  # counter-clockwise
    vals = [float(grid.values[c[1], c[0]]) for c in corners]
    center = sum(vals) / 4.0

    # boundary points: (coords, value, level index or None)
    pts: list[tuple[Point, float, int | None]] = []
    for k in range(4):
        n1, n2 = corners[k], corners[(k + 1) % 4]
        v1, v2 = vals[k], vals[(k + 1) % 4]
        pts.append(((float(grid.xs[n1[0]]), float(grid.ys[n1[1]])), v1, None))
        start = pts[-1][0]
        crossings = []
        for li, L in enumerate(levels):
            if (v1 >= L) != (v2 >= L):
                p = _crossing(grid, n1, n2, L)
                crossings.append((abs(p[0] - start[0]) + abs(p[1] - start[1]), p, L, li))
        crossings.sort(key=lambda c: c[0])
        pts += [(p, L, li) for _, p, L, li in crossings]

    chord: dict[int, int] = {}
    chords_by_level: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for li, L in enumerate(levels):
        ks = [k for k, (_, _, lev) in enumerate(pts) if lev == li]
        if not ks:
            continue
        if len(ks) == 2:
            pairs = [(ks[0], ks[1])]
        else:
            # saddle: cut off the corners on the side opposite the center value
            cut_above = center < L
            corner_between = _corner_after(pts, ks[0])
            if (vals[corner_between] >= L) == cut_above:
                pairs = [(ks[0], ks[1]), (ks[2], ks[3])]
            else:
                pairs = [(ks[1], ks[2]), (ks[3], ks[0])]
        for a, b in pairs:
            chord[a], chord[b] = b, a
            chords_by_level[li].append((a, b))

    n = len(pts)
    used = [False] * n
    faces = []
    for s in range(n):
        if used[s]:
            continue
        idx = [s]
        used[s] = True
        cur = (s + 1) % n
        via_boundary = True
        while cur != s:
            idx.append(cur)
            if via_boundary and cur in chord:
                cur = chord[cur]
                via_boundary = False
                if cur == s:
                    break
                idx.append(cur)
            used[cur] = True
            cur = (cur + 1) % n
            via_boundary = True
        faces.append(idx)
    out = []
    for idx in faces:
        verts = [pts[k][0] for k in idx]
        area = _ring_area(verts)
        band = band_index(levels, min(pts[k][1] for k in idx))
        out.append(Face(_dedupe(verts), band, area))
    segs = {li: [(pts[a][0], pts[b][0]) for a, b in pairs] for li, pairs in chords_by_level.items()}
    return out, segs


def _corner_after(pts, k: int) -> int:
    """Index (0-3) of the first cell corner met walking forward from boundary point ``k``."""
    n = len(pts)
    corner = -1
    for step in range(1, n + 1):
        if pts[(k + step) % n][2] is None:
            # corners are stored in order, so count how many precede this one
            pos = (k + step) % n
            corner = sum(1 for q in range(pos) if pts[q][2] is None)
            break
    return corner


def _dedupe(verts: list[Point]) -> list[Point]:
    out = []
    for v in verts:
        if not out or out[-1] != v:
            out.append(v)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def _key(p: Point, q: Point) -> Edge:
    return (p, q) if p <= q else (q, p)


def _chain(segments: list[Edge]) -> list[list[Point]]:
    """Join segments sharing endpoints into polylines (closed ones repeat the first point)."""
    adj: dict[Point, list[int]] = defaultdict(list)
    for k, (p, q) in enumerate(segments):
        adj[p].append(k)
        adj[q].append(k)
    used = [False] * len(segments)
    lines = []
    # start at dangling endpoints first so open polylines come out whole
    starts = [p for p, ks in adj.items() if len(ks) % 2 == 1] + list(adj)
    for start in starts:
        while True:
            ks = [k for k in adj[start] if not used[k]]
            if not ks:
                break
            line = [start]
            cur = start
            while True:
                nxt = [k for k in adj[cur] if not used[k]]
                if not nxt:
                    break
                k = nxt[0]
                used[k] = True
                p, q = segments[k]
                cur = q if p == cur else p
                line.append(cur)
                if cur == start:
                    break
            lines.append(line)
    return lines


def extract_contours(grid: BleuGrid, levels) -> ContourRegionSet:
    levels = [float(L) for L in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ValueError("levels must be strictly increasing")
    nx, ny = len(grid.xs), len(grid.ys)
    x0, x1, y0, y1 = grid.bounds
    tiny = 1e-14 * (x1 - x0) * (y1 - y0)

    faces: list[Face] = []
    contour_segs: dict[int, list[Edge]] = defaultdict(list)
    for j in range(ny - 1):
        for i in range(nx - 1):
            cell_faces, segs = _cell_faces(grid, i, j, levels)
            faces += [f for f in cell_faces if abs(f.area) > tiny and len(f.vertices) >= 3]
            for li, ss in segs.items():
                contour_segs[li] += [s for s in ss if s[0] != s[1]]

    # merge same-band faces across shared edges
    parent = list(range(len(faces)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    owners: dict[tuple[int, Edge], list[int]] = defaultdict(list)
    for fi, f in enumerate(faces):
        vs = f.vertices
        for p, q in zip(vs, vs[1:] + vs[:1]):
            if p != q:
                owners[(f.band, _key(p, q))].append(fi)
    for (band, _), fis in owners.items():
        for other in fis[1:]:
            parent[find(other)] = find(fis[0])

    groups: dict[int, list[int]] = defaultdict(list)
    for fi in range(len(faces)):
        groups[find(fi)].append(fi)
    region_of_face = {}
    regions = []
    for rid, (_, fis) in enumerate(sorted(groups.items(), key=lambda kv: min(kv[1]))):
        regions.append(Region(rid, faces[fis[0]].band, fis, []))
        for fi in fis:
            region_of_face[fi] = rid
    for (band, edge), fis in owners.items():
        if len(fis) == 1:
            regions[region_of_face[fis[0]]].edges.append(edge)
    for r in regions:
        r.edges.sort()
        r.rings = [ring[:-1] if ring[0] == ring[-1] else ring for ring in _chain(r.edges)]
        r.area = float(sum(abs(faces[fi].area) for fi in r.faces))

    contours = {li: _chain(sorted(segs)) for li, segs in sorted(contour_segs.items())}
    return ContourRegionSet(levels, contours, faces, regions, grid.bounds)
