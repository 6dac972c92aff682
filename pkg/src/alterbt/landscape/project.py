"""BLEU grid evaluation and region-constrained projection of checkpoints."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from ..checkpoint import Checkpoint
from .contours import BleuGrid, ContourRegionSet, grid_axis, point_in_edges
from .plane import PlaneBasis, project_unconstrained

DEFAULT_RANGE = (-0.25, 1.25, -0.25, 1.25)
DEFAULT_RESOLUTION = (31, 31)


class BandNotOnGrid(ValueError):
    pass


@dataclass
class ProjectedPoint:
    id: str
    x_hat: float
    y_hat: float
    x: float
    y: float
    dev_bleu: float
    band: int
    region: int | None
    snapped: bool
    phase: str | None = None
    step: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def eval_grid(plane: PlaneBasis, evaluate: Callable[[np.ndarray], float],
              xy_range=DEFAULT_RANGE, resolution=DEFAULT_RESOLUTION) -> BleuGrid:
    """Dev BLEU at every node of a regular grid over plane coordinates.

    ``evaluate`` maps a parameter vector to BLEU. The anchors must lie
    strictly inside the range.
    """
    x0, x1, y0, y1 = xy_range
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise ValueError("resolution must be at least 2x2")
    if not (x0 < 0.0 and x1 > 1.0 and y0 < 0.0 and y1 > 1.0):
        raise ValueError("grid range must contain the three anchors strictly inside")
    xs, ys = grid_axis(x0, x1, nx), grid_axis(y0, y1, ny)
    values = np.empty((ny, nx))
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            values[j, i] = evaluate(plane.point(float(x), float(y)))
    return BleuGrid(xs, ys, values)


def segment_feet(p, seg_a: np.ndarray, seg_b: np.ndarray, gram: np.ndarray):
    """Closest points of segments ``a->b`` to ``p`` in the metric given by ``gram``.

    Returns ``(distances, feet)`` with shapes ``(n,)`` and ``(n, 2)``.
    """
    p = np.asarray(p, dtype=np.float64)
    d = seg_b - seg_a
    w = p - seg_a
    dd = np.einsum("ni,ij,nj->n", d, gram, d)
    wd = np.einsum("ni,ij,nj->n", w, gram, d)
    s = np.clip(np.divide(wd, dd, out=np.zeros_like(wd), where=dd > 0), 0.0, 1.0)
    feet = seg_a + s[:, None] * d
    r = p - feet
    dist2 = np.einsum("ni,ij,nj->n", r, gram, r)
    return np.sqrt(np.maximum(dist2, 0.0)), feet


def nearest_on_band(regions: ContourRegionSet, band: int, p, gram):
    """Nearest boundary point of the band's regions to ``p``: ``(dist, (x, y), region_id)``.

    Ties go to the lower distance, then the lexicographically smaller point.
    """
    edges = regions.band_edges(band)
    if not edges:
        raise BandNotOnGrid(f"band {band} not represented on grid")
    seg = np.array([e for e, _ in edges], dtype=np.float64)
    rids = np.array([rid for _, rid in edges])
    dist, feet = segment_feet(p, seg[:, 0], seg[:, 1], np.asarray(gram, dtype=np.float64))
    k = np.lexsort((feet[:, 1], feet[:, 0], dist))[0]
    return float(dist[k]), (float(feet[k, 0]), float(feet[k, 1])), int(rids[k])


def snap_point(plane: PlaneBasis, regions: ContourRegionSet, x_hat: float, y_hat: float,
               dev_bleu: float, id: str = "") -> ProjectedPoint:
    band = regions.band_of(dev_bleu)
    members = regions.regions_in_band(band)
    if not members:
        raise BandNotOnGrid(f"band {band} not represented on grid")
    for r in members:
        if point_in_edges((x_hat, y_hat), r.edges):
            return ProjectedPoint(id, x_hat, y_hat, x_hat, y_hat, dev_bleu, band, r.id, False)
    _, (x, y), rid = nearest_on_band(regions, band, (x_hat, y_hat), plane.gram)
    return ProjectedPoint(id, x_hat, y_hat, x, y, dev_bleu, band, rid, True)


def snap_to_region(plane: PlaneBasis, regions: ContourRegionSet, theta, dev_bleu: float,
                   id: str = "") -> ProjectedPoint:
    """Project ``theta`` onto the plane, then move it into the region of its own BLEU band.

    The residual of the least-squares projection is orthogonal to the plane,
    so minimizing the full-space distance over a region reduces to finding
    the in-plane point nearest to the unconstrained projection, measured in
    the metric induced by the Gram matrix.
    """
    x_hat, y_hat = project_unconstrained(plane, theta)
    return snap_point(plane, regions, x_hat, y_hat, dev_bleu, id)


def project_trajectory(plane: PlaneBasis, regions: ContourRegionSet, trajectory) -> list[ProjectedPoint]:
    out = []
    for k, ckpt in enumerate(trajectory):
        if not isinstance(ckpt, Checkpoint):
            ckpt = ckpt.load()
        meta = ckpt.meta
        step = meta.get("global_step")
        pid = meta.get("label") or f"{meta.get('phase', '?')}@{step if step is not None else k}"
        pt = snap_to_region(plane, regions, ckpt, float(meta["dev_bleu"]), pid)
        pt.phase, pt.step = meta.get("phase"), step
        out.append(pt)
    return out
