"""Metric landscape on the plane through three checkpoints, and trajectory projection."""

from .contours import BleuGrid, ContourRegionSet, Region, band_index, default_levels, extract_contours, grid_axis
from .export import export_landscape, load_landscape, render_svg
from .plane import DegeneratePlane, PlaneBasis, make_plane, project_unconstrained
from .project import (
    DEFAULT_RANGE,
    DEFAULT_RESOLUTION,
    BandNotOnGrid,
    ProjectedPoint,
    eval_grid,
    project_trajectory,
    snap_point,
    snap_to_region,
)

__all__ = [
    "BandNotOnGrid", "BleuGrid", "ContourRegionSet", "DEFAULT_RANGE", "DEFAULT_RESOLUTION",
    "DegeneratePlane", "PlaneBasis", "ProjectedPoint", "Region", "band_index", "default_levels",
    "eval_grid", "export_landscape", "extract_contours", "grid_axis", "load_landscape",
    "make_plane", "project_trajectory", "project_unconstrained", "render_svg", "snap_point",
    "snap_to_region",
]
