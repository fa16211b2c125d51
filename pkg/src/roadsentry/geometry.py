"""Region-of-interest geometry: trapezoid presets, simple polygons, containment tests.

Coordinates are pixels with the origin at the top-left corner, x growing right
and y growing down. "Counterclockwise" below means a positive shoelace sum in
these coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

Point = tuple[float, float]


@dataclass(frozen=True)
class FrameDims:
    """Frame size in pixels."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 2 or self.height < 2:
            raise ValueError(f"frame must be at least 2x2 pixels, got {self.width}x{self.height}")


@dataclass(frozen=True)
class RoiSpec:
    """Fractional description of the fixed trapezoidal danger region.

    The base sits on the bottom pixel row between ``left_base_frac*w`` and
    ``right_base_frac*w``; the top edge sits on the horizon row
    (``horizon_frac*h``), centered, with half-width ``apex_half_width_frac*w``.
    """

    left_base_frac: float = 0.15
    right_base_frac: float = 0.85
    horizon_frac: float = 0.45
    apex_half_width_frac: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.left_base_frac < self.right_base_frac <= 1.0:
            raise ValueError("need 0 <= left_base_frac < right_base_frac <= 1")
        if not 0.0 < self.horizon_frac < 1.0:
            raise ValueError("horizon_frac must be in (0, 1)")
        if not 0.0 < self.apex_half_width_frac < 0.5:
            raise ValueError("apex_half_width_frac must be in (0, 0.5)")


# Preset base fractions; type 1 is the widest, type 3 the narrowest.
ROI_PRESETS: dict[int, RoiSpec] = {
    1: RoiSpec(left_base_frac=0.10, right_base_frac=0.90),
    2: RoiSpec(left_base_frac=0.15, right_base_frac=0.85),
    3: RoiSpec(left_base_frac=0.20, right_base_frac=0.80),
}


def apply_roi_preset(spec: RoiSpec, roi_type: int) -> RoiSpec:
    """Swap in a preset's base fractions, keeping horizon and apex settings."""
    if roi_type not in ROI_PRESETS:
        raise ValueError(f"roi_type must be one of {sorted(ROI_PRESETS)}, got {roi_type}")
    preset = ROI_PRESETS[roi_type]
    return replace(
        spec,
        left_base_frac=preset.left_base_frac,
        right_base_frac=preset.right_base_frac,
    )


def signed_area(vertices: Sequence[Point]) -> float:
    """Shoelace signed area; positive means counterclockwise in image coordinates."""
    total = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return 0.5 * total


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment_collinear(p: Point, a: Point, b: Point) -> bool:
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _segments_intersect(p1: Point, p2: Point, p3: Point, p4: Point) -> bool:
    d1 = _cross(p3, p4, p1)
    d2 = _cross(p3, p4, p2)
    d3 = _cross(p1, p2, p3)
    d4 = _cross(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment_collinear(p1, p3, p4):
        return True
    if d2 == 0 and _on_segment_collinear(p2, p3, p4):
        return True
    if d3 == 0 and _on_segment_collinear(p3, p1, p2):
        return True
    if d4 == 0 and _on_segment_collinear(p4, p1, p2):
        return True
    return False


class Polygon:
    """Simple polygon with counterclockwise vertices.

    Construction validates the invariants: at least three finite vertices,
    positive shoelace area, and no self-intersection between non-adjacent
    edges. Collinear runs of vertices along one edge are allowed (they occur
    when straight lane fits are sampled at many y-values).
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices: Sequence[Point]) -> None:
        verts = tuple((float(x), float(y)) for x, y in vertices)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for x, y in verts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError("polygon vertices must be finite")
        if signed_area(verts) <= 0.0:
            raise ValueError("polygon vertices must wind counterclockwise with positive area")
        self._check_simple(verts)
        self.vertices = verts

    @staticmethod
    def _check_simple(verts: tuple[Point, ...]) -> None:
        n = len(verts)
        edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue  # adjacent edges share an endpoint by construction
                if _segments_intersect(*edges[i], *edges[j]):
                    raise ValueError("polygon must be simple (non-self-intersecting)")

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def __repr__(self) -> str:
        return f"Polygon({list(self.vertices)!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)


def _point_on_segment(x: float, y: float, a: Point, b: Point) -> bool:
    cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0])
    if abs(cross) > 1e-9 * max(1.0, abs(b[0] - a[0]), abs(b[1] - a[1])):
        return False
    return (
        min(a[0], b[0]) - 1e-12 <= x <= max(a[0], b[0]) + 1e-12
        and min(a[1], b[1]) - 1e-12 <= y <= max(a[1], b[1]) + 1e-12
    )


def point_in_polygon(point: Point, poly: Polygon) -> bool:
    """Even-odd ray-casting containment; points on the boundary count as inside."""
    x, y = float(point[0]), float(point[1])
    verts = poly.vertices
    n = len(verts)
    inside = False
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        if _point_on_segment(x, y, a, b):
            return True
        if (a[1] > y) != (b[1] > y):
            x_hit = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x < x_hit:
                inside = not inside
    return inside


def build_fixed_roi(spec: RoiSpec, dims: FrameDims) -> Polygon:
    """Trapezoid with its base on the bottom pixel row and its top on the horizon row."""
    w = float(dims.width)
    h = float(dims.height)
    base_y = h - 1.0
    top_y = spec.horizon_frac * h
    cx = w / 2.0
    apex = spec.apex_half_width_frac * w
    return Polygon(
        [
            (spec.left_base_frac * w, base_y),
            (cx - apex, top_y),
            (cx + apex, top_y),
            (spec.right_base_frac * w, base_y),
        ]
    )


def horizon_row(spec: RoiSpec, dims: FrameDims) -> float:
    """Pixel row of the horizon split; detections centered at or above it are rejected."""
    return spec.horizon_frac * dims.height


def is_threat_candidate(box, poly: Polygon, horizon_y: float) -> bool:
    """True iff the box center lies below the horizon row AND inside the polygon.

    The horizon test is strict (center.y > horizon_y): anything centered at
    or above the line is rejected outright. `box` is anything with x, y, w,
    h attributes (top-left corner plus size).
    """
    cx = box.x + box.w / 2.0
    cy = box.y + box.h / 2.0
    return cy > horizon_y and point_in_polygon((cx, cy), poly)
