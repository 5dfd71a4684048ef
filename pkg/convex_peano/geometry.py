"""
Planar region kernel.

Regions are shapely polygons in the normalized frame of the domain.  A
convex region is a single ``Polygon`` oriented counter-clockwise; set
differences (disturbances, increments of nets) may be ``MultiPolygon``.  The
empty region is ``Polygon()``; anything whose area is below
``config.SLIVER_AREA`` is treated as empty.

Circular arcs are discretized into ``config.N_ARC`` segments per full disc,
so tolerances downstream are expressed through ``arc_tolerance``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np
import shapely
from shapely import affinity
from shapely.geometry import MultiPolygon, Point as _ShapelyPoint, Polygon, box
from shapely.geometry.base import BaseGeometry
from shapely.geometry.polygon import orient
from shapely.ops import nearest_points, unary_union
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import directed_hausdorff, pdist

from . import config

Point = Tuple[float, float]
Region = BaseGeometry


# -----------------------------------------------------------------------------
# Construction and normalisation of regions
# -----------------------------------------------------------------------------

def empty_region() -> Polygon:
    return Polygon()


def is_empty(t: Region | None) -> bool:
    """True for ``None``, empty geometries and area-null slivers."""
    return t is None or t.is_empty or t.area <= config.SLIVER_AREA


def polygons(g: Region | None) -> List[Polygon]:
    """Flatten any geometry into its polygonal parts."""
    if g is None or g.is_empty:
        return []
    if isinstance(g, Polygon):
        return [g]
    if hasattr(g, "geoms"):
        parts: List[Polygon] = []
        for sub in g.geoms:
            parts.extend(polygons(sub))
        return parts
    return []


def clean(g: Region | None) -> Region:
    """Repair ``g`` and drop parts below the sliver area.

    The result is the empty polygon, a CCW ``Polygon`` or a ``MultiPolygon``
    of CCW parts.
    """
    if g is None or g.is_empty:
        return Polygon()
    if not g.is_valid:
        g = shapely.make_valid(g)
    parts = [p for p in polygons(g) if p.area > config.SLIVER_AREA]
    if not parts:
        return Polygon()
    if len(parts) == 1:
        return orient(parts[0])
    return MultiPolygon([orient(p) for p in parts])


def region(points: Iterable[Sequence[float]]) -> Region:
    """Polygon through ``points`` (closing vertex optional)."""
    return clean(Polygon([tuple(map(float, p)) for p in points]))


def rectangle(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    return orient(box(x0, y0, x1, y1))


def union_all(regions: Iterable[Region]) -> Region:
    parts = [r for r in regions if not is_empty(r)]
    if not parts:
        return Polygon()
    return clean(unary_union(parts))


@dataclass(frozen=True)
class Disc:
    center: Point
    radius: float

    def __post_init__(self) -> None:
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ValueError(f"disc radius must be positive, got {self.radius}")

    def polygon(
        self,
        n_arc: int = config.N_ARC,
        circumscribed: bool = False,
        phase: float = 0.0,
    ) -> Polygon:
        """Regular ``n_arc``-gon approximating the disc.

        The inscribed polygon lies inside the disc; the circumscribed one
        contains it and touches the circle at the edge midpoints, one of
        which sits at angle ``phase`` when ``phase`` is given as an edge
        direction (vertices are then offset by half a step).
        """
        radius = self.radius / math.cos(math.pi / n_arc) if circumscribed else self.radius
        offset = math.pi / n_arc if circumscribed else 0.0
        angles = phase + offset + 2.0 * math.pi * np.arange(n_arc) / n_arc
        xs = self.center[0] + radius * np.cos(angles)
        ys = self.center[1] + radius * np.sin(angles)
        return Polygon(np.column_stack([xs, ys]))


def arc_tolerance(radius: float, n_arc: int = config.N_ARC) -> float:
    """Sagitta of one discretization step: ``radius * (1 - cos(pi/n_arc))``."""
    return radius * (1.0 - math.cos(math.pi / n_arc))


# -----------------------------------------------------------------------------
# Clipping
# -----------------------------------------------------------------------------

_LE = {"<=", "≤", "le"}
_GE = {">=", "≥", "ge"}


def clip_disc(t: Region, b: Disc, n_arc: int = config.N_ARC) -> Region:
    """Intersect ``t`` with the inscribed ``n_arc``-gon of ``b``."""
    if n_arc < 8:
        raise ValueError(f"n_arc must be at least 8, got {n_arc}")
    if is_empty(t):
        return Polygon()
    return clean(t.intersection(b.polygon(n_arc)))


def clip_halfplane(t: Region, axis: str, bound: float, sense: str) -> Region:
    """Exact clip of ``t`` by ``(axis sense bound)``, e.g. ``x <= 0.5``."""
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    if sense not in _LE and sense not in _GE:
        raise ValueError(f"unknown sense {sense!r}")
    if is_empty(t):
        return Polygon()
    minx, miny, maxx, maxy = t.bounds
    lo_axis, hi_axis = (minx, maxx) if axis == "x" else (miny, maxy)
    if sense in _LE:
        lo, hi = lo_axis - 1.0, bound
    else:
        lo, hi = bound, hi_axis + 1.0
    if lo >= hi:
        return Polygon()
    if axis == "x":
        window = box(lo, miny - 1.0, hi, maxy + 1.0)
    else:
        window = box(minx - 1.0, lo, maxx + 1.0, hi)
    return clean(t.intersection(window))


# -----------------------------------------------------------------------------
# Metric queries
# -----------------------------------------------------------------------------

def extent(t: Region, mode: str = "diameter") -> float:
    """Width (``x``), height (``y``) or diameter of ``t``."""
    if t is None or t.is_empty:
        raise ValueError("extent of an empty region")
    minx, miny, maxx, maxy = t.bounds
    if mode == "x":
        return float(maxx - minx)
    if mode == "y":
        return float(maxy - miny)
    if mode != "diameter":
        raise ValueError(f"unknown extent mode {mode!r}")
    coords = np.unique(shapely.get_coordinates(t.convex_hull), axis=0)
    if len(coords) < 2:
        return 0.0
    return float(pdist(coords).max())


def separation(r: Region, s: Region) -> float:
    """Infimum distance; ``inf`` when either side is empty."""
    if is_empty(r) or is_empty(s):
        return math.inf
    return float(r.distance(s))


def separated(r: Region, s: Region, eps: float = config.EPS_SEP) -> bool:
    return separation(r, s) > eps


def min_dist_projection(s: Region, x: Point) -> Point:
    """Nearest point of the convex region ``s`` to ``x``."""
    if is_empty(s):
        raise ValueError("projection onto an empty region")
    p = _ShapelyPoint(x)
    if s.covers(p) or s.distance(p) <= config.EPS_GEOM:
        raise ValueError(f"point {tuple(x)} lies in the region")
    q = nearest_points(s, p)[0]
    return (float(q.x), float(q.y))


def hausdorff(a: Region, b: Region) -> float:
    """Hausdorff distance between two regions (as filled sets).

    Distances are taken from the vertices of each side to the other area,
    which is exact when both regions are convex.
    """
    if is_empty(a) and is_empty(b):
        return 0.0
    if is_empty(a) or is_empty(b):
        return math.inf
    pa = shapely.points(shapely.get_coordinates(a))
    pb = shapely.points(shapely.get_coordinates(b))
    return float(max(shapely.distance(pa, b).max(), shapely.distance(pb, a).max()))


def cloud_hausdorff(p: np.ndarray, q: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point clouds."""
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    q = np.asarray(q, dtype=float).reshape(-1, 2)
    if len(p) == 0 or len(q) == 0:
        raise ValueError("Hausdorff distance of an empty point cloud")
    return float(max(directed_hausdorff(p, q)[0], directed_hausdorff(q, p)[0]))


def equal_regions(a: Region, b: Region, tol: float = config.EQUALITY_TOL) -> bool:
    if is_empty(a) or is_empty(b):
        return is_empty(a) and is_empty(b)
    if max(abs(u - v) for u, v in zip(a.bounds, b.bounds)) > tol:
        return False
    return hausdorff(a, b) <= tol


def covers_within(big: Region, small: Region, tol: float) -> bool:
    """``small`` lies inside ``big`` grown by ``tol``."""
    if is_empty(small):
        return True
    if is_empty(big):
        return False
    pts = shapely.points(shapely.get_coordinates(small))
    return bool(shapely.distance(pts, big).max() <= tol)


def region_hull_deficiency(t: Region) -> float:
    """Exact ``area(hull(t)) - area(t)``."""
    if is_empty(t):
        return 0.0
    return float(max(t.convex_hull.area - t.area, 0.0))


def convex_union(a: Region, b: Region, snap: float = config.HULL_SNAP_AREA) -> Region:
    """Union of ``a`` and ``b``, replaced by its hull when nearly convex."""
    if is_empty(a):
        return clean(b)
    if is_empty(b):
        return clean(a)
    u = clean(unary_union([a, b]))
    hull = u.convex_hull
    if hull.area - u.area <= snap:
        return orient(hull)
    return u


def fingerprint(t: Region) -> str:
    """Stable key of a region: sha1 of its quantized vertex set."""
    if is_empty(t):
        return "empty"
    coords = shapely.get_coordinates(t)
    q = np.unique(np.round(coords / config.EPS_GEOM).astype(np.int64), axis=0)
    return hashlib.sha1(q.tobytes()).hexdigest()


# -----------------------------------------------------------------------------
# Sampling and the convexity oracle
# -----------------------------------------------------------------------------

class HullDeficiency(NamedTuple):
    area: float
    degenerate: bool


def sample_region(t: Region, spacing: float) -> np.ndarray:
    """Grid points of ``t`` plus boundary points, both at ``spacing``."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if is_empty(t):
        return np.empty((0, 2))
    minx, miny, maxx, maxy = t.bounds
    xs = np.arange(minx, maxx + 0.5 * spacing, spacing)
    ys = np.arange(miny, maxy + 0.5 * spacing, spacing)
    gx, gy = np.meshgrid(xs, ys)
    gx, gy = gx.ravel(), gy.ravel()
    inside = shapely.contains_xy(t, gx, gy)
    chunks = [np.column_stack([gx[inside], gy[inside]])]
    for part in polygons(t):
        ring = part.exterior
        n = max(4, int(math.ceil(ring.length / spacing)))
        dists = np.linspace(0.0, ring.length, n, endpoint=False)
        chunks.append(shapely.get_coordinates(shapely.line_interpolate_point(ring, dists)))
    return np.vstack(chunks)


def hull_deficiency(sample: Sequence[Sequence[float]] | np.ndarray) -> HullDeficiency:
    """Area of the hull of ``sample`` not covered by the sampled set.

    Each sample point stands for a disc of radius 0.75 times the largest
    nearest-neighbour gap; the part of the hull (shrunk by the same radius)
    left uncovered is the deficiency.  Samples of a convex set produced by
    ``sample_region`` give zero.
    """
    pts = np.asarray(sample, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        raise ValueError("hull_deficiency needs at least 3 points")
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return HullDeficiency(0.0, True)
    hull_poly = Polygon(pts[hull.vertices])
    gaps, _ = cKDTree(pts).query(pts, k=2)
    positive = gaps[:, 1][gaps[:, 1] > 0]
    if len(positive) == 0:
        return HullDeficiency(0.0, True)
    r = 0.75 * float(positive.max())
    covered = unary_union(shapely.buffer(shapely.points(pts), r, quad_segs=4))
    core = hull_poly.buffer(-r)
    if core.is_empty:
        return HullDeficiency(0.0, False)
    return HullDeficiency(float(core.difference(covered).area), False)


# -----------------------------------------------------------------------------
# Frame transforms
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameTransform:
    """Similarity ``p -> scale * N * S * p + offset``.

    ``S`` swaps the axes when ``axis_swap`` is set and ``N`` negates x and y
    as flagged by ``x_negate`` and ``y_negate``.  The eight flag settings
    are the symmetries of the square, so the inverse has the same form.
    """

    scale: float = 1.0
    offset: Point = (0.0, 0.0)
    axis_swap: bool = False
    x_negate: bool = False
    y_negate: bool = False

    def __post_init__(self) -> None:
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive, got {self.scale}")

    def linear(self) -> np.ndarray:
        m = np.eye(2)
        if self.axis_swap:
            m = np.array([[0.0, 1.0], [1.0, 0.0]]) @ m
        return np.diag([-1.0 if self.x_negate else 1.0, -1.0 if self.y_negate else 1.0]) @ m

    def matrix(self) -> np.ndarray:
        return self.scale * self.linear()

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return pts @ self.matrix().T + np.asarray(self.offset, dtype=float)

    def apply_point(self, p: Sequence[float]) -> Point:
        x, y = self.apply_points(np.asarray(p, dtype=float))[0]
        return (float(x), float(y))

    def inverse(self) -> "FrameTransform":
        target = self.linear().T
        for swap, nx, ny in itertools.product((False, True), repeat=3):
            inv = FrameTransform(1.0 / self.scale, (0.0, 0.0), swap, nx, ny)
            if np.array_equal(inv.linear(), target):
                ox, oy = -(inv.matrix() @ np.asarray(self.offset, dtype=float))
                return dataclasses.replace(inv, offset=(float(ox), float(oy)))
        raise AssertionError("frame symmetries are closed under inversion")

    def is_identity(self) -> bool:
        return (
            self.scale == 1.0
            and tuple(self.offset) == (0.0, 0.0)
            and not self.axis_swap
            and not self.x_negate
            and not self.y_negate
        )

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "offset": [self.offset[0], self.offset[1]],
            "axis_swap": self.axis_swap,
            "x_negate": self.x_negate,
            "y_negate": self.y_negate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FrameTransform":
        return cls(
            scale=float(data.get("scale", 1.0)),
            offset=tuple(float(v) for v in data.get("offset", (0.0, 0.0))),
            axis_swap=bool(data.get("axis_swap", False)),
            x_negate=bool(data.get("x_negate", False)),
            y_negate=bool(data.get("y_negate", False)),
        )


IDENTITY = FrameTransform()
REFLECT_X = FrameTransform(x_negate=True)
SWAP_XY = FrameTransform(axis_swap=True)


def apply_transform(t: Region, f: FrameTransform) -> Region:
    """Image of ``t`` under ``f`` with every part re-oriented CCW."""
    if t is None or t.is_empty:
        return Polygon()
    (a, b), (d, e) = f.matrix()
    moved = affinity.affine_transform(t, [a, b, d, e, f.offset[0], f.offset[1]])
    parts = [orient(p) for p in polygons(moved)]
    if not parts:
        return Polygon()
    if len(parts) == 1:
        return parts[0]
    return MultiPolygon(parts)


def normalize_domain(raw: Region) -> Tuple[Region, FrameTransform]:
    """Scale and centre ``raw`` into the normalized frame.

    Returns the normalized region and the transform mapping it back onto
    ``raw``.  Domains that already have diameter at most one inside
    ``[-1, 1]^2`` are returned unchanged with the identity.
    """
    if raw is None or raw.is_empty or raw.area <= config.SLIVER_AREA:
        raise ValueError("degenerate domain")
    raw = clean(raw)
    if isinstance(raw, MultiPolygon):
        raise ValueError("domain must be connected")
    if region_hull_deficiency(raw) > config.CONVEXITY_TOL * raw.area:
        raise ValueError("domain is not convex")
    raw = orient(raw)
    d = extent(raw, "diameter")
    minx, miny, maxx, maxy = raw.bounds
    if d <= 1.0 and min(minx, miny) >= -1.0 and max(maxx, maxy) <= 1.0:
        return raw, IDENTITY
    k = 1.0 / max(d, 1.0)
    centre = (0.5 * (minx + maxx), 0.5 * (miny + maxy))
    back = FrameTransform(scale=1.0 / k, offset=centre)
    return apply_transform(raw, back.inverse()), back


__all__ = [
    "Point",
    "Region",
    "Disc",
    "FrameTransform",
    "HullDeficiency",
    "IDENTITY",
    "REFLECT_X",
    "SWAP_XY",
    "empty_region",
    "is_empty",
    "polygons",
    "clean",
    "region",
    "rectangle",
    "union_all",
    "arc_tolerance",
    "clip_disc",
    "clip_halfplane",
    "extent",
    "separation",
    "separated",
    "min_dist_projection",
    "hausdorff",
    "cloud_hausdorff",
    "equal_regions",
    "covers_within",
    "region_hull_deficiency",
    "convex_union",
    "fingerprint",
    "sample_region",
    "hull_deficiency",
    "apply_transform",
    "normalize_domain",
]
