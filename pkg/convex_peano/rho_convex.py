"""
Rho-convexity: support balls, caps, membership in the family F_rho, bows.

A region ``t`` of the domain is rho-convex at a boundary point ``x`` when a
disc of radius ``rho`` through ``x`` locally contains ``t``.  The family
``F_rho`` collects the convex regions that are rho-convex at every boundary
point interior to the domain; equivalently ``t`` lies in the cap
``C(t, x)`` for every exterior point ``x``, and the latter is what
``check_F_rho`` samples.

Discs are circumscribed ``n_arc``-gons tangent at the projection point, so
every test carries a tolerance derived from ``geometry.arc_tolerance``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import shapely
from shapely.geometry import LineString, Point as _ShapelyPoint, Polygon
from shapely.geometry.polygon import orient

from . import config
from . import geometry as geo
from .state import ValidationReport

Region = geo.Region
Point = geo.Point

# A point this close to the boundary counts as lying on it.
ON_BOUNDARY = 1e3 * config.EPS_GEOM


@dataclass(frozen=True)
class RhoFamily:
    """Radius ``rho`` of the family F_rho over a normalized ``domain``."""

    rho: float
    domain: Region
    n_arc: int = config.N_ARC

    def __post_init__(self) -> None:
        if not self.rho >= 1.0:
            raise ValueError(f"rho must be at least 1, got {self.rho}")
        if geo.is_empty(self.domain):
            raise ValueError("empty domain")
        if geo.extent(self.domain, "diameter") > 1.0 + 1e-9:
            raise ValueError("domain is not normalized (diameter above 1)")

    def with_rho(self, rho: float) -> "RhoFamily":
        return RhoFamily(rho, self.domain, self.n_arc)

    @property
    def tolerance(self) -> float:
        """Containment slack of the cap test at this radius."""
        return 3.0 * geo.arc_tolerance(self.rho, self.n_arc) + 1e-9


@dataclass(frozen=True)
class Cap:
    region: Region
    source_ball: geo.Disc
    witness: Point


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.hypot(v[0], v[1]))
    if n <= config.EPS_GEOM:
        raise ValueError("direction of a null vector")
    return v / n


def _rotate(u: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * u[0] - s * u[1], s * u[0] + c * u[1]])


def _cap_from_ball(ball: geo.Disc, u: np.ndarray, x: Point, fam: RhoFamily) -> Cap:
    # Polygon tangent to the circle at centre + r*u.
    poly = ball.polygon(fam.n_arc, circumscribed=True, phase=math.atan2(u[1], u[0]))
    rest = geo.clean(fam.domain.difference(poly))
    parts = geo.polygons(rest)
    assert len(parts) <= 2, f"domain minus a ball split into {len(parts)} pieces"
    if not parts:
        return Cap(fam.domain, ball, tuple(x))
    px = _ShapelyPoint(x)
    escape = next((p for p in parts if p.covers(px)), None)
    if escape is None:
        escape = min(parts, key=lambda p: p.distance(px))
    return Cap(geo.clean(fam.domain.difference(escape)), ball, tuple(x))


def support_cap(
    s: Region,
    x: Point,
    fam: RhoFamily,
    radius: Optional[float] = None,
    tilt: float = 0.0,
) -> Cap:
    """Cap ``C(s, x)``: the domain minus the escape component of ``x``.

    The ball of radius ``radius`` (default ``fam.rho``) touches ``s`` at the
    projection ``P`` of ``x`` and lies on the far side from ``x``.  ``tilt``
    rotates the ball normal around ``P``.
    """
    if geo.is_empty(s):
        raise ValueError("support cap of an empty region")
    p = np.asarray(geo.min_dist_projection(s, x))
    u = _rotate(_unit(np.asarray(x, dtype=float) - p), tilt)
    r = fam.rho if radius is None else float(radius)
    ball = geo.Disc((float(p[0] - r * u[0]), float(p[1] - r * u[1])), r)
    return _cap_from_ball(ball, u, x, fam)


def cap_at(y: Point, x: Point, fam: RhoFamily, radius: Optional[float] = None) -> Cap:
    """Point cap ``C({y}, x)``: ball through ``y`` with normal towards ``x``."""
    yv = np.asarray(y, dtype=float)
    xv = np.asarray(x, dtype=float)
    if float(np.hypot(*(xv - yv))) <= config.EPS_GEOM:
        raise ValueError("cap of a point at itself")
    u = _unit(xv - yv)
    r = fam.rho if radius is None else float(radius)
    ball = geo.Disc((float(yv[0] - r * u[0]), float(yv[1] - r * u[1])), r)
    return _cap_from_ball(ball, u, x, fam)


def _outward_normals_at(t: Polygon, p: np.ndarray) -> List[np.ndarray]:
    """Edge normals and vertex bisector of ``t`` at the boundary point ``p``."""
    ring = np.asarray(t.exterior.coords)[:-1]
    n = len(ring)
    out: List[np.ndarray] = []

    def normal(a, b):
        d = b - a
        return _unit(np.array([d[1], -d[0]]))

    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        if float(np.hypot(*(b - p))) <= ON_BOUNDARY:
            n1, n2 = normal(a, b), normal(b, ring[(i + 2) % n])
            out.extend([n1, n2])
            if float(np.hypot(*(n1 + n2))) > config.EPS_GEOM:
                out.append(_unit(n1 + n2))
            return out
    for i in range(n):
        a, b = ring[i], ring[(i + 1) % n]
        if LineString([a, b]).distance(_ShapelyPoint(p)) <= ON_BOUNDARY:
            out.append(normal(a, b))
            return out
    return out


def _deviation(t: Region, cap: Region) -> float:
    pts = shapely.points(shapely.get_coordinates(t))
    return float(shapely.distance(pts, cap).max())


def _exterior_samples(t: Region, fam: RhoFamily, n: int, rng: np.random.Generator) -> np.ndarray:
    exterior = geo.clean(fam.domain.difference(t))
    if geo.is_empty(exterior):
        return np.empty((0, 2))
    eta = max(4.0 * geo.arc_tolerance(fam.rho, fam.n_arc), 1e-3)
    ring = t.convex_hull.buffer(eta).exterior
    dists = np.linspace(0.0, ring.length, 4 * n, endpoint=False)
    near = shapely.get_coordinates(shapely.line_interpolate_point(ring, dists))
    near = near[shapely.contains_xy(exterior, near[:, 0], near[:, 1])]
    if len(near) > n // 2:
        near = near[rng.choice(len(near), n // 2, replace=False)]
    minx, miny, maxx, maxy = exterior.bounds
    cand = rng.uniform((minx, miny), (maxx, maxy), size=(16 * n, 2))
    cand = cand[shapely.contains_xy(exterior, cand[:, 0], cand[:, 1])]
    far = cand[: max(n - len(near), 0)]
    pts = np.vstack([near, far])
    d = shapely.distance(shapely.points(pts), t)
    return pts[d > 10.0 * ON_BOUNDARY]


def check_F_rho(
    t: Region,
    fam: RhoFamily,
    n_samples: int = config.F_RHO_SAMPLES,
    seed: int = config.SEED,
) -> ValidationReport:
    """Sampled membership test ``t in F_rho``.

    For each sampled exterior point ``x`` the cap ``C(t, x)`` must contain
    ``t`` within ``fam.tolerance``.  Ball normals within one arc step of
    ``x - P`` that follow the discretized boundary of ``t`` at ``P`` are
    accepted as well.
    """
    if geo.is_empty(t):
        raise ValueError("F_rho membership of an empty region")
    tolerances = {"containment": fam.tolerance, "rho": fam.rho}
    rng = np.random.default_rng(seed)
    pts = _exterior_samples(t, fam, n_samples, rng)
    if len(pts) == 0:
        return ValidationReport("F_rho", True, None, tolerances, 0)
    parts = geo.polygons(t)
    body = orient(parts[0] if len(parts) == 1 else t.convex_hull)
    step = math.pi / fam.n_arc
    for i, x in enumerate(pts):
        p = np.asarray(geo.min_dist_projection(t, tuple(x)))
        u = _unit(x - p)
        base = math.atan2(u[1], u[0])
        tilts = [0.0]
        for v in _outward_normals_at(body, p):
            d = (math.atan2(v[1], v[0]) - base + math.pi) % (2 * math.pi) - math.pi
            if 0.0 < abs(d) <= step + 1e-12:
                tilts.append(d)
        best = math.inf
        for tilt in tilts:
            cap = support_cap(t, tuple(x), fam, tilt=tilt)
            best = min(best, _deviation(t, cap.region))
            if best <= fam.tolerance:
                break
        if best > fam.tolerance:
            witness = {"sample": i, "x": [float(x[0]), float(x[1])], "deviation": best}
            return ValidationReport("F_rho", False, witness, tolerances, i + 1)
    return ValidationReport("F_rho", True, None, tolerances, len(pts))


def is_rho_convex_at(t: Region, x: Point, fam: RhoFamily) -> bool:
    """Local test: a rho-disc through ``x`` contains ``t`` near ``x``.

    The neighbourhood has radius ``config.EPS_LOC``.  The slack is 1.5 times
    the arc tolerance of ``rho``, capped at half the sagitta of the local
    chord so a straight edge never passes.
    """
    if geo.is_empty(t):
        raise ValueError("empty region")
    body = orient(geo.polygons(t)[0])
    xv = np.asarray(x, dtype=float)
    if body.exterior.distance(_ShapelyPoint(xv)) > ON_BOUNDARY:
        raise ValueError(f"point {tuple(x)} is not on the boundary")
    local = geo.clean(body.intersection(geo.Disc((float(xv[0]), float(xv[1])), config.EPS_LOC).polygon(fam.n_arc)))
    if geo.is_empty(local):
        return True
    verts = shapely.get_coordinates(local)
    normals = _outward_normals_at(body, xv)
    if not normals:
        return False
    step = math.pi / fam.n_arc
    if len(normals) >= 2:
        a0 = math.atan2(normals[0][1], normals[0][0])
        a1 = math.atan2(normals[1][1], normals[1][0])
        span = (a1 - a0) % (2 * math.pi)
        angles = a0 + span * np.linspace(0.0, 1.0, 17)
    else:
        a = math.atan2(normals[0][1], normals[0][0])
        angles = a + step * np.array([0.0, -1.0, 1.0, -2.0, 2.0])
    best = math.inf
    for ang in angles:
        centre = xv - fam.rho * np.array([math.cos(ang), math.sin(ang)])
        excess = float(np.hypot(*(verts - centre).T).max()) - fam.rho
        best = min(best, excess)
    reach = min(float(np.hypot(*(verts - xv).T).max()), fam.rho)
    slack = min(1.5 * geo.arc_tolerance(fam.rho, fam.n_arc), 0.5 * sagitta(2.0 * reach, fam.rho))
    return best <= slack


def sagitta(chord: float, rho: float) -> float:
    return rho - math.sqrt(rho * rho - 0.25 * chord * chord)


def bow(x: Point, y: Point, fam: RhoFamily, side: str = "left") -> np.ndarray:
    """Minor arc of radius ``fam.rho`` from ``x`` to ``y``.

    ``left`` bulges to the left of the direction ``x -> y``.  The arc uses an
    even number of segments so its apex is a vertex.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    xv, yv = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    chord = float(np.hypot(*(yv - xv)))
    if chord <= config.EPS_GEOM:
        raise ValueError("coincident bow endpoints")
    if chord >= 2.0 * fam.rho:
        raise ValueError("chord too long for a bow of this radius")
    d = (yv - xv) / chord
    left = np.array([-d[1], d[0]])
    sign = 1.0 if side == "left" else -1.0
    h = math.sqrt(fam.rho ** 2 - 0.25 * chord ** 2)
    centre = 0.5 * (xv + yv) - sign * h * left
    a0 = math.atan2(xv[1] - centre[1], xv[0] - centre[0])
    a1 = math.atan2(yv[1] - centre[1], yv[0] - centre[0])
    sweep = (a1 - a0 + math.pi) % (2 * math.pi) - math.pi
    k = max(2, int(math.ceil(abs(sweep) / (2 * math.pi / fam.n_arc))))
    k += k % 2
    angles = a0 + sweep * np.linspace(0.0, 1.0, k + 1)
    pts = centre + fam.rho * np.column_stack([np.cos(angles), np.sin(angles)])
    pts[0], pts[-1] = xv, yv
    return pts


__all__ = [
    "RhoFamily",
    "Cap",
    "support_cap",
    "cap_at",
    "check_F_rho",
    "is_rho_convex_at",
    "sagitta",
    "bow",
]
