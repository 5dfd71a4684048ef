"""
Evaluation of the curve encoded by a partition stack.

Parameter ``u`` at level ``j`` falls in the interval
``[(K-1)/M(j), K/M(j)]``; the curve point is only known to lie in cell
``t(j; K)``, so every evaluation returns a representative point (the cell
centroid) together with the radius of that uncertainty.  Points and regions
are reported in the original frame of the domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import geometry as geo
from . import seq_algebra as sa
from .construction import PartitionLevel
from .state import ValidationReport


@dataclass
class CurvePartition:
    levels: List[PartitionLevel]
    domain: geo.Region
    transform: geo.FrameTransform = geo.IDENTITY
    meta: Dict[str, object] = field(default_factory=dict)
    _cells: Dict[int, Tuple[np.ndarray, np.ndarray]] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("a curve partition needs at least one level")
        for prev, cur in zip(self.levels, self.levels[1:]):
            if cur.m_prime_used is None or cur.M != prev.M * cur.m_prime_used:
                raise ValueError(f"level {cur.j}: M does not match its parent level")

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, j: int) -> PartitionLevel:
        if not 1 <= j <= self.depth:
            raise ValueError(f"level {j} outside the built depth {self.depth}")
        return self.levels[j - 1]

    def original_domain(self) -> geo.Region:
        return geo.apply_transform(self.domain, self.transform)

    def cell_table(self, j: int) -> Tuple[np.ndarray, np.ndarray]:
        """Original-frame centroids ``(M, 2)`` and diameters ``(M,)`` of level ``j``."""
        if j not in self._cells:
            bases = self.level(j).bases()
            cache: Dict[int, Tuple[Tuple[float, float], float]] = {}
            rows = []
            for b in bases:
                if id(b) not in cache:
                    p = b.centroid if b.contains(b.centroid) else b.representative_point()
                    cache[id(b)] = ((p.x, p.y), geo.extent(b, "diameter"))
                rows.append(cache[id(b)])
            centroids = self.transform.apply_points(np.array([r[0] for r in rows]))
            diameters = np.array([r[1] for r in rows]) * self.transform.scale
            self._cells[j] = (centroids, diameters)
        return self._cells[j]


@dataclass(frozen=True)
class CurvePoint:
    point: Tuple[float, float]
    error_radius: float
    K: int


def _check_u(u: float) -> float:
    u = float(u)
    if not 0.0 <= u <= 1.0 or math.isnan(u):
        raise ValueError(f"parameter {u} outside [0, 1]")
    return u


def cell_index(u: float, M: int) -> int:
    """1-based index of the interval of length ``1/M`` containing ``u``."""
    return min(int(math.floor(u * M)) + 1, M)


def eval_f(cp: CurvePartition, u: float, j: Optional[int] = None) -> CurvePoint:
    """Curve point at ``u`` resolved at level ``j`` (deepest by default)."""
    u = _check_u(u)
    j = cp.depth if j is None else j
    M = cp.level(j).M
    K = cell_index(u, M)
    centroids, diameters = cp.cell_table(j)
    radius = float(diameters[K - 1])
    on_edge = u * M
    if 0 < on_edge < M and on_edge == math.floor(on_edge):
        # both neighbouring cells contain f(u)
        radius = 2.0 * max(radius, float(diameters[K - 2]))
    x, y = centroids[K - 1]
    return CurvePoint((float(x), float(y)), radius, K)


@dataclass(frozen=True)
class IntervalImage:
    """Cells ``K_a..K_b`` covering ``f([a, b])``.

    ``inner`` unites the cells whose parameter interval lies inside
    ``[a, b]``; ``collar`` lists the at most two boundary cells that may
    stick out of the true image.
    """

    region: geo.Region
    inner: geo.Region
    collar: Tuple[int, ...]
    K_a: int
    K_b: int


def image_of_interval(cp: CurvePartition, a: float, b: float, j: Optional[int] = None) -> IntervalImage:
    a, b = _check_u(a), _check_u(b)
    if a > b:
        raise ValueError("interval end before its start")
    j = cp.depth if j is None else j
    level = cp.level(j)
    M = level.M
    K_a = cell_index(a, M)
    K_b = K_a if a == b else max(K_a, int(math.ceil(b * M)))
    inner_lo = int(math.ceil(a * M)) + 1
    inner_hi = int(math.floor(b * M))
    bases = level.bases()
    region = sa.union_range(bases, K_a, K_b)
    inner = sa.union_range(bases, inner_lo, inner_hi)
    collar = tuple(K for K in range(K_a, K_b + 1) if not inner_lo <= K <= inner_hi)
    f = cp.transform
    return IntervalImage(geo.apply_transform(region, f), geo.apply_transform(inner, f), collar, K_a, K_b)


def sample_curve(cp: CurvePartition, n: int, j: Optional[int] = None) -> np.ndarray:
    """Curve points at ``n`` uniform parameters, shape ``(n, 2)``."""
    if n < 2:
        raise ValueError("need at least two samples")
    j = cp.depth if j is None else j
    M = cp.level(j).M
    u = np.linspace(0.0, 1.0, n)
    K = np.minimum(np.floor(u * M).astype(int) + 1, M)
    centroids, _ = cp.cell_table(j)
    return centroids[K - 1]


def continuity_bound(cp: CurvePartition, j: Optional[int] = None) -> float:
    """``|f(u) - f(v)|`` bound for ``|u - v| < 1/M(j)``."""
    j = cp.depth if j is None else j
    _, diameters = cp.cell_table(j)
    return 2.0 * float(diameters.max())


def sample_table(cp: CurvePartition, u: Sequence[float], j: Optional[int] = None) -> List[CurvePoint]:
    """``eval_f`` at every parameter of ``u``."""
    return [eval_f(cp, v, j) for v in u]


def continuity_report(cp: CurvePartition, j: Optional[int] = None, slack: float = 1e-2) -> ValidationReport:
    """Representative points of consecutive cells stay within the continuity bound."""
    j = cp.depth if j is None else j
    pts, _ = cp.cell_table(j)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    limit = continuity_bound(cp, j) + slack
    worst = int(np.argmax(steps))
    witness = None if steps[worst] <= limit else {"j": j, "step": worst + 1, "distance": float(steps[worst])}
    return ValidationReport("continuity", witness is None, witness, {"limit": limit}, len(steps))


def surjectivity_report(cp: CurvePartition, j: Optional[int] = None, tol: float = 1e-3) -> ValidationReport:
    """The image of the whole parameter range covers the domain.

    Besides the uncovered area, the Hausdorff distance between a grid of the
    domain and the cell representatives must stay within one cell diameter
    and the grid spacing.
    """
    j = cp.depth if j is None else j
    image = image_of_interval(cp, 0.0, 1.0, j).region
    target = cp.original_domain()
    gap = geo.clean(target.difference(image)).area
    limit = tol * target.area
    pts, diameters = cp.cell_table(j)
    spacing = 0.05 * geo.extent(target, "diameter")
    spread = geo.cloud_hausdorff(geo.sample_region(target, spacing), pts)
    spread_limit = float(diameters.max()) + spacing
    witness = None
    if gap > limit:
        witness = {"j": j, "gap": gap}
    elif spread > spread_limit:
        witness = {"j": j, "spread": spread}
    tolerances = {"area": limit, "spread": spread_limit}
    return ValidationReport("surjectivity", witness is None, witness, tolerances, cp.level(j).M)


__all__ = [
    "CurvePartition",
    "CurvePoint",
    "IntervalImage",
    "cell_index",
    "eval_f",
    "image_of_interval",
    "sample_curve",
    "continuity_bound",
    "continuity_report",
    "surjectivity_report",
    "sample_table",
]
