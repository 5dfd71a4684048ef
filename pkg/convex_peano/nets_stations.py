"""
Skeletons, nets, anti-nets and stations.

A *net* for a convex region ``t`` is an increasing chain of convex regions
ending at ``t`` whose increments have diameter at most ``gamma'``.  A
*station* for a disturbance ``t1`` is an increasing chain from the empty set
to ``t1`` such that adding the core of any compatible base to each stage
yields a net.  Nets come with a *skeleton*, a ladder of x-coordinates that
sandwiches the stages between two half-planes.

Two station builders exist.  The adaptive one (the default) grows the core
by thin layers and splits every layer with a hull ladder over a fixed grid
of squares; its length depends on the geometry.  The strict one follows the
worst-case construction (growth chain by point caps, then ladders of caps
with increasing radii) and is padded to the counts of ``compute_params``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import shapely
from scipy.optimize import brentq
from shapely.geometry import Polygon
from shapely.ops import unary_union

from . import config
from . import geometry as geo
from . import rho_convex as rc
from .state import BudgetExceeded, ConstructionError, ValidationReport

Region = geo.Region

# (base, disturbance, family) -> station stages, first one empty
StationProvider = Callable[[Region, Region, rc.RhoFamily], Tuple[Region, ...]]


# -----------------------------------------------------------------------------
# Parameters
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class NetParams:
    gamma: float
    gamma_prime: float
    beta: float
    beta_prime: float
    n0: int
    square_side: float
    j_cov: int
    ladder: Tuple[float, ...]
    delta: float
    eps_delta: float
    k_chain: int
    n_star: int
    n1: int

    @property
    def clip_radius(self) -> float:
        """Radius of the balls that cut a region into net blocks."""
        return 0.5 * self.gamma + 0.5 / self.gamma

    @property
    def sandwich_tol(self) -> float:
        return 2.0 * geo.arc_tolerance(self.clip_radius) + 1e-9


def delta_rho_bar(rho: float, rho_bar: float, gamma_prime: float) -> float:
    """Largest ``delta`` for which the delta-collar of the rho-ball stays in
    the rho_bar-ball away from the origin.

    Both balls touch the origin from below.  A point ``z`` with
    ``|z| >= gamma'/3 - delta`` within ``delta`` of the rho-ball lies in the
    rho_bar-ball; the returned value is the root of the crossing-point
    condition of the two circles.
    """
    if rho < 1.0:
        raise ValueError(f"rho must be at least 1, got {rho}")
    if rho >= rho_bar:
        raise ValueError("rho must be smaller than rho_bar")
    if not 0.0 < gamma_prime < 0.25:
        raise ValueError("gamma_prime must lie in (0, 1/4)")
    sigma = gamma_prime / 3.0
    gap = rho_bar - rho

    def crossing(d: float) -> float:
        r = rho + d
        return (
            gap * sigma * (sigma - 2 * d) / r
            - 2 * rho * d
            - d * d
            - 2 * d * gap
            + d * gap * sigma * (sigma - 2 * d) / (r * rho)
        )

    return float(brentq(crossing, 0.0, 0.5 * sigma, xtol=1e-15))


def eps_of_delta(delta: float, rho: float) -> float:
    """Distance from the rho-ball to the unit disc minus its delta-shift."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    y = (2 * rho * delta - delta * delta - 1.0) / (2 * (rho - delta))
    y = min(max(y, -1.0), 1.0)
    return max(math.sqrt(max(1.0 + rho * rho + 2 * rho * y, 0.0)) - rho, 0.0)


def compute_params(
    beta: float,
    gamma: float,
    gamma_prime: float,
    k_chain: Optional[int] = None,
    j_cov: Optional[int] = None,
) -> NetParams:
    """Derive every count and length used by nets and stations.

    ``k_chain`` and ``j_cov`` default to their worst-case values; passing
    them explicitly keeps the strict counts small enough to audit by hand.
    """
    if not 0.0 < gamma < 0.25:
        raise ValueError("gamma must lie in (0, 1/4)")
    if not 0.0 < gamma_prime < 0.25:
        raise ValueError("gamma_prime must lie in (0, 1/4)")
    if beta < 1.0:
        raise ValueError(f"beta must be at least 1, got {beta}")
    beta_prime = max(2.0 * beta, gamma + 1.0 / gamma)
    n0 = int(math.ceil(1.0 / gamma + 1.0 - 1e-12))
    side = gamma_prime / (3.0 * math.sqrt(2.0))
    if j_cov is None:
        j_cov = int(math.ceil(2.0 / side)) ** 2 + 1
    if j_cov < 2:
        raise ValueError("j_cov must be at least 2")
    ladder = tuple(float(r) for r in np.linspace(0.5 * beta_prime, beta_prime, j_cov))
    delta = min(delta_rho_bar(ladder[h - 1], ladder[h], gamma_prime) for h in range(1, j_cov))
    eps = eps_of_delta(delta, 0.5 * beta_prime)
    if k_chain is None:
        k_chain = int(math.ceil(1.0 / eps + 1.0))
    if k_chain < 2:
        raise ValueError("k_chain must be at least 2")
    n_star = (k_chain - 1) * j_cov
    return NetParams(
        gamma=gamma,
        gamma_prime=gamma_prime,
        beta=beta,
        beta_prime=beta_prime,
        n0=n0,
        square_side=side,
        j_cov=j_cov,
        ladder=ladder,
        delta=delta,
        eps_delta=eps,
        k_chain=k_chain,
        n_star=n_star,
        n1=(n0 - 1) * n_star + 1,
    )


# -----------------------------------------------------------------------------
# Skeletons and sandwiches
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Skeleton:
    chi: Tuple[float, ...]
    gamma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "chi", tuple(float(c) for c in self.chi))
        if not self.chi:
            raise ValueError("empty skeleton")
        steps = np.diff(self.chi)
        if np.any(steps < -1e-12) or np.any(steps > self.gamma + 1e-12):
            raise ValueError("skeleton steps must lie in [0, gamma]")

    def __len__(self) -> int:
        return len(self.chi)


def make_skeleton(t: Region, gamma: float, n: int) -> Skeleton:
    """Uniform skeleton of length ``n`` over the x-projection of ``t``."""
    if n < 1:
        raise ValueError("skeleton length must be positive")
    minx, _, maxx, _ = t.bounds
    width = maxx - minx
    if n == 1:
        if width > 1e-12:
            raise ValueError("a one-point skeleton needs a region of zero width")
        return Skeleton((minx,), gamma)
    if width > (n - 1) * gamma + 1e-12:
        raise ValueError(f"skeleton of length {n} too short for width {width:.6g}")
    chi = minx + width * np.arange(n) / (n - 1)
    chi[-1] = maxx
    return Skeleton(tuple(chi), gamma)


def check_sandwich(
    stages: Sequence[Region],
    chi: Sequence[float],
    lo: float,
    hi: float,
    t: Region,
    gamma: float,
    sense: str = "prec",
    tol: Optional[float] = None,
) -> Optional[int]:
    """First 1-based index where the half-plane sandwich fails, or ``None``.

    ``prec``: ``t & (x <= chi + lo*gamma)`` inside the stage, stage inside
    ``x <= chi + hi*gamma``.  ``succ`` mirrors it:
    ``t & (x >= chi - lo*gamma)`` inside the stage, stage inside
    ``x >= chi - hi*gamma``.
    """
    if len(stages) != len(chi):
        raise ValueError("stages and skeleton differ in length")
    if sense not in ("prec", "succ"):
        raise ValueError(f"unknown sense {sense!r}")
    if tol is None:
        tol = 2.0 * geo.arc_tolerance(0.5 * gamma + 0.5 / gamma) + 1e-9
    for l, (stage, c) in enumerate(zip(stages, chi), start=1):
        if sense == "prec":
            lower = geo.clip_halfplane(t, "x", c + lo * gamma, "<=")
            upper_ok = geo.is_empty(stage) or stage.bounds[2] <= c + hi * gamma + tol
        else:
            lower = geo.clip_halfplane(t, "x", c - lo * gamma, ">=")
            upper_ok = geo.is_empty(stage) or stage.bounds[0] >= c - hi * gamma - tol
        if not upper_ok or not geo.covers_within(stage, lower, tol):
            return l
    return None


# -----------------------------------------------------------------------------
# Net and station verifiers
# -----------------------------------------------------------------------------

def validate_net(
    stages: Sequence[Region],
    target: Region,
    params: NetParams,
    fam: Optional[rc.RhoFamily] = None,
    slack: Optional[float] = None,
) -> ValidationReport:
    """Check a chain against the net definition.

    Increments are measured after removing a ``slack`` collar of the
    previous stage, which absorbs the arc discretization of cap-built
    stages.  With ``fam`` given, the first, middle and last stages are also
    sampled for membership in F_rho.
    """
    if slack is None:
        slack = 3.0 * geo.arc_tolerance(params.beta_prime)
    limit = params.gamma_prime + slack
    tolerances = {"increment": limit, "equality": config.EQUALITY_TOL, "slack": slack}
    stages = tuple(stages)
    if not stages:
        return ValidationReport("net", False, {"reason": "empty net"}, tolerances, 0)
    if not geo.equal_regions(stages[-1], target, 1e-6):
        return ValidationReport("net", False, {"l": len(stages), "reason": "last stage is not the target"}, tolerances, 1)
    area = max(target.area, config.SLIVER_AREA)
    for l, stage in enumerate(stages, start=1):
        if geo.is_empty(stage):
            return ValidationReport("net", False, {"l": l, "reason": "empty stage"}, tolerances, l)
        if geo.region_hull_deficiency(stage) > config.CONVEXITY_TOL * area:
            return ValidationReport("net", False, {"l": l, "reason": "stage not convex"}, tolerances, l)
        if l == 1:
            continue
        prev = stages[l - 2]
        if stage is prev:
            continue
        if not geo.covers_within(stage, prev, 1e-6):
            return ValidationReport("net", False, {"l": l, "reason": "not increasing"}, tolerances, l)
        inc = geo.clean(stage.difference(prev.buffer(slack)))
        if not geo.is_empty(inc) and geo.extent(inc, "diameter") > limit:
            witness = {"l": l, "reason": "increment too large", "diameter": geo.extent(inc, "diameter")}
            return ValidationReport("net", False, witness, tolerances, l)
    if fam is not None:
        for l in sorted({1, (len(stages) + 1) // 2, len(stages)}):
            report = rc.check_F_rho(stages[l - 1], fam)
            if not report:
                return ValidationReport("net", False, {"l": l, "reason": "stage outside F_rho", **(report.witness or {})}, tolerances, l)
    return ValidationReport("net", True, None, tolerances, len(stages))


def station_net(station: Sequence[Region], base: Region, t1: Region) -> Tuple[Region, ...]:
    """The chain ``(base \\ t1) | station(l)`` a station induces on ``base``."""
    core = geo.clean(base.difference(t1)) if not geo.is_empty(t1) else base
    out = []
    for s in station:
        out.append(core if geo.is_empty(s) else geo.convex_union(core, s))
    return tuple(out)


def validate_station(
    station: Sequence[Region],
    bases: Sequence[Region],
    params: NetParams,
    fam: Optional[rc.RhoFamily] = None,
) -> ValidationReport:
    """Every base sharing the station's disturbance must yield a net."""
    station = tuple(station)
    t1 = station[-1]
    tolerances = {}
    checked = 0
    if not geo.is_empty(station[0]):
        return ValidationReport("station", False, {"reason": "first stage not empty"}, tolerances, 0)
    for i, base in enumerate(bases):
        report = validate_net(station_net(station, base, t1), base, params, fam)
        tolerances = report.tolerances
        checked += report.checked
        if not report:
            return ValidationReport("station", False, {"base": i, **(report.witness or {})}, tolerances, checked)
    return ValidationReport("station", True, None, tolerances, checked)


# -----------------------------------------------------------------------------
# Adaptive station builder
# -----------------------------------------------------------------------------

def _covering_squares(r: Region, side: float) -> List[Polygon]:
    """Squares of the origin-aligned grid of ``side`` meeting ``r``, ordered
    along the principal axis of ``r``."""
    minx, miny, maxx, maxy = r.bounds
    ix = np.arange(math.floor(minx / side), math.ceil(maxx / side))
    iy = np.arange(math.floor(miny / side), math.ceil(maxy / side))
    gx, gy = np.meshgrid(ix, iy)
    gx, gy = gx.ravel() * side, gy.ravel() * side
    boxes = shapely.box(gx, gy, gx + side, gy + side)
    boxes = boxes[shapely.intersects(boxes, r)]
    coords = shapely.get_coordinates(r)
    centred = coords - coords.mean(axis=0)
    axis = np.array([1.0, 0.0])
    if len(coords) >= 2 and np.ptp(centred, axis=0).max() > 0:
        axis = np.linalg.svd(centred, full_matrices=False)[2][0]
        if axis[np.argmax(np.abs(axis))] < 0:
            axis = -axis
    centres = shapely.get_coordinates(shapely.centroid(boxes))
    keys = centres @ axis
    return [boxes[i] for i in np.lexsort((centres[:, 1], centres[:, 0], keys))]


def _hull_ladder(current: Region, candidate: Region, side: float, limit: float) -> Optional[List[Region]]:
    """Rungs from ``current`` to ``candidate``; ``None`` when an increment
    exceeds ``limit``."""
    ring = geo.clean(candidate.difference(current))
    if geo.is_empty(ring):
        return []
    rungs: List[Region] = []
    for sq in _covering_squares(ring, side):
        piece = geo.clean(candidate.intersection(sq))
        if geo.is_empty(piece) or geo.is_empty(geo.clean(piece.difference(current))):
            continue
        rung = geo.clean(candidate.intersection(unary_union([current, piece]).convex_hull))
        inc = geo.clean(rung.difference(current))
        if geo.is_empty(inc):
            continue
        if geo.extent(inc, "diameter") > limit:
            return None
        rungs.append(rung)
        current = rung
    rest = geo.clean(candidate.difference(current))
    if geo.is_empty(rest):
        if rungs:
            rungs[-1] = candidate
        return rungs
    if geo.extent(rest, "diameter") > limit:
        return None
    rungs.append(candidate)
    return rungs


def _adaptive_station_stages(
    t: Region,
    core: Region,
    params: NetParams,
    delta_scale: float,
    max_len: Optional[int],
) -> List[Region]:
    delta = delta_scale * params.gamma_prime / 3.0
    current = core
    stages: List[Region] = [core]
    while True:
        candidate = geo.clean(t.intersection(current.buffer(delta)))
        if geo.is_empty(geo.clean(t.difference(candidate))):
            candidate = t
        rungs = _hull_ladder(current, candidate, params.square_side, params.gamma_prime)
        if rungs is None:
            delta *= 0.5
            if delta < config.STATION_MIN_DELTA:
                raise ConstructionError(
                    "station layer thickness fell below the minimum",
                    {"condition": "station increments", "delta": delta},
                )
            continue
        stages.extend(rungs)
        if max_len is not None and len(stages) > max_len:
            raise BudgetExceeded("station longer than the cell budget allows", {"length": len(stages)})
        if candidate is t:
            return stages
        current = candidate


# -----------------------------------------------------------------------------
# Strict builders
# -----------------------------------------------------------------------------

def _grid_points(region: Region, step: float) -> np.ndarray:
    return geo.sample_region(region, step)


def _collar_points(r: Region, domain: Region, delta: float, step: float) -> np.ndarray:
    """Domain points on the ring at distance ``2*delta`` around ``r``."""
    ring = r.buffer(2.0 * delta).exterior
    n = max(8, int(math.ceil(ring.length / step)))
    pts = shapely.get_coordinates(shapely.line_interpolate_point(ring, np.linspace(0.0, ring.length, n, endpoint=False)))
    return pts[shapely.contains_xy(domain, pts[:, 0], pts[:, 1])]


def grow_l32(
    r: Region,
    delta: float,
    fam: rc.RhoFamily,
    sample_step: float,
    check: bool = True,
) -> Region:
    """Convex region between ``r`` and its ``delta``-neighbourhood that
    contains the ``eps(delta)``-neighbourhood of ``r``.

    Built as the domain cut by the point caps ``C({P + delta*u}, x)`` over
    grid points ``x`` farther than ``delta`` from ``r`` and over a ring of
    points just outside the ``delta``-collar.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if check:
        report = rc.check_F_rho(r, fam)
        if not report:
            raise ConstructionError("growth seed outside F_rho", {"condition": "growth", **(report.witness or {})})
    domain = fam.domain
    if geo.hausdorff(domain, r) <= delta:
        return domain
    pts = np.vstack([_grid_points(domain, sample_step), _collar_points(r, domain, delta, sample_step)])
    dist = shapely.distance(shapely.points(pts), r)
    grown = domain
    for x in pts[dist > delta]:
        p = np.asarray(geo.min_dist_projection(r, tuple(x)))
        u = (x - p) / np.hypot(*(x - p))
        y = tuple(p + delta * u)
        grown = grown.intersection(rc.cap_at(y, tuple(x), fam).region)
    return geo.clean(domain.intersection(unary_union([geo.clean(grown), r]).convex_hull))


def chain_t23(
    t: Region,
    t1: Region,
    params: NetParams,
    fam: rc.RhoFamily,
    sample_step: Optional[float] = None,
) -> Tuple[Region, ...]:
    """Increasing chain of length ``k_chain`` from ``t \\ t1`` to ``t`` with
    steps bounded by ``params.delta``.

    Each growth adds at least the ``eps(delta)``-collar, so the chain needs
    about ``d(t, t \\ t1) / eps(delta)`` steps; when that exceeds
    ``k_chain`` or ``eps(delta)`` is below the arc resolution of the caps,
    ``BudgetExceeded`` is raised before any cap is built.  A stage within
    ``delta`` of ``t`` is followed by ``t`` itself.
    """
    if geo.is_empty(t1):
        return (t,) * params.k_chain
    half = fam.with_rho(0.5 * params.beta_prime)
    current = geo.clean(t.difference(t1))
    report = rc.check_F_rho(current, half)
    if not report:
        raise ConstructionError("growth seed outside F_rho", {"condition": "growth chain", **(report.witness or {})})
    gap = geo.hausdorff(t, current)
    if gap > params.delta:
        resolvable = params.eps_delta > half.tolerance
        needed = 1 + int(math.ceil((gap - params.delta) / params.eps_delta)) if resolvable else math.inf
        if needed > params.k_chain - 1:
            raise BudgetExceeded(
                "growth chain needs more steps than k_chain",
                {
                    "condition": "growth chain",
                    "k_chain": params.k_chain,
                    "needed": needed if resolvable else None,
                    "gap": gap,
                    "eps_delta": params.eps_delta,
                    "arc_tolerance": half.tolerance,
                },
            )
    step = sample_step or min(0.01, max(params.eps_delta, 1e-3))
    chain: List[Region] = [current]
    while True:
        if geo.hausdorff(t, current) <= params.delta:
            chain.append(t)
            break
        grown = geo.clean(t.intersection(grow_l32(current, params.delta, half, step, check=False)))
        if geo.is_empty(geo.clean(t.difference(grown))):
            chain.append(t)
            break
        if grown.area <= current.area + config.SLIVER_AREA:
            raise ConstructionError("growth chain made no progress", {"condition": "growth chain", "length": len(chain)})
        chain.append(grown)
        current = grown
        if len(chain) >= params.k_chain:
            raise ConstructionError("growth chain longer than k_chain", {"condition": "growth chain", "k_chain": params.k_chain})
    chain.extend([t] * (params.k_chain - len(chain)))
    return tuple(chain)


def ladder_l31(
    r: Region,
    t: Region,
    piece: Region,
    rho: float,
    rho_bar: float,
    fam: rc.RhoFamily,
    gamma_prime: float,
    sample_step: float,
) -> Region:
    """Convex ``r_bar`` with ``r | piece`` inside ``r_bar`` inside ``t``.

    Empty piece: ``r``.  When all of ``t \\ r`` lies within ``gamma'/3`` of
    the piece: ``t``.  Otherwise ``t`` is cut by caps of radius ``rho_bar``
    around ``conv(r | piece)`` at the sampled points farther than
    ``gamma'/3`` from the piece.
    """
    if geo.is_empty(piece):
        return r
    if not geo.covers_within(t, r, 1e-6) or not geo.covers_within(t, piece, 1e-6):
        raise ValueError("ladder needs r and the piece inside t")
    if not rho < rho_bar:
        raise ValueError("ladder radii must increase")
    rest = geo.clean(t.difference(r))
    reach = gamma_prime / 3.0
    if geo.is_empty(rest):
        return t
    far_pts = shapely.points(shapely.get_coordinates(rest))
    if float(shapely.distance(far_pts, piece).max()) <= reach:
        return t
    hull = unary_union([r, piece]).convex_hull
    fam_bar = fam.with_rho(rho_bar)
    pts = geo.sample_region(rest, sample_step)
    pts = pts[shapely.distance(shapely.points(pts), piece) > reach]
    pts = pts[~shapely.contains_xy(hull.buffer(10 * rc.ON_BOUNDARY), pts[:, 0], pts[:, 1])]
    cut = t
    for x in pts:
        cut = cut.intersection(rc.support_cap(hull, tuple(x), fam_bar).region)
    return geo.clean(t.intersection(unary_union([geo.clean(cut), r, piece]).convex_hull))


def build_net_t22(
    t: Region,
    t1: Region,
    params: NetParams,
    fam: rc.RhoFamily,
    sample_step: Optional[float] = None,
) -> Tuple[Region, ...]:
    """Net of length ``j_cov`` from ``t \\ t1`` to ``t`` through ladders of
    caps with radii growing from ``beta'/2`` to ``beta'``."""
    if geo.is_empty(t1):
        return (t,) * params.j_cov
    core = geo.clean(t.difference(t1))
    if geo.hausdorff(t, core) > params.delta + 1e-12:
        raise ValueError("build_net_t22 needs the core within delta of the region")
    step = sample_step or max(params.gamma_prime / 12.0, 0.005)
    squares = _covering_squares(t1, params.square_side)
    if len(squares) > params.j_cov - 1:
        raise ConstructionError("covering needs more squares than j_cov", {"condition": "square covering"})
    stages: List[Region] = [core]
    current = core
    for h, sq in enumerate(squares, start=1):
        piece = geo.clean(geo.clean(t1.intersection(sq)).difference(current))
        current = ladder_l31(
            current, t, piece, params.ladder[h - 1], params.ladder[h], fam, params.gamma_prime, step
        )
        stages.append(current)
    if geo.is_empty(geo.clean(t.difference(current))):
        stages[-1] = t
    else:
        stages.append(t)
    if len(stages) > params.j_cov:
        raise ConstructionError("ladder longer than j_cov", {"condition": "square covering"})
    stages.extend([t] * (params.j_cov - len(stages)))
    return tuple(stages)


def _strict_station_stages(
    t: Region, t1: Region, params: NetParams, fam: rc.RhoFamily, sample_step: Optional[float]
) -> List[Region]:
    chain = chain_t23(t, t1, params, fam, sample_step)
    stages: List[Region] = []
    for lo, hi in zip(chain[:-1], chain[1:]):
        if lo is hi:
            stages.extend([hi] * params.j_cov)
            continue
        inc = geo.clean(hi.difference(lo))
        net = build_net_t22(hi, inc, params, fam, sample_step)
        stages.extend(net)
    return stages


# -----------------------------------------------------------------------------
# Stations and nets
# -----------------------------------------------------------------------------

def build_station(
    t: Region,
    t1: Region,
    params: NetParams,
    fam: rc.RhoFamily,
    mode: str = "adaptive",
    delta_scale: float = 1.0,
    max_len: Optional[int] = None,
    core: Optional[Region] = None,
    sample_step: Optional[float] = None,
) -> Tuple[Region, ...]:
    """Station for the disturbance ``t1`` built on the base ``t``.

    The result starts with the empty region and ends with ``t1`` itself.
    In strict mode it has length ``params.n_star``.
    """
    if mode not in ("adaptive", "strict"):
        raise ValueError(f"unknown mode {mode!r}")
    if geo.is_empty(t1):
        return (Polygon(),) * (params.n_star if mode == "strict" else 1)
    if core is None:
        core = geo.clean(t.difference(t1))
    if geo.is_empty(core):
        raise ValueError("station base has an empty core")
    if mode == "adaptive":
        stages = _adaptive_station_stages(t, core, params, delta_scale, max_len)
    else:
        stages = _strict_station_stages(t, t1, params, fam, sample_step)
        if len(stages) != params.n_star:
            raise ConstructionError("strict station has the wrong length", {"length": len(stages), "n_star": params.n_star})
    out: List[Region] = [Polygon()]
    for stage in stages[1:]:
        out.append(Polygon() if stage is core else geo.clean(stage.difference(core)))
    out[-1] = t1
    return tuple(out)


def build_net_alpha(
    t: Region,
    station_provider: StationProvider,
    params: NetParams,
    fam: rc.RhoFamily,
    max_len: Optional[int] = None,
    check: bool = False,
) -> Tuple[Tuple[Region, ...], Skeleton]:
    """Net of ``t`` with a skeleton that sandwiches it between the
    half-planes ``x <= chi + 3*gamma`` and ``x <= chi + 5*gamma``.

    ``t`` is cut by the balls of radius ``gamma/2 + 1/(2*gamma)`` whose
    rightmost point is ``chi(l) + 4*gamma``; each increment between two
    consecutive cuts is split by the station the provider returns for it.
    """
    if check:
        report = rc.check_F_rho(t, fam.with_rho(max(params.beta, 1.0)))
        if not report:
            raise ConstructionError("net target outside F_beta", {"condition": "net target", **(report.witness or {})})
    gamma = params.gamma
    chi = make_skeleton(t, gamma, params.n0).chi
    radius = params.clip_radius
    cuts: List[Region] = []
    for l, c in enumerate(chi, start=1):
        if l == params.n0:
            cuts.append(t)
            continue
        ball = geo.Disc((c + 4.0 * gamma - radius, 0.0), radius)
        cuts.append(geo.clip_disc(t, ball, fam.n_arc))
    stages: List[Region] = []
    skel: List[float] = []
    for l in range(2, params.n0 + 1):
        prev, cur = cuts[l - 2], cuts[l - 1]
        inc = geo.clean(cur.difference(prev)) if cur is not prev else Polygon()
        station = station_provider(cur, inc, fam)
        block = [prev if geo.is_empty(s) else geo.convex_union(prev, s) for s in station]
        block[-1] = cur
        stages.extend(block)
        skel.extend([chi[l - 2]] * len(block))
        if max_len is not None and len(stages) > max_len:
            raise BudgetExceeded("net longer than the cell budget allows", {"length": len(stages)})
    stages.append(t)
    skel.append(chi[-1])
    return tuple(stages), Skeleton(tuple(skel), gamma)


def build_anti_net(
    t: Region,
    station_provider: StationProvider,
    params: NetParams,
    fam: rc.RhoFamily,
    max_len: Optional[int] = None,
) -> Tuple[Tuple[Region, ...], Skeleton]:
    """Decreasing chain from ``t`` with the mirrored sandwich
    ``x >= chi - 3*gamma`` / ``x >= chi - 5*gamma``.

    Built as the net of the x-reflected region, reflected back and reversed.
    """
    flip = geo.REFLECT_X
    mirrored = geo.apply_transform(t, flip)
    fam_m = rc.RhoFamily(fam.rho, geo.apply_transform(fam.domain, flip), fam.n_arc)
    stages, skel = build_net_alpha(mirrored, station_provider, params, fam_m, max_len)
    back = [geo.apply_transform(s, flip) for s in reversed(stages)]
    back[0] = t
    chi = tuple(-c for c in reversed(skel.chi))
    return tuple(back), Skeleton(chi, params.gamma)


def with_counts(params: NetParams, **changes) -> NetParams:
    """Copy of ``params`` with some counts overridden, ``n1`` kept consistent."""
    updated = dataclasses.replace(params, **changes)
    if "n1" not in changes:
        updated = dataclasses.replace(updated, n1=(updated.n0 - 1) * updated.n_star + 1)
    return updated


__all__ = [
    "NetParams",
    "Skeleton",
    "StationProvider",
    "compute_params",
    "delta_rho_bar",
    "eps_of_delta",
    "make_skeleton",
    "check_sandwich",
    "validate_net",
    "validate_station",
    "station_net",
    "grow_l32",
    "chain_t23",
    "ladder_l31",
    "build_net_t22",
    "build_station",
    "build_net_alpha",
    "build_anti_net",
    "with_counts",
]
