"""
Offspring of a soul: the population of souls that refines it.

For a soul ``(t, t1)`` with core ``c = t \\ t1`` the builder

  1. takes a net of ``c`` and an anti-net of ``t`` with their skeletons,
  2. stretches both to a common length so the skeletons stay ``gamma`` apart,
  3. inserts the station of ``t1`` where ``t1`` fits under the anti-net
     skeleton, holding the other sequences still meanwhile,
  4. unites station and net pointwise and intersects with the anti-net,
  5. doubles every cell and reads the disturbances off the differences.

Stations, nets and anti-nets are memoized by the fingerprint of ``t1``,
``c`` and ``t`` respectively, so parents sharing a component share the
corresponding part of their offspring.  Repeated entries are the same
objects throughout, which keeps their differences exactly empty.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from shapely.geometry import Polygon

from . import config
from . import geometry as geo
from . import nets_stations as ns
from . import rho_convex as rc
from . import seq_algebra as sa
from .state import ConstructionError, ValidationReport

Region = geo.Region


# -----------------------------------------------------------------------------
# Stretches
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class StretchMap:
    """Nondecreasing surjection from target positions onto source positions.

    ``targets[i]`` is the 0-based source index shown at target position i.
    """

    targets: Tuple[int, ...]
    source_len: int
    target_len: int = -1

    def __post_init__(self) -> None:
        targets = tuple(int(k) for k in self.targets)
        object.__setattr__(self, "targets", targets)
        if self.target_len == -1:
            object.__setattr__(self, "target_len", len(targets))
        if self.target_len != len(targets):
            raise ValueError("target_len does not match the map")
        if not targets or self.source_len < 1:
            raise ValueError("empty stretch")
        steps = np.diff(targets)
        if targets[0] != 0 or targets[-1] != self.source_len - 1 or np.any((steps != 0) & (steps != 1)):
            raise ValueError("a stretch must be nondecreasing and surjective")

    @classmethod
    def identity(cls, n: int) -> "StretchMap":
        return cls(tuple(range(n)), n)

    @classmethod
    def repeat_at(cls, n: int, index: int, extra: int) -> "StretchMap":
        """Repeat the 0-based ``index`` ``extra`` more times."""
        return cls(tuple(range(index + 1)) + (index,) * extra + tuple(range(index + 1, n)), n)


def stretch(seq: Sequence[Any], smap: StretchMap):
    """Element-repeated copy of ``seq``; tuples, lists and arrays keep their type."""
    if len(seq) != smap.source_len:
        raise ValueError(f"stretch expects {smap.source_len} entries, got {len(seq)}")
    if isinstance(seq, np.ndarray):
        return seq[list(smap.targets)]
    out = [seq[k] for k in smap.targets]
    return out if isinstance(seq, list) else tuple(out)


def merge_skeletons(
    chi: Sequence[float],
    psi: Sequence[float],
    gamma: float,
    tol: float = 1e-9,
) -> Tuple[StretchMap, StretchMap]:
    """Stretch two skeletons to the common length ``len(chi) + len(psi)``
    so that they differ by at most ``gamma`` everywhere.

    Works backwards from the ends, always retiring the larger of the two
    current last elements.
    """
    chi, psi = tuple(chi), tuple(psi)
    m0, n0 = len(chi), len(psi)
    if m0 == 0 or n0 == 0:
        raise ValueError("empty skeleton")
    if abs(chi[0] - psi[0]) > gamma + tol or abs(chi[-1] - psi[-1]) > gamma + tol:
        raise ValueError("skeleton endpoints differ by more than gamma")
    tail: List[Tuple[int, int]] = []
    m, n = m0, n0
    while True:
        if m == 1 and n == 1:
            head = [(1, 1), (1, 1)]
            break
        if chi[m - 1] >= psi[n - 1]:
            if m == 1:
                head = [(1, k) for k in range(1, n + 1)] + [(1, n)]
                break
            tail.append((m, n))
            m -= 1
        else:
            if n == 1:
                head = [(k, 1) for k in range(1, m + 1)] + [(m, 1)]
                break
            tail.append((m, n))
            n -= 1
    pairs = head + tail[::-1]
    a = StretchMap(tuple(i - 1 for i, _ in pairs), m0)
    b = StretchMap(tuple(j - 1 for _, j in pairs), n0)
    gap = max(abs(chi[i] - psi[j]) for i, j in zip(a.targets, b.targets))
    if gap > gamma + tol:
        raise ValueError(f"merged skeletons differ by {gap:.6g}")
    return a, b


# -----------------------------------------------------------------------------
# Assembly steps
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Aligned:
    plus: Tuple[Region, ...]
    minus: Tuple[Region, ...]
    chi_minus: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.plus)


@dataclass(frozen=True)
class Inserted:
    station: Tuple[Region, ...]
    plus: Tuple[Region, ...]
    minus: Tuple[Region, ...]
    chi_minus: Tuple[float, ...]
    l0: int

    def __len__(self) -> int:
        return len(self.station)


def align_net_antinet(
    soul: sa.Soul,
    net_plus: Sequence[Region],
    skel_plus: ns.Skeleton,
    anti_minus: Sequence[Region],
    skel_minus: ns.Skeleton,
    gamma: float,
    tol: Optional[float] = None,
) -> Aligned:
    """Stretch the core net and the anti-net to a common length.

    Certifies that the net stays between ``x <= chi- + 2*gamma`` and
    ``x <= chi- + 6*gamma`` on the core, where ``chi-`` is the stretched
    anti-net skeleton.
    """
    try:
        k_plus, k_minus = merge_skeletons(skel_plus.chi, skel_minus.chi, gamma)
    except ValueError as exc:
        raise ConstructionError(str(exc), {"condition": "skeleton merge"}) from exc
    plus = stretch(tuple(net_plus), k_plus)
    minus = stretch(tuple(anti_minus), k_minus)
    chi_minus = stretch(skel_minus.chi, k_minus)
    bad = ns.check_sandwich(plus, chi_minus, 2.0, 6.0, soul.core, gamma, "prec", tol)
    if bad is not None:
        raise ConstructionError("net leaves its sandwich", {"condition": "net sandwich", "l": bad})
    return Aligned(plus, minus, chi_minus)


def insert_station(
    aligned: Aligned,
    station: Sequence[Region],
    t1: Region,
    gamma: float,
    tol: float = 1e-9,
) -> Inserted:
    """Insert ``station`` at the first position ``l0`` where ``t1`` lies in
    ``x <= chi-(l0) + gamma``; the other sequences repeat their ``l0`` entry
    meanwhile."""
    station = tuple(station)
    if not station or not geo.is_empty(station[0]):
        raise ValueError("a station starts with the empty region")
    size = len(aligned)
    if geo.is_empty(t1):
        l0 = 1
    else:
        right = t1.bounds[2]
        l0 = next((l for l, c in enumerate(aligned.chi_minus, start=1) if right <= c + gamma + tol), None)
        if l0 is None:
            raise ConstructionError("disturbance fits under no skeleton entry", {"condition": "station position"})
    empty, last = station[0], station[-1]
    padded = (empty,) * l0 + station + (last,) * (size - l0)

    def hold(seq):
        seq = tuple(seq)
        return seq[:l0] + (seq[l0 - 1],) * len(station) + seq[l0:]

    plus, minus, chi = hold(aligned.plus), hold(aligned.minus), hold(aligned.chi_minus)
    if not sa.relate("orthogonal", sa.delta(plus), sa.delta(padded)):
        raise ConstructionError("net and station grow at the same position", {"condition": "station orthogonality"})
    if not geo.is_empty(t1):
        bad = ns.check_sandwich(padded, chi, -1.0, 1.0, t1, gamma, "prec", max(tol, 1e-7))
        if bad is not None:
            raise ConstructionError("station leaves its sandwich", {"condition": "station sandwich", "l": bad})
    return Inserted(padded, plus, minus, chi, l0)


def combine_and_intersect(inserted: Inserted, soul: sa.Soul, gamma: float) -> Tuple[Region, ...]:
    """Cells ``(station | net) & anti-net``, certified for coverage, width
    and convexity."""
    unions: Dict[Tuple[int, int], Region] = {}
    cells_by_pair: Dict[Tuple[int, int], Region] = {}
    area = max(soul.base.area, config.SLIVER_AREA)
    cells: List[Region] = []
    for l, (s, p, q) in enumerate(zip(inserted.station, inserted.plus, inserted.minus), start=1):
        key = (id(s), id(p))
        if key not in unions:
            u = p if geo.is_empty(s) else geo.convex_union(p, s)
            if geo.region_hull_deficiency(u) > config.CONVEXITY_TOL * area:
                raise ConstructionError("station and net do not unite convexly", {"condition": "net union", "l": l})
            unions[key] = u
        u = unions[key]
        key = (id(u), id(q))
        if key not in cells_by_pair:
            cell = u if q is soul.base else geo.clean(u.intersection(q))
            if geo.is_empty(cell):
                raise ConstructionError("empty offspring cell", {"condition": "cell interior", "l": l})
            cells_by_pair[key] = cell
        cells.append(cells_by_pair[key])
    slack = 2.0 * geo.arc_tolerance(0.5 * gamma + 0.5 / gamma) + 1e-6
    for l, cell in enumerate(cells, start=1):
        if geo.extent(cell, "x") > 11.0 * gamma + slack:
            raise ConstructionError("offspring cell too wide", {"condition": "width", "l": l})
    gap = geo.clean(soul.base.difference(geo.union_all(dict.fromkeys(cells, None).keys())))
    if gap.area > config.CONVEXITY_TOL * area:
        raise ConstructionError("offspring does not cover its parent", {"condition": "coverage", "gap": gap.area})
    return tuple(cells)


def expand_doubled(cells: Sequence[Region], pad_to: Optional[int] = None) -> sa.SoulSequence:
    """Double every cell and attach the forward / backward differences.

    With ``pad_to`` the cells are first padded by repeating the last one.
    """
    seq = list(cells)
    if not seq:
        raise ValueError("no cells to expand")
    if pad_to is not None:
        if pad_to < len(seq):
            raise ValueError(f"cannot pad {len(seq)} cells down to {pad_to}")
        seq.extend([seq[-1]] * (pad_to - len(seq)))
    shared: Dict[int, Region] = {}

    def overlap(i: int) -> Region:
        # cells i and i + 1
        if i not in shared:
            a, b = seq[i], seq[i + 1]
            shared[i] = a if a is b else geo.clean(a.intersection(b))
        return shared[i]

    def diff(a: Region, b: Region) -> Region:
        return Polygon() if a is b else geo.clean(a.difference(b))

    souls: List[sa.Soul] = []
    for i, cell in enumerate(seq):
        t1 = diff(cell, seq[i - 1]) if i > 0 else Polygon()
        souls.append(sa.Soul(cell, t1, cell if geo.is_empty(t1) else overlap(i - 1)))
        t1 = diff(cell, seq[i + 1]) if i + 1 < len(seq) else Polygon()
        souls.append(sa.Soul(cell, t1, cell if geo.is_empty(t1) else overlap(i)))
    return sa.SoulSequence(tuple(souls))


# -----------------------------------------------------------------------------
# Preconditions
# -----------------------------------------------------------------------------

def soul_class_report(
    soul: sa.Soul,
    fam: rc.RhoFamily,
    gamma: float,
    slack: Optional[float] = None,
    check_family: bool = True,
) -> ValidationReport:
    """Sampled membership of ``soul`` in ``tau_{beta gamma}`` with ``beta = fam.rho``.

    Base and core must lie in F_beta and the disturbance must have diameter
    at most ``gamma``.  The diameter is taken after removing a ``slack``
    collar of the core, the arc allowance net increments are built with.
    With ``check_family`` off only the diameter is checked.
    """
    if slack is None:
        slack = 3.0 * geo.arc_tolerance(fam.rho, fam.n_arc)
    tolerances = {"diameter": gamma + slack, "rho": fam.rho, "containment": fam.tolerance}
    if geo.is_empty(soul.base) or geo.is_empty(soul.core):
        return ValidationReport("soul_class", False, {"reason": "empty base or core"}, tolerances, 0)
    if not geo.is_empty(soul.disturbance):
        loose = geo.clean(soul.disturbance.difference(soul.core.buffer(slack)))
        d = 0.0 if geo.is_empty(loose) else geo.extent(loose, "diameter")
        if d > gamma + slack:
            return ValidationReport("soul_class", False, {"reason": "disturbance too wide", "diameter": d}, tolerances, 1)
    if not check_family:
        return ValidationReport("soul_class", True, None, tolerances, 1)
    regions = (("base", soul.base),) if soul.core is soul.base else (("base", soul.base), ("core", soul.core))
    for i, (name, g) in enumerate(regions, start=1):
        report = rc.check_F_rho(g, fam)
        if not report:
            witness = {"reason": f"{name} outside F_rho", **(report.witness or {})}
            return ValidationReport("soul_class", False, witness, tolerances, i)
    return ValidationReport("soul_class", True, None, tolerances, len(regions))


# -----------------------------------------------------------------------------
# Builder
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class OffspringParams:
    net_params: ns.NetParams
    m_prime: Optional[int] = None
    axis: str = "x"

    def __post_init__(self) -> None:
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        if self.m_prime is not None and (self.m_prime < 2 or self.m_prime % 2):
            raise ValueError("m_prime must be a positive even count")

    @classmethod
    def strict(cls, net_params: ns.NetParams, axis: str = "x") -> "OffspringParams":
        return cls(net_params, 2 * (2 * net_params.n1 + net_params.n_star), axis)


@dataclass(frozen=True)
class Offspring:
    """Cells of one parent in the original frame, before doubling."""

    cells: Tuple[Region, ...]

    def __len__(self) -> int:
        return len(self.cells)

    def souls(self, pad_to: Optional[int] = None) -> sa.SoulSequence:
        return expand_doubled(self.cells, pad_to)


class OffspringBuilder:
    """Per-level offspring factory holding the memo tables.

    The tables are read without locking and filled with ``setdefault`` under
    a lock, so concurrent builders agree on a single object per key.
    """

    def __init__(
        self,
        params: ns.NetParams,
        domain: Region,
        axis: str = "x",
        mode: str = config.MODE,
        n_arc: int = config.N_ARC,
        max_len: Optional[int] = None,
        station_delta_scale: float = 1.0,
    ):
        if axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
        if mode not in ("adaptive", "strict"):
            raise ValueError(f"unknown mode {mode!r}")
        self.params = params
        self.axis = axis
        self.mode = mode
        self.max_len = max_len
        self.station_delta_scale = station_delta_scale
        self.frame = geo.SWAP_XY if axis == "y" else geo.IDENTITY
        self.domain = geo.apply_transform(domain, self.frame) if axis == "y" else domain
        self.fam = rc.RhoFamily(params.beta_prime, self.domain, n_arc)
        self.soul_fam = rc.RhoFamily(max(params.beta, 1.0), self.domain, n_arc)
        self._lock = threading.Lock()
        self._stations: Dict[str, Tuple[Region, ...]] = {}
        self._served: Set[Tuple[str, str]] = set()
        self._nets: Dict[str, Tuple[Tuple[Region, ...], ns.Skeleton]] = {}
        self._anti: Dict[str, Tuple[Tuple[Region, ...], ns.Skeleton]] = {}

    def _remember(self, table: dict, key: str, value):
        with self._lock:
            return table.setdefault(key, value)

    def station(self, base: Region, t1: Region, fam: rc.RhoFamily, core: Optional[Region] = None) -> Tuple[Region, ...]:
        """Station of ``t1``, shared by every base with this disturbance.

        A stored station is checked against each further base before it is
        handed out for it.
        """
        if geo.is_empty(t1):
            return ns.build_station(base, t1, self.params, fam, self.mode)
        key = geo.fingerprint(t1)
        served = (key, geo.fingerprint(base))
        hit = self._stations.get(key)
        if hit is None:
            value = ns.build_station(
                base, t1, self.params, fam, self.mode, self.station_delta_scale, self.max_len, core
            )
            hit = self._remember(self._stations, key, value)
            if hit is value:
                with self._lock:
                    self._served.add(served)
                return hit
        if served not in self._served:
            report = ns.validate_station(hit, [base], self.params, fam)
            if not report:
                raise ConstructionError(
                    "shared station does not serve this base",
                    {"condition": "station reuse", **(report.witness or {})},
                )
            with self._lock:
                self._served.add(served)
        return hit

    def net(self, core: Region):
        key = geo.fingerprint(core)
        hit = self._nets.get(key)
        if hit is not None:
            return hit
        value = ns.build_net_alpha(core, self.station, self.params, self.fam, self.max_len)
        return self._remember(self._nets, key, value)

    def anti_net(self, t: Region):
        key = geo.fingerprint(t)
        hit = self._anti.get(key)
        if hit is not None:
            return hit
        value = ns.build_anti_net(t, self.station, self.params, self.fam, self.max_len)
        return self._remember(self._anti, key, value)

    def _to_frame(self, soul: sa.Soul) -> sa.Soul:
        if self.axis == "x":
            return soul
        f = self.frame
        return sa.Soul(
            geo.apply_transform(soul.base, f),
            geo.apply_transform(soul.disturbance, f),
            geo.apply_transform(soul.core, f),
        )

    def _from_frame(self, cells: Tuple[Region, ...]) -> Tuple[Region, ...]:
        if self.axis == "x":
            return cells
        moved: Dict[int, Region] = {}
        for c in cells:
            if id(c) not in moved:
                moved[id(c)] = geo.apply_transform(c, self.frame)
        return tuple(moved[id(c)] for c in cells)

    def offspring(self, soul: sa.Soul) -> Offspring:
        work = self._to_frame(soul)
        gamma = self.params.gamma
        report = soul_class_report(work, self.soul_fam, gamma)
        if not report:
            raise ConstructionError(
                "parent soul outside tau_beta_gamma",
                {"condition": "precondition", "beta": self.soul_fam.rho, "gamma": gamma, **(report.witness or {})},
            )
        plus, skel_plus = self.net(work.core)
        minus, skel_minus = self.anti_net(work.base)
        aligned = align_net_antinet(work, plus, skel_plus, minus, skel_minus, gamma)
        station = self.station(work.base, work.disturbance, self.fam, work.core)
        inserted = insert_station(aligned, station, work.disturbance, gamma)
        cells = combine_and_intersect(inserted, work, gamma)
        return Offspring(self._from_frame(cells))

    def cache_sizes(self) -> Dict[str, int]:
        return {"stations": len(self._stations), "nets": len(self._nets), "anti_nets": len(self._anti)}


def make_offspring(
    soul: sa.Soul,
    params: OffspringParams,
    domain: Region,
    builder: Optional[OffspringBuilder] = None,
) -> Tuple[sa.SetSequence, sa.SetSequence]:
    """Bases and disturbances of the offspring of ``soul``.

    Without ``params.m_prime`` the natural length is kept.
    """
    if builder is None:
        builder = OffspringBuilder(params.net_params, domain, params.axis)
    child = builder.offspring(soul)
    pad_to = None if params.m_prime is None else params.m_prime // 2
    souls = child.souls(pad_to)
    return souls.bases(), souls.disturbances()


__all__ = [
    "StretchMap",
    "stretch",
    "merge_skeletons",
    "Aligned",
    "Inserted",
    "align_net_antinet",
    "insert_station",
    "combine_and_intersect",
    "expand_doubled",
    "soul_class_report",
    "OffspringParams",
    "Offspring",
    "OffspringBuilder",
    "make_offspring",
]
