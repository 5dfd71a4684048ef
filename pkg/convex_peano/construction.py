"""
Level-by-level construction of the partition stack.

Level 1 is the pair ``((T, {}), (T, {}))``.  Level ``j + 1`` replaces every
soul of level ``j`` by its offspring (cut along x for odd ``j``, along y for
even ``j``) and concatenates the offspring blocks in anti-order, reversing
every second block so that consecutive blocks meet at equal ends.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from . import config
from . import geometry as geo
from . import nets_stations as ns
from . import offspring as osp
from . import rho_convex as rc
from . import seq_algebra as sa
from .state import BudgetExceeded, ConstructionError, ValidationReport


# -----------------------------------------------------------------------------
# Schedule
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Schedule:
    """Per-level ``gamma``, ``beta`` and (strict mode) ``m'``.

    Lists are indexed by level, ``gammas[0]`` being ``gamma(1)``.
    ``k_chain`` / ``j_cov`` override the worst-case station counts.
    """

    gammas: Tuple[float, ...]
    betas: Tuple[float, ...]
    m_primes: Tuple[Optional[int], ...]
    depth: int
    k_chain: Optional[int] = None
    j_cov: Optional[int] = None

    def gamma(self, j: int) -> float:
        return self.gammas[j - 1]

    def beta(self, j: int) -> float:
        return self.betas[j - 1]

    def net_params(self, j: int) -> ns.NetParams:
        """Parameters of the offspring that refine level ``j``."""
        if not 1 <= j < self.depth:
            raise ValueError(f"level {j} has no successor within depth {self.depth}")
        return ns.compute_params(self.beta(j), self.gamma(j), self.gamma(j + 1), self.k_chain, self.j_cov)


def default_gamma(j: int, gamma0: float) -> float:
    return gamma0 if j == 1 else min(gamma0, 1.0 / (2 * j + 4))


def make_schedule(
    depth: int,
    gamma0: float = 0.2,
    beta1: float = 1.0,
    mode: str = config.MODE,
    k_chain: Optional[int] = None,
    j_cov: Optional[int] = None,
) -> Schedule:
    """Deterministic schedule with ``beta(j+1) = max(2 beta(j), gamma(j) + 1/gamma(j))``."""
    if not 0.0 < gamma0 < 0.25:
        raise ValueError("gamma0 must lie in (0, 1/4)")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if beta1 < 1.0:
        raise ValueError("beta(1) must be at least 1")
    gammas = tuple(default_gamma(j, gamma0) for j in range(1, depth + 1))
    betas = [float(beta1)]
    for g in gammas[:-1]:
        betas.append(max(2.0 * betas[-1], g + 1.0 / g))
    schedule = Schedule(gammas, tuple(betas), (None,) * (depth - 1), depth, k_chain, j_cov)
    if mode == "strict":
        m_primes = []
        for j in range(1, depth):
            p = schedule.net_params(j)
            m_primes.append(2 * (2 * p.n1 + p.n_star))
        schedule = Schedule(gammas, tuple(betas), tuple(m_primes), depth, k_chain, j_cov)
    return schedule


# -----------------------------------------------------------------------------
# Shapes
# -----------------------------------------------------------------------------

SHAPES = ("square", "disc", "triangle", "rectangle", "polygon")


@dataclass(frozen=True)
class ShapeSpec:
    kind: str = "square"
    aspect: float = 1.0
    path: Optional[str] = None
    n_arc: int = config.N_ARC

    def __post_init__(self) -> None:
        if self.kind not in SHAPES:
            raise ValueError(f"unknown shape {self.kind!r}")
        if self.kind == "rectangle" and not 0.0 < self.aspect <= 1.0:
            raise ValueError("aspect must lie in (0, 1]")
        if self.kind == "polygon" and not self.path:
            raise ValueError("polygon shape needs a vertex file")

    @property
    def label(self) -> str:
        if self.kind == "rectangle":
            return f"rectangle-{self.aspect:g}"
        if self.kind == "polygon":
            return Path(self.path).stem
        return self.kind

    def raw_region(self) -> geo.Region:
        if self.kind == "square":
            return geo.rectangle(0.0, 0.0, 1.0, 1.0)
        if self.kind == "rectangle":
            return geo.rectangle(0.0, 0.0, 1.0, self.aspect)
        if self.kind == "disc":
            return geo.Disc((0.0, 0.0), 0.5).polygon(self.n_arc)
        if self.kind == "triangle":
            return geo.region([(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3.0) / 2.0)])
        return geo.region(read_vertices(self.path))

    def domain(self) -> Tuple[geo.Region, geo.FrameTransform]:
        """Normalized domain and the transform back to the original frame."""
        return geo.normalize_domain(self.raw_region())


def read_vertices(path: str) -> np.ndarray:
    """Polygon vertices from a JSON list of pairs or a two-column text file."""
    p = Path(path)
    if p.suffix.lower() == ".json":
        pts = np.asarray(json.loads(p.read_text(encoding="utf-8")), dtype=float)
    else:
        pts = pd.read_csv(p, header=None, sep=r"[,\s]+", engine="python", comment="#").to_numpy(dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError(f"{path}: expected at least three x,y vertices")
    return pts


# -----------------------------------------------------------------------------
# Levels
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class PartitionLevel:
    """Souls of level ``j``; ``m_prime_used`` children per parent of level ``j - 1``."""

    j: int
    souls: sa.SoulSequence
    M: int
    m_prime_used: Optional[int] = None
    meta: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.souls) != self.M:
            raise ValueError(f"level {self.j}: {len(self.souls)} souls but M = {self.M}")

    @property
    def axis(self) -> str:
        """Axis along which this level is refined."""
        return "x" if self.j % 2 else "y"

    def bases(self) -> sa.SetSequence:
        return self.souls.bases()


def init_level(domain: geo.Region) -> PartitionLevel:
    if geo.is_empty(domain) or geo.extent(domain, "diameter") > 1.0 + 1e-9:
        raise ValueError("domain is not normalized")
    return PartitionLevel(1, sa.SoulSequence((sa.Soul(domain), sa.Soul(domain))), 2)


def _parent_key(soul: sa.Soul) -> Tuple[str, str]:
    return geo.fingerprint(soul.base), geo.fingerprint(soul.disturbance)


def next_level(
    level: PartitionLevel,
    schedule: Schedule,
    domain: geo.Region,
    mode: str = config.MODE,
    n_arc: int = config.N_ARC,
    budget: int = config.CELL_BUDGET,
    max_workers: int = config.MAX_WORKERS,
    station_delta_scale: float = 1.0,
) -> PartitionLevel:
    """Refine ``level`` into level ``j + 1``.

    Parents with equal base and disturbance share one offspring.  Offspring
    are padded to a common length before doubling so every parent gets the
    same number ``m'`` of children.
    """
    j = level.j
    params = schedule.net_params(j)
    m_fixed = schedule.m_primes[j - 1]
    if m_fixed is not None and level.M * m_fixed > budget:
        raise BudgetExceeded(
            f"level {j + 1} needs {level.M * m_fixed} cells",
            {"level": j + 1, "cells": level.M * m_fixed, "budget": budget},
        )
    max_len = max(budget // (2 * level.M), 2)
    builder = osp.OffspringBuilder(
        params, domain, level.axis, mode, n_arc, max_len, station_delta_scale
    )

    unique: Dict[Tuple[str, str], sa.Soul] = {}
    owner: List[Tuple[str, str]] = []
    for soul in level.souls:
        key = _parent_key(soul)
        unique.setdefault(key, soul)
        owner.append(key)

    children: Dict[Tuple[str, str], osp.Offspring] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(builder.offspring, soul): key for key, soul in unique.items()}
        for fut in as_completed(futures):
            key = futures[fut]
            try:
                children[key] = fut.result()
            except ConstructionError as exc:
                exc.context.setdefault("level", j)
                exc.context.setdefault("parent", owner.index(key) + 1)
                raise

    natural = max(len(c) for c in children.values())
    m_prime = m_fixed if m_fixed is not None else 2 * natural
    if natural > m_prime // 2:
        raise ConstructionError(
            "offspring longer than the fixed count",
            {"level": j, "natural": natural, "m_prime": m_prime},
        )
    if level.M * m_prime > budget:
        raise BudgetExceeded(
            f"level {j + 1} needs {level.M * m_prime} cells",
            {"level": j + 1, "cells": level.M * m_prime, "budget": budget},
        )
    doubled = {key: c.souls(m_prime // 2) for key, c in children.items()}
    souls = sa.anti_order_souls([doubled[key] for key in owner])
    meta = {"natural": float(natural), **{k: float(v) for k, v in builder.cache_sizes().items()}}
    return PartitionLevel(j + 1, souls, level.M * m_prime, m_prime, meta)


# -----------------------------------------------------------------------------
# Level checks
# -----------------------------------------------------------------------------

def extent_report(parent: PartitionLevel, child: PartitionLevel, schedule: Schedule, slack: float = 1e-2) -> ValidationReport:
    """Cells of ``child`` are at most ``11 gamma`` wide along the refined axis."""
    limit = 11.0 * schedule.gamma(parent.j) + slack
    mode = parent.axis
    bases = child.bases()
    for K, b in enumerate(bases, start=1):
        d = geo.extent(b, mode)
        if d > limit:
            return ValidationReport("extent", False, {"K": K, "axis": mode, "extent": d}, {"limit": limit}, K)
    return ValidationReport("extent", True, None, {"limit": limit}, len(bases))


def coverage_report(level: PartitionLevel, domain: geo.Region, tol: float = config.CONVEXITY_TOL) -> ValidationReport:
    gap = geo.clean(domain.difference(geo.union_all(level.bases()))).area
    limit = tol * domain.area
    witness = None if gap <= limit else {"gap": gap}
    return ValidationReport("coverage", witness is None, witness, {"area": limit}, level.M)


def membership_report(
    level: PartitionLevel,
    schedule: Schedule,
    domain: geo.Region,
    n_souls: int = 8,
    seed: int = config.SEED,
) -> ValidationReport:
    """Souls of the level lie in ``tau_{beta(j) gamma(j)}``.

    The disturbance diameter is checked on every distinct soul, F_beta(j)
    membership of base and core on ``n_souls`` sampled ones.
    """
    fam = rc.RhoFamily(max(schedule.beta(level.j), 1.0), domain)
    gamma = schedule.gamma(level.j)
    distinct = list({id(s): s for s in level.souls}.values())
    rng = np.random.default_rng(seed)
    picks = set(rng.choice(len(distinct), size=min(n_souls, len(distinct)), replace=False).tolist())
    tolerances: Dict[str, float] = {"rho": fam.rho, "gamma": gamma}
    for i, soul in enumerate(distinct):
        report = osp.soul_class_report(soul, fam, gamma, check_family=i in picks)
        tolerances = report.tolerances
        if not report:
            return ValidationReport("membership", False, {"soul": i, **(report.witness or {})}, tolerances, i + 1)
    return ValidationReport("membership", True, None, tolerances, len(distinct))


def check_level(
    parent: Optional[PartitionLevel],
    child: PartitionLevel,
    schedule: Schedule,
    domain: geo.Region,
    tolerances: Optional[Dict[str, float]] = None,
    seed: int = config.SEED,
) -> List[ValidationReport]:
    """All level checks of ``child`` (refinement and extent need ``parent``).

    ``tolerances`` may set ``equality`` (soul checks) and ``convexity``
    (hull deficiency and coverage gap, as fractions of the domain area).
    """
    tolerances = tolerances or {}
    eq_tol = tolerances.get("equality", config.EQUALITY_TOL)
    convexity = tolerances.get("convexity", config.CONVEXITY_TOL)
    reports = [
        sa.validate(child.souls, "population_of_souls", eq_tol, seed=seed),
        sa.validate(child.bases(), "population_of_sets", convexity, seed=seed, domain_area=domain.area),
        coverage_report(child, domain, convexity),
    ]
    if parent is not None:
        reports.append(sa.validate((parent.bases(), child.bases(), child.m_prime_used), "refinement"))
        reports.append(extent_report(parent, child, schedule))
    reports.append(membership_report(child, schedule, domain, seed=seed))
    return reports


def run(
    domain: geo.Region,
    depth: int,
    schedule: Optional[Schedule] = None,
    mode: str = config.MODE,
    n_arc: int = config.N_ARC,
    budget: int = config.CELL_BUDGET,
    max_workers: int = config.MAX_WORKERS,
    check: bool = True,
) -> List[PartitionLevel]:
    """Build and check levels ``1..depth``.

    Raises ``BudgetExceeded`` carrying the levels built so far, and
    ``ConstructionError`` when a level fails one of its checks.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if schedule is None:
        schedule = make_schedule(depth, mode=mode)
    if schedule.depth < depth:
        raise ValueError(f"schedule covers {schedule.depth} levels, {depth} requested")
    levels = [init_level(domain)]
    print("🔹 Level 1: M = 2")
    while len(levels) < depth:
        parent = levels[-1]
        print(f"🔹 Refining level {parent.j} along {parent.axis} (gamma = {schedule.gamma(parent.j):g})")
        try:
            child = next_level(parent, schedule, domain, mode, n_arc, budget, max_workers)
        except BudgetExceeded as exc:
            exc.levels = list(levels)
            print(f"🛑 {exc}")
            raise
        print(f"🧮 Level {child.j}: M = {child.M}, m' = {child.m_prime_used}")
        if check:
            failed = [r for r in check_level(parent, child, schedule, domain) if not r]
            if failed:
                print(f"❌ Level {child.j} failed {', '.join(r.criterion for r in failed)}")
                raise ConstructionError(
                    f"level {child.j} failed {failed[0].criterion}",
                    {"level": child.j, "criterion": failed[0].criterion, "witness": failed[0].witness},
                )
            print(f"✅ Level {child.j} passed all checks")
        levels.append(child)
    return levels


__all__ = [
    "Schedule",
    "default_gamma",
    "make_schedule",
    "SHAPES",
    "ShapeSpec",
    "read_vertices",
    "PartitionLevel",
    "init_level",
    "next_level",
    "extent_report",
    "coverage_report",
    "membership_report",
    "check_level",
    "run",
]
