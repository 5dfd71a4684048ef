"""
Souls, set sequences and the calculus used to assemble populations.

A *soul* is a convex base ``t`` with a disturbance ``t1`` such that the core
``t \\ t1`` is again convex.  A sequence of souls is a *population* when it
is regular (the disturbances are exactly the forward / backward differences
of the bases at odd / even positions) and consistent (the backward
differences precede the forward ones).  Every contiguous union of the bases
of a population is convex, which is what the curve needs.

Sequences of regions are plain tuples; indices in witnesses and masks are
1-based, matching the block arithmetic of the anti-order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from shapely import STRtree
from shapely.geometry import Polygon
from shapely.ops import unary_union

from . import config
from . import geometry as geo
from .state import ValidationReport

Region = geo.Region
SetSequence = Tuple[Region, ...]

# Area of ``small \ big`` tolerated by an inclusion test.
INCLUSION_AREA = 100.0 * config.SLIVER_AREA


# -----------------------------------------------------------------------------
# Types
# -----------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Soul:
    """Base ``t``, disturbance ``t1`` and the cached core ``t \\ t1``."""

    base: Region
    disturbance: Region = field(default_factory=Polygon)
    core: Optional[Region] = None

    def __post_init__(self) -> None:
        if self.core is None:
            if geo.is_empty(self.disturbance):
                core = self.base
            else:
                core = geo.clean(self.base.difference(self.disturbance))
            object.__setattr__(self, "core", core)

    def membership_error(self, tol: float = config.CONVEXITY_TOL) -> Optional[str]:
        """Why this pair is not a soul, or ``None``."""
        if geo.is_empty(self.base):
            return "empty base"
        if geo.is_empty(self.core):
            return "empty core"
        for name, g in (("base", self.base), ("core", self.core)):
            if geo.region_hull_deficiency(g) > tol * max(self.base.area, config.SLIVER_AREA):
                return f"{name} not convex"
        if not geo.is_empty(self.disturbance):
            if self.disturbance.difference(self.base).area > INCLUSION_AREA:
                return "disturbance not inside base"
        return None


@dataclass(frozen=True, eq=False)
class SoulSequence:
    souls: Tuple[Soul, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "souls", tuple(self.souls))

    @classmethod
    def from_parts(
        cls,
        bases: Sequence[Region],
        disturbances: Sequence[Region],
        cores: Optional[Sequence[Region]] = None,
    ) -> "SoulSequence":
        if len(bases) != len(disturbances):
            raise ValueError("bases and disturbances differ in length")
        if cores is None:
            cores = [None] * len(bases)
        return cls(tuple(Soul(b, d, c) for b, d, c in zip(bases, disturbances, cores)))

    def __len__(self) -> int:
        return len(self.souls)

    def __iter__(self):
        return iter(self.souls)

    def __getitem__(self, i):
        return self.souls[i]

    def bases(self) -> SetSequence:
        return tuple(s.base for s in self.souls)

    def disturbances(self) -> SetSequence:
        return tuple(s.disturbance for s in self.souls)

    def cores(self) -> SetSequence:
        return tuple(s.core for s in self.souls)


@dataclass(frozen=True)
class IndexMask:
    """Selector of 1-based positions: ``odd``, ``even`` or ``explicit``."""

    selector: str
    indices: FrozenSet[int] = frozenset()

    def __post_init__(self) -> None:
        if self.selector not in ("odd", "even", "explicit"):
            raise ValueError(f"unknown mask selector {self.selector!r}")
        object.__setattr__(self, "indices", frozenset(self.indices))

    def selects(self, k: int) -> bool:
        if self.selector == "odd":
            return k % 2 == 1
        if self.selector == "even":
            return k % 2 == 0
        return k in self.indices


ODD = IndexMask("odd")
EVEN = IndexMask("even")


# -----------------------------------------------------------------------------
# Elementary operations
# -----------------------------------------------------------------------------

def _difference(a: Region, b: Region) -> Region:
    if a is b or geo.is_empty(a):
        return Polygon()
    if geo.is_empty(b):
        return a
    return geo.clean(a.difference(b))


def delta(seq: Sequence[Region], direction: str = "fwd") -> SetSequence:
    """Forward (``t(k) \\ t(k-1)``) or backward (``t(k) \\ t(k+1)``) differences."""
    seq = tuple(seq)
    m = len(seq)
    if direction == "fwd":
        return tuple(Polygon() if k == 0 else _difference(seq[k], seq[k - 1]) for k in range(m))
    if direction == "bwd":
        return tuple(Polygon() if k == m - 1 else _difference(seq[k], seq[k + 1]) for k in range(m))
    raise ValueError(f"unknown direction {direction!r}")


def restrict(seq: Sequence[Region], mask: IndexMask) -> SetSequence:
    seq = tuple(seq)
    bad = [k for k in mask.indices if not 1 <= k <= len(seq)]
    if bad:
        raise ValueError(f"mask index out of range: {sorted(bad)}")
    return tuple(t if mask.selects(k) else Polygon() for k, t in enumerate(seq, start=1))


def ends(seq: Sequence[Region]) -> Tuple[Region, Region]:
    if len(seq) == 0:
        raise ValueError("ends of an empty sequence")
    return seq[0], seq[-1]


def anti_order(seqs: Sequence[Sequence[Any]]) -> Tuple[Any, ...]:
    """Concatenate blocks, reversing every block at an even position."""
    out: List[Any] = []
    for k, block in enumerate(seqs, start=1):
        out.extend(reversed(tuple(block)) if k % 2 == 0 else block)
    return tuple(out)


def anti_order_souls(blocks: Sequence[SoulSequence]) -> SoulSequence:
    return SoulSequence(anti_order([b.souls for b in blocks]))


def otimes(rbar: Region, s: Sequence[Region]) -> SetSequence:
    if geo.is_empty(rbar):
        return tuple(Polygon() for _ in s)
    return tuple(Polygon() if geo.is_empty(x) else geo.clean(rbar.intersection(x)) for x in s)


def oplus(r: Sequence[Region], s: Sequence[Region]) -> SetSequence:
    if len(r) != len(s):
        raise ValueError("oplus of sequences with different lengths")
    return tuple(geo.convex_union(a, b) for a, b in zip(r, s))


def shift_embed(p: Sequence[Region], K: int, sign: int, total_blocks: int) -> SetSequence:
    """Place ``p`` (reversed for ``sign == -1``) into block ``K`` of empties."""
    if not 1 <= K <= total_blocks:
        raise ValueError(f"block {K} outside 1..{total_blocks}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    block = tuple(p) if sign == 1 else tuple(reversed(tuple(p)))
    m = len(block)
    out = [Polygon()] * (m * total_blocks)
    out[(K - 1) * m : K * m] = block
    return tuple(out)


def union_range(seq: Sequence[Region], lo: int, hi: int) -> Region:
    """Union of the 1-based entries ``lo..hi`` (empty when ``lo > hi``)."""
    if lo > hi:
        return Polygon()
    return geo.union_all(seq[lo - 1 : hi])


# -----------------------------------------------------------------------------
# Relations
# -----------------------------------------------------------------------------

def _nonempty(seq: Sequence[Region]) -> List[int]:
    return [i for i, x in enumerate(seq) if not geo.is_empty(x)]


def _embeds(s: Sequence[Region], p: Sequence[Region], tol: float) -> bool:
    """``s >> p``: ``p`` sits in ``s`` at increasing positions, the rest empty."""
    n, k = len(s), len(p)
    if k > n:
        return False
    empty_s = [geo.is_empty(x) for x in s]
    # ok[j]: the first j entries of p are matched within the prefix scanned so far
    ok = [True] + [False] * k
    for i in range(n):
        nxt = [ok[0] and empty_s[i]] + [False] * k
        for j in range(1, k + 1):
            match = ok[j - 1] and (
                (empty_s[i] and geo.is_empty(p[j - 1]))
                or (not empty_s[i] and geo.equal_regions(s[i], p[j - 1], tol))
            )
            nxt[j] = match or (ok[j] and empty_s[i])
        ok = nxt
    return ok[k]


def _equiv(r: Sequence[Region], s: Sequence[Region], tol: float, reverse: bool = False) -> bool:
    a = [r[i] for i in _nonempty(r)]
    b = [s[i] for i in _nonempty(s)]
    if reverse:
        b = b[::-1]
    if len(a) != len(b):
        return False
    return all(geo.equal_regions(x, y, tol) for x, y in zip(a, b))


def _orthogonal(r: Sequence[Region], s: Sequence[Region]) -> bool:
    for a, b in zip(r, s):
        if geo.is_empty(a) or geo.is_empty(b):
            continue
        if a.intersection(b).area > config.SLIVER_AREA:
            return False
    return True


def _far(r: Sequence[Region], s: Sequence[Region], eps: float) -> bool:
    rs = _nonempty(r)
    ss = _nonempty(s)
    for k in rs:
        for l in ss:
            if l > k and not geo.separated(r[k], s[l], eps):
                return False
    return True


def _before(r: Sequence[Region], s: Sequence[Region]) -> bool:
    rs, ss = _nonempty(r), _nonempty(s)
    if not rs or not ss:
        return True
    return max(rs) < min(ss)


RELATIONS = ("orthogonal", "before", "far", "embeds", "equiv", "rev_equiv")


def relate(kind: str, r: Sequence[Region], s: Sequence[Region], tol: float = config.EQUALITY_TOL) -> bool:
    """Evaluate one of the sequence relations between ``r`` and ``s``.

    ``orthogonal``: no index where both entries overlap with positive area.
    ``before``: every nonempty entry of ``r`` precedes every one of ``s``.
    ``far``: ``r(k)`` and ``s(l)`` separated whenever ``k < l``.
    ``embeds``: ``r`` embeds ``s`` at increasing positions, other entries empty.
    ``equiv``: the nonempty entries agree in order.
    ``rev_equiv``: the nonempty entries agree in reversed order.
    """
    if kind not in RELATIONS:
        raise ValueError(f"unknown relation {kind!r}")
    if kind in ("orthogonal", "far") and len(r) != len(s):
        raise ValueError(f"relation {kind!r} needs equal lengths")
    if kind == "orthogonal":
        return _orthogonal(r, s)
    if kind == "before":
        return _before(r, s)
    if kind == "far":
        return _far(r, s, config.EPS_SEP)
    if kind == "embeds":
        return _embeds(r, s, tol)
    if kind == "equiv":
        return _equiv(r, s, tol)
    return _equiv(r, s, tol, reverse=True)


def find_precedence_violation(
    q: Sequence[Region],
    r: Sequence[Region],
    s: Sequence[Region],
    tol: float = config.EQUALITY_TOL,
) -> Optional[Dict[str, Any]]:
    """First pair ``k < l`` breaking ``q precedes_s r``, or ``None``.

    Each pair of nonempty ``q(k)``, ``r(l)`` must be equal, separated, or one
    of them must be included in the union of ``s`` strictly between ``k``
    and ``l``.
    """
    if not (len(q) == len(r) == len(s)):
        raise ValueError("precedes needs sequences of equal length")
    q_idx = _nonempty(q)
    r_idx = _nonempty(r)
    if not q_idx or not r_idx:
        return None
    r_tree = STRtree([r[i] for i in r_idx])
    s_idx = _nonempty(s)
    s_tree = STRtree([s[i] for i in s_idx]) if s_idx else None

    def covered(x: Region, lo: int, hi: int) -> bool:
        # x inside the union of s(lo..hi), 0-based inclusive
        if s_tree is None or lo > hi:
            return False
        hits = [s_idx[h] for h in s_tree.query(x, predicate="intersects")]
        members = [s[i] for i in hits if lo <= i <= hi]
        if not members:
            return False
        return x.difference(unary_union(members)).area <= INCLUSION_AREA

    for k in q_idx:
        near = r_tree.query(q[k].buffer(config.EPS_SEP), predicate="intersects")
        for pos in sorted(int(p) for p in near):
            l = r_idx[pos]
            if l <= k:
                continue
            a, b = q[k], r[l]
            if geo.equal_regions(a, b, tol) or geo.separated(a, b):
                continue
            if covered(a, k + 1, l - 1) or covered(b, k + 1, l - 1):
                continue
            return {"k": k + 1, "l": l + 1, "reason": "overlapping, unequal and uncovered"}
    return None


def precedes(q: Sequence[Region], r: Sequence[Region], s: Sequence[Region]) -> bool:
    return find_precedence_violation(q, r, s) is None


# -----------------------------------------------------------------------------
# Validation
# -----------------------------------------------------------------------------

CRITERIA = (
    "regular",
    "regular_pairs",
    "consistent",
    "population_of_souls",
    "population_of_sets",
    "adjacency",
    "dust",
    "anti_dust",
    "filling",
    "refinement",
)


def _report(criterion, witness, tolerances, checked) -> ValidationReport:
    return ValidationReport(
        criterion=criterion,
        passed=witness is None,
        witness=witness,
        tolerances=tolerances,
        checked=checked,
    )


def _check_regular(souls: SoulSequence, tol: float) -> Tuple[Optional[dict], int]:
    m = len(souls)
    if m % 2:
        return {"reason": "M odd", "M": m}, 0
    bases = souls.bases()
    fwd, bwd = delta(bases, "fwd"), delta(bases, "bwd")
    for k, soul in enumerate(souls, start=1):
        i = k - 1
        expected, must_vanish = (fwd[i], bwd[i]) if k % 2 else (bwd[i], fwd[i])
        if not geo.equal_regions(soul.disturbance, expected, tol):
            return {"k": k, "reason": "disturbance differs from the difference sequence"}, k
        if not geo.is_empty(must_vanish):
            return {"k": k, "reason": "opposite difference not empty"}, k
    return None, m


def _check_regular_pairs(souls: SoulSequence, tol: float) -> Tuple[Optional[dict], int]:
    m = len(souls)
    if m % 2:
        return {"reason": "M odd", "M": m}, 0
    if not geo.is_empty(souls[0].disturbance) or not geo.is_empty(souls[m - 1].disturbance):
        return {"reason": "end disturbance not empty"}, 0
    for J in range(1, m // 2 + 1):
        a, b = souls[2 * J - 2], souls[2 * J - 1]
        if not geo.equal_regions(a.base, b.base, tol):
            return {"J": J, "reason": "paired bases differ"}, J
        if 2 * J < m and not geo.equal_regions(b.core, souls[2 * J].core, tol):
            return {"J": J, "reason": "cores differ across the pair boundary"}, J
    return None, m // 2


def _check_consistent(souls: SoulSequence, tol: float) -> Tuple[Optional[dict], int]:
    t1 = souls.disturbances()
    witness = find_precedence_violation(restrict(t1, EVEN), restrict(t1, ODD), souls.bases(), tol)
    return witness, len(souls)


def _check_membership(souls: SoulSequence) -> Tuple[Optional[dict], int]:
    for k, soul in enumerate(souls, start=1):
        err = soul.membership_error()
        if err:
            return {"k": k, "reason": err}, k
    return None, len(souls)


def _ranges(m: int, rng: np.random.Generator) -> Iterable[Tuple[int, int]]:
    if m <= config.FULL_RANGE_LIMIT:
        for K in range(1, m + 1):
            for L in range(K, m + 1):
                yield K, L
        return
    for K in range(1, m + 1):
        for L in range(K, min(m, K + 2) + 1):
            yield K, L
    for _ in range(config.RANDOM_RANGES):
        K, L = sorted(int(v) for v in rng.integers(1, m + 1, size=2))
        yield K, L


def _check_population_of_sets(
    seq: Sequence[Region], tol: float, seed: int, domain_area: Optional[float]
) -> Tuple[Optional[dict], int]:
    seq = tuple(seq)
    m = len(seq)
    if m == 0:
        return {"reason": "empty sequence"}, 0
    area = domain_area if domain_area else geo.union_all(seq).area
    limit = tol * area
    rng = np.random.default_rng(seed)
    checked = 0
    if m <= config.FULL_RANGE_LIMIT:
        for K in range(1, m + 1):
            u = Polygon()
            for L in range(K, m + 1):
                u = geo.clean(unary_union([u, seq[L - 1]])) if not geo.is_empty(u) else seq[L - 1]
                checked += 1
                if geo.is_empty(u):
                    return {"K": K, "L": L, "reason": "empty interior"}, checked
                gap = geo.region_hull_deficiency(u)
                if gap > limit:
                    return {"K": K, "L": L, "reason": "union not convex", "deficiency": gap}, checked
        return None, checked
    for K, L in _ranges(m, rng):
        u = union_range(seq, K, L)
        checked += 1
        if geo.is_empty(u):
            return {"K": K, "L": L, "reason": "empty interior"}, checked
        gap = geo.region_hull_deficiency(u)
        if gap > limit:
            return {"K": K, "L": L, "reason": "union not convex", "deficiency": gap}, checked
    return None, checked


def _check_adjacency(seq: Sequence[Region], tol: float) -> Tuple[Optional[dict], int]:
    seq = tuple(seq)
    m = len(seq)
    for K in range(1, m):
        a, b = seq[K - 1], seq[K]
        if a.intersection(b).is_empty:
            return {"K": K, "condition": 1, "reason": "adjacent cells disjoint"}, K
        if not geo.separated(_difference(a, b), _difference(b, a)):
            return {"K": K, "condition": 2, "reason": "adjacent differences touch"}, K
    span = m if m <= config.FULL_RANGE_LIMIT else 4
    checked = m
    for K in range(1, m + 1):
        for L in range(K + 2, min(m, K + span) + 1):
            inner = union_range(seq, K + 1, L - 1)
            p, q = _difference(seq[K - 1], inner), _difference(seq[L - 1], inner)
            checked += 1
            if geo.equal_regions(p, q, tol) or geo.separated(p, q):
                continue
            return {"K": K, "L": L, "condition": 3, "reason": "ends overlap outside the middle"}, checked
    return None, checked


def _pairs(subject) -> List[Tuple[Soul, SoulSequence]]:
    pairs = list(subject)
    for parent, child in pairs:
        if not isinstance(parent, Soul) or not isinstance(child, SoulSequence):
            raise ValueError("offspring criteria take (Soul, SoulSequence) pairs")
    return pairs


def _pair_sample(pairs, parts: Sequence[str], n_pairs: int, seed: int) -> List[Tuple[int, int]]:
    """Parent index pairs to compare.

    All pairs when there are at most ``n_pairs``; otherwise a seeded draw
    that takes pairs sharing one of the named components first.
    """
    combos = list(itertools.combinations(range(len(pairs)), 2))
    if len(combos) <= n_pairs:
        return combos
    prints = [tuple(geo.fingerprint(getattr(p, name)) for name in parts) for p, _ in pairs]

    def shares(c: Tuple[int, int]) -> bool:
        return any(a == b != "empty" for a, b in zip(prints[c[0]], prints[c[1]]))

    sharing = [c for c in combos if shares(c)]
    rest = [c for c in combos if not shares(c)]
    rng = np.random.default_rng(seed)
    drawn = [sharing[k] for k in rng.permutation(len(sharing))] + [rest[k] for k in rng.permutation(len(rest))]
    return sorted(drawn[:n_pairs])


def _check_dust(pairs, tol, n_pairs, seed) -> Tuple[Optional[dict], int]:
    dusts = [restrict(child.disturbances(), ODD) for _, child in pairs]
    checked = 0
    for i, (parent, _) in enumerate(pairs):
        s = dusts[i]
        inner, outer = otimes(parent.disturbance, s), otimes(parent.core, s)
        checked += 1
        if not relate("orthogonal", inner, outer):
            return {"parent": i, "condition": 1}, checked
        if not relate("far", inner, outer):
            return {"parent": i, "condition": 2}, checked
    for i, j in _pair_sample(pairs, ("disturbance", "core"), n_pairs, seed):
        (p, _), (q, _) = pairs[i], pairs[j]
        checked += 1
        if geo.equal_regions(p.disturbance, q.disturbance, tol):
            if not relate("equiv", otimes(p.disturbance, dusts[i]), otimes(q.disturbance, dusts[j]), tol):
                return {"parents": [i, j], "condition": 3}, checked
        if geo.equal_regions(p.core, q.core, tol):
            if not relate("equiv", otimes(p.core, dusts[i]), otimes(q.core, dusts[j]), tol):
                return {"parents": [i, j], "condition": 4}, checked
    return None, checked


def _check_anti_dust(pairs, tol, n_pairs, seed) -> Tuple[Optional[dict], int]:
    anti = [restrict(child.disturbances(), EVEN) for _, child in pairs]
    checked = 0
    for i, j in _pair_sample(pairs, ("base",), n_pairs, seed):
        checked += 1
        if geo.equal_regions(pairs[i][0].base, pairs[j][0].base, tol):
            if not relate("equiv", anti[i], anti[j], tol):
                return {"parents": [i, j], "condition": 5}, checked
    return None, checked


def _check_filling(pairs, tol, cover_tol, n_pairs, seed) -> Tuple[Optional[dict], int]:
    checked = 0
    for i, (parent, child) in enumerate(pairs):
        checked += 1
        u = geo.union_all(child.bases())
        gap = parent.base.symmetric_difference(u).area
        if gap > cover_tol * parent.base.area:
            return {"parent": i, "condition": 6, "gap": gap}, checked
    for i, j in _pair_sample(pairs, ("core", "base"), n_pairs, seed):
        (p, a), (q, b) = pairs[i], pairs[j]
        checked += 1
        if geo.equal_regions(p.core, q.core, tol):
            if not geo.equal_regions(a.bases()[0], b.bases()[0], tol):
                return {"parents": [i, j], "condition": 7}, checked
        if geo.equal_regions(p.base, q.base, tol):
            if not geo.equal_regions(a.bases()[-1], b.bases()[-1], tol):
                return {"parents": [i, j], "condition": 8}, checked
    return None, checked


def _check_refinement(subject, tol: float) -> Tuple[Optional[dict], int]:
    parents, children, m_prime = subject
    parents, children = tuple(parents), tuple(children)
    if len(children) != len(parents) * m_prime:
        return {"reason": "length mismatch", "M": len(parents), "children": len(children)}, 0
    for K, parent in enumerate(parents, start=1):
        block = geo.union_all(children[(K - 1) * m_prime : K * m_prime])
        d = geo.hausdorff(parent, block)
        if d > tol:
            return {"K": K, "reason": "parent differs from its children", "hausdorff": d}, K
    return None, len(parents)


def validate(subject: Any, criterion: str, tol: Optional[float] = None, **opts: Any) -> ValidationReport:
    """Run one verifier and return its report.

    Subjects by criterion:
      regular, regular_pairs, consistent, population_of_souls: ``SoulSequence``
      population_of_sets, adjacency: sequence of regions
      dust, anti_dust, filling: iterable of ``(parent Soul, offspring SoulSequence)``
      refinement: ``(parent bases, child bases, m_prime)``

    ``tol`` is the region-equality tolerance, except for population_of_sets
    (hull deficiency as a fraction of the domain area) and refinement
    (Hausdorff distance).  ``opts`` may carry ``seed``, ``domain_area`` and
    ``n_pairs``, the number of parent pairs the offspring criteria compare.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}")
    eq_tol = config.EQUALITY_TOL if tol is None else tol
    seed = int(opts.get("seed", config.SEED))

    if criterion in ("regular", "regular_pairs", "consistent", "population_of_souls"):
        if not isinstance(subject, SoulSequence):
            raise ValueError(f"{criterion} needs a SoulSequence")
        tolerances = {"equality": eq_tol, "separation": config.EPS_SEP}
        if criterion == "regular":
            witness, checked = _check_regular(subject, eq_tol)
            return _report(criterion, witness, tolerances, checked)
        if criterion == "regular_pairs":
            witness, checked = _check_regular_pairs(subject, eq_tol)
            return _report(criterion, witness, tolerances, checked)
        if criterion == "consistent":
            witness, checked = _check_consistent(subject, eq_tol)
            return _report(criterion, witness, tolerances, checked)
        checked = 0
        for name, check in (
            ("membership", lambda: _check_membership(subject)),
            ("regular", lambda: _check_regular(subject, eq_tol)),
            ("consistent", lambda: _check_consistent(subject, eq_tol)),
        ):
            witness, n = check()
            checked += n
            if witness is not None:
                return _report(criterion, {"part": name, **witness}, tolerances, checked)
        return _report(criterion, None, tolerances, checked)

    if criterion == "population_of_sets":
        frac = config.CONVEXITY_TOL if tol is None else tol
        witness, checked = _check_population_of_sets(subject, frac, seed, opts.get("domain_area"))
        return _report(criterion, witness, {"hull_deficiency": frac}, checked)

    if criterion == "adjacency":
        witness, checked = _check_adjacency(subject, eq_tol)
        return _report(criterion, witness, {"equality": eq_tol, "separation": config.EPS_SEP}, checked)

    if criterion == "refinement":
        h_tol = 2.0 * geo.arc_tolerance(2.0) if tol is None else tol
        witness, checked = _check_refinement(subject, h_tol)
        return _report(criterion, witness, {"hausdorff": h_tol}, checked)

    pairs = _pairs(subject)
    n_pairs = int(opts.get("n_pairs", config.DUST_PAIRS))
    tolerances = {"equality": eq_tol, "separation": config.EPS_SEP, "pairs": n_pairs}
    if criterion == "dust":
        witness, checked = _check_dust(pairs, eq_tol, n_pairs, seed)
    elif criterion == "anti_dust":
        witness, checked = _check_anti_dust(pairs, eq_tol, n_pairs, seed)
    else:
        cover = float(opts.get("coverage_tol", config.CONVEXITY_TOL))
        tolerances["coverage"] = cover
        witness, checked = _check_filling(pairs, eq_tol, cover, n_pairs, seed)
    return _report(criterion, witness, tolerances, checked)


__all__ = [
    "Soul",
    "SoulSequence",
    "SetSequence",
    "IndexMask",
    "ODD",
    "EVEN",
    "RELATIONS",
    "CRITERIA",
    "delta",
    "restrict",
    "ends",
    "anti_order",
    "anti_order_souls",
    "otimes",
    "oplus",
    "shift_embed",
    "union_range",
    "relate",
    "precedes",
    "find_precedence_violation",
    "validate",
]
