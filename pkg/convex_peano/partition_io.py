"""
JSON persistence of partition stacks and reports.

Layout of a partition file::

    {"meta": {"label": ..., "mode": ..., "gamma": [...], "beta": [...],
              "m_prime": [...], "transform": {...}, "domain": ring},
     "levels": [{"j": 1, "M": 2, "m_prime": null,
                 "cells": [{"K": 1, "base": ring, "disturbance": ring,
                            "core": ring}, ...]}, ...]}

A ring is a list of ``[x, y]`` vertices in the normalized frame, the empty
region is ``[]`` and a multipart region is a list of rings.  Holes are not
stored; every region the construction produces is simply connected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from shapely.geometry import MultiPolygon, Polygon

from . import geometry as geo
from . import seq_algebra as sa
from .construction import PartitionLevel, Schedule
from .curve import CurvePartition

REQUIRED_KEYS = ("meta", "levels")


# -----------------------------------------------------------------------------
# Regions
# -----------------------------------------------------------------------------

def _ring(p: Polygon) -> List[List[float]]:
    return [[float(x), float(y)] for x, y in list(p.exterior.coords)[:-1]]


def region_to_json(t: geo.Region) -> list:
    parts = geo.polygons(t)
    if not parts:
        return []
    if len(parts) == 1:
        return _ring(parts[0])
    return [_ring(p) for p in parts]


def _is_ring(data: list) -> bool:
    return bool(data) and isinstance(data[0], list) and len(data[0]) == 2 and not isinstance(data[0][0], list)


def region_from_json(data: list, interned: Optional[Dict[str, geo.Region]] = None) -> geo.Region:
    """Inverse of ``region_to_json``.

    With ``interned`` equal rings load as one shared object, which keeps
    differences of repeated cells exactly empty.
    """
    if not data:
        return Polygon()
    key = json.dumps(data) if interned is not None else None
    if key is not None and key in interned:
        return interned[key]
    if _is_ring(data):
        t: geo.Region = geo.region(data)
    else:
        t = geo.clean(MultiPolygon([Polygon([tuple(map(float, p)) for p in r]) for r in data]))
    if key is not None:
        interned[key] = t
    return t


# -----------------------------------------------------------------------------
# Partitions
# -----------------------------------------------------------------------------

def partition_to_dict(cp: CurvePartition, schedule: Optional[Schedule] = None, **meta: Any) -> Dict[str, Any]:
    info: Dict[str, Any] = {k: v for k, v in cp.meta.items() if k not in ("gamma", "beta", "m_prime")}
    info.update(meta)
    if schedule is not None:
        info["gamma"] = list(schedule.gammas)
        info["beta"] = list(schedule.betas)
    else:
        info["gamma"] = list(cp.meta.get("gamma", []))
        info["beta"] = list(cp.meta.get("beta", []))
    info["m_prime"] = [lvl.m_prime_used for lvl in cp.levels[1:]]
    info["transform"] = cp.transform.to_dict()
    info["domain"] = region_to_json(cp.domain)
    levels = []
    for lvl in cp.levels:
        cells = [
            {
                "K": K,
                "base": region_to_json(s.base),
                "disturbance": region_to_json(s.disturbance),
                "core": region_to_json(s.core),
            }
            for K, s in enumerate(lvl.souls, start=1)
        ]
        levels.append({"j": lvl.j, "M": lvl.M, "m_prime": lvl.m_prime_used, "cells": cells})
    return {"meta": info, "levels": levels}


def dict_to_partition(data: Dict[str, Any]) -> CurvePartition:
    meta = dict(data["meta"])
    interned: Dict[str, geo.Region] = {}
    domain = region_from_json(meta.pop("domain"), interned)
    transform = geo.FrameTransform.from_dict(meta.pop("transform", {}))
    levels = []
    for raw in data["levels"]:
        souls = []
        for cell in raw["cells"]:
            base = region_from_json(cell["base"], interned)
            dist = region_from_json(cell.get("disturbance", []), interned)
            core = region_from_json(cell["core"], interned) if "core" in cell else None
            souls.append(sa.Soul(base, dist, core))
        levels.append(PartitionLevel(int(raw["j"]), sa.SoulSequence(tuple(souls)), int(raw["M"]), raw.get("m_prime")))
    return CurvePartition(levels, domain, transform, meta)


def schedule_from_meta(cp: CurvePartition) -> Optional[Schedule]:
    gammas = cp.meta.get("gamma") or []
    betas = cp.meta.get("beta") or []
    if len(gammas) < cp.depth or len(betas) < cp.depth:
        return None
    m_primes = tuple(lvl.m_prime_used for lvl in cp.levels[1:])
    return Schedule(tuple(gammas[: cp.depth]), tuple(betas[: cp.depth]), m_primes, cp.depth)


def extract_and_validate_partition(text: str) -> Tuple[bool, Optional[Dict[str, Any]], Any]:
    """Parse a partition file body.

    Returns ``(True, parsed, None)`` or ``(False, None, error)`` where the
    error is a string or a dict with a ``"type"`` key.
    """
    try:
        parsed = json.loads(text)
    except json.JSONDecodeError as exc:
        return (False, None, f"JSONDecodeError: {exc}")
    if not isinstance(parsed, dict):
        return (False, None, "partition must be a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in parsed]
    if missing:
        return (False, None, {"type": "missing_keys", "missing": missing})
    for i, lvl in enumerate(parsed["levels"], start=1):
        absent = [k for k in ("j", "M", "cells") if k not in lvl]
        if absent:
            return (False, None, {"type": "missing_keys", "level": i, "missing": absent})
        if len(lvl["cells"]) != lvl["M"]:
            return (False, None, {"type": "cell_count", "level": i, "M": lvl["M"], "cells": len(lvl["cells"])})
    return (True, parsed, None)


def _plain(o: Any) -> Any:
    # numpy scalars coming out of pandas tables
    if hasattr(o, "item"):
        return o.item()
    return str(o)


def write_json(obj: Any, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=2, default=_plain), encoding="utf-8")
    return path


def save_partition(cp: CurvePartition, path: str | Path, schedule: Optional[Schedule] = None, **meta: Any) -> Path:
    return write_json(partition_to_dict(cp, schedule, **meta), path)


def load_partition(path: str | Path) -> CurvePartition:
    """Read a partition file; malformed content raises ``ValueError``."""
    ok, parsed, error = extract_and_validate_partition(Path(path).read_text(encoding="utf-8"))
    if not ok:
        raise ValueError(f"{path}: malformed partition ({error})")
    try:
        return dict_to_partition(parsed)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed partition ({exc})") from exc


__all__ = [
    "REQUIRED_KEYS",
    "region_to_json",
    "region_from_json",
    "partition_to_dict",
    "dict_to_partition",
    "schedule_from_meta",
    "extract_and_validate_partition",
    "write_json",
    "save_partition",
    "load_partition",
]
