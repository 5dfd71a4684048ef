"""Tabular summaries of partition levels, verification reports and curve samples."""

from __future__ import annotations

import json
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from . import geometry as geo
from .construction import PartitionLevel, Schedule
from .curve import CurvePartition, sample_table
from .state import ValidationReport


def level_row(level: PartitionLevel, domain: geo.Region, schedule: Optional[Schedule] = None) -> Dict[str, Any]:
    """Counts and extents of one level.

    Repeated cells are measured once; the coverage gap is an area in the
    normalized frame.
    """
    distinct = list({id(b): b for b in level.bases()}.values())
    dx = max(geo.extent(b, "x") for b in distinct)
    dy = max(geo.extent(b, "y") for b in distinct)
    diam = max(geo.extent(b, "diameter") for b in distinct)
    gap = geo.clean(domain.difference(geo.union_all(distinct))).area
    row: Dict[str, Any] = {
        "j": level.j,
        "axis": level.axis,
        "M": level.M,
        "m_prime": level.m_prime_used,
        "gamma": None,
        "beta": None,
        "max_dx": round(dx, 6),
        "max_dy": round(dy, 6),
        "max_diameter": round(diam, 6),
        "coverage_gap": gap,
    }
    if schedule is not None and level.j <= len(schedule.gammas):
        row["gamma"] = schedule.gamma(level.j)
        row["beta"] = schedule.beta(level.j)
    return row


def level_summary(
    levels: Sequence[PartitionLevel],
    domain: geo.Region,
    schedule: Optional[Schedule] = None,
) -> pd.DataFrame:
    return pd.DataFrame([level_row(lvl, domain, schedule) for lvl in levels])


def report_table(reports: Iterable[ValidationReport], level: Optional[int] = None) -> pd.DataFrame:
    rows: List[Dict[str, Any]] = []
    for r in reports:
        row = r.to_dict()
        row["witness"] = json.dumps(row["witness"], default=str) if row["witness"] is not None else ""
        row["tolerances"] = json.dumps(row["tolerances"])
        if level is not None:
            row["j"] = level
        rows.append(row)
    df = pd.DataFrame(rows)
    if level is not None and not df.empty:
        df = df[["j"] + [c for c in df.columns if c != "j"]]
    return df


def samples_frame(cp: CurvePartition, n: int, j: Optional[int] = None) -> pd.DataFrame:
    """Curve evaluated at ``n`` uniform parameters: u, x, y, error_radius."""
    if n < 2:
        raise ValueError("need at least two samples")
    u = np.linspace(0.0, 1.0, n)
    pts = sample_table(cp, u, j)
    return pd.DataFrame(
        {
            "u": u,
            "x": [p.point[0] for p in pts],
            "y": [p.point[1] for p in pts],
            "error_radius": [p.error_radius for p in pts],
        }
    )


__all__ = [
    "level_row",
    "level_summary",
    "report_table",
    "samples_frame",
]
