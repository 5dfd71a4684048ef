"""
SVG output of partition levels and curve samples.

The drawing lives in the normalized frame: the view box is the bounding box
of the domain and a top-level group flips the y axis.  Each requested level
is one group of cell paths, coloured along the curve order; the curve is a
single path element.
"""

from __future__ import annotations

import colorsys
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import geometry as geo
from .construction import PartitionLevel
from .curve import CurvePartition, sample_curve

SVG_NS = "http://www.w3.org/2000/svg"


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def svg_root(bounds: Sequence[float], width: int = 800, margin: float = 0.02) -> ET.Element:
    minx, miny, maxx, maxy = bounds
    w, h = maxx - minx + 2 * margin, maxy - miny + 2 * margin
    height = max(int(round(width * h / w)), 1)
    box = f"{_fmt(minx - margin)} {_fmt(-(maxy + margin))} {_fmt(w)} {_fmt(h)}"
    return ET.Element(
        "svg",
        xmlns=SVG_NS,
        version="1.1",
        width=f"{width}px",
        height=f"{height}px",
        viewBox=box,
    )


def ring_path(points: np.ndarray, close: bool = True) -> str:
    if len(points) == 0:
        return ""
    d = "M" + " L".join(f"{_fmt(x)} {_fmt(y)}" for x, y in points)
    return d + " Z" if close else d


def region_path(t: geo.Region) -> str:
    rings = [np.asarray(p.exterior.coords)[:-1] for p in geo.polygons(t)]
    return " ".join(ring_path(r) for r in rings)


def _colour(pos: float) -> str:
    r, g, b = colorsys.hsv_to_rgb(0.8 * pos, 0.55, 0.9)
    return "#{:02x}{:02x}{:02x}".format(int(r * 255), int(g * 255), int(b * 255))


def add_level(parent: ET.Element, level: PartitionLevel, opacity: float = 0.5) -> ET.Element:
    """One path per cell, in curve order."""
    group = ET.SubElement(parent, "g", id=f"level-{level.j}", attrib={"fill-opacity": _fmt(opacity)})
    group.set("stroke", "#333333")
    group.set("stroke-width", _fmt(0.002 / max(level.j, 1)))
    for K, base in enumerate(level.bases(), start=1):
        path = ET.SubElement(group, "path", d=region_path(base), fill=_colour((K - 1) / max(level.M - 1, 1)))
        path.set("data-K", str(K))
    return group


def add_curve(parent: ET.Element, points: np.ndarray) -> Optional[ET.Element]:
    if len(points) == 0:
        return None
    return ET.SubElement(
        parent,
        "path",
        d=ring_path(points, close=False),
        fill="none",
        stroke="#000000",
        attrib={"stroke-width": "0.002", "class": "curve"},
    )


def render_partition(
    cp: CurvePartition,
    levels: Iterable[int],
    curve_samples: int = 0,
    curve_level: Optional[int] = None,
    width: int = 800,
) -> ET.Element:
    """SVG tree of the requested levels with an optional curve polyline."""
    levels = list(levels)
    for j in levels:
        cp.level(j)
    root = svg_root(cp.domain.bounds, width)
    frame = ET.SubElement(root, "g", transform="scale(1,-1)")
    outline = ET.SubElement(frame, "path", d=region_path(cp.domain), fill="none", stroke="#000000")
    outline.set("stroke-width", "0.004")
    for i, j in enumerate(levels):
        opacity = 0.2 + 0.6 * (i + 1) / len(levels)
        add_level(frame, cp.level(j), opacity)
    if curve_samples:
        if curve_level is None and levels:
            curve_level = levels[-1]
        pts = sample_curve(cp, curve_samples, curve_level)
        if not cp.transform.is_identity():
            pts = cp.transform.inverse().apply_points(pts)
        add_curve(frame, pts)
    return root


def write_svg(root: ET.Element, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
    return path


__all__ = [
    "SVG_NS",
    "svg_root",
    "ring_path",
    "region_path",
    "add_level",
    "add_curve",
    "render_partition",
    "write_svg",
]
