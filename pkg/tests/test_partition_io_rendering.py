import json
import xml.etree.ElementTree as ET

import pytest

from convex_peano import partition_io as pio
from convex_peano import rendering
from convex_peano import seq_algebra as sa
from convex_peano.app import verify_partition

CHECKS = ("refinement", "coverage", "continuity", "surjectivity")


def test_region_json_shapes(strip_partition):
    assert pio.region_to_json(strip_partition.levels[0].souls[0].disturbance) == []
    ring = pio.region_to_json(strip_partition.domain)
    assert len(ring) == 4 and all(len(p) == 2 for p in ring)
    interned = {}
    a = pio.region_from_json(ring, interned)
    assert pio.region_from_json(ring, interned) is a
    assert pio.region_from_json([]).is_empty


def test_saved_partition_verifies_like_the_original(strip_partition, tmp_path):
    path = pio.save_partition(strip_partition, tmp_path / "strips.json", label="strips")
    loaded = pio.load_partition(path)
    assert loaded.depth == 2
    assert loaded.meta["label"] == "strips"
    assert [lvl.M for lvl in loaded.levels] == [2, 16]
    bases = loaded.level(2).bases()
    assert bases[7] is bases[8]

    assert verify_partition(strip_partition, CHECKS)["pass"].all()
    before = verify_partition(strip_partition)
    after = verify_partition(loaded)
    assert list(after["criterion"]) == list(before["criterion"])
    assert list(after["pass"]) == list(before["pass"])


def test_schedule_is_rebuilt_from_meta(strip_partition):
    loaded = pio.dict_to_partition(pio.partition_to_dict(strip_partition))
    schedule = pio.schedule_from_meta(loaded)
    assert schedule.gammas == (0.2, 0.125)
    assert schedule.m_primes == (8,)


def test_corrupted_parent_fails_refinement(strip_partition):
    data = pio.partition_to_dict(strip_partition)
    data["levels"][0]["cells"][0]["base"] = [[-0.4, -0.2], [0.3, -0.2], [0.3, 0.2], [-0.4, 0.2]]
    cp = pio.dict_to_partition(data)
    parents, children = cp.level(1).bases(), cp.level(2).bases()
    report = sa.validate((parents, children, 8), "refinement")
    assert not report.passed
    assert report.witness["K"] == 1


def test_extract_and_validate_partition():
    ok, parsed, error = pio.extract_and_validate_partition("{not json")
    assert not ok and parsed is None and error.startswith("JSONDecodeError")
    ok, _, error = pio.extract_and_validate_partition("[]")
    assert not ok and "JSON object" in error
    ok, _, error = pio.extract_and_validate_partition('{"meta": {}}')
    assert error == {"type": "missing_keys", "missing": ["levels"]}
    body = {"meta": {}, "levels": [{"j": 1, "M": 2, "cells": []}]}
    ok, _, error = pio.extract_and_validate_partition(json.dumps(body))
    assert error["type"] == "cell_count"


def test_load_rejects_malformed_files(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"meta": {}}', encoding="utf-8")
    with pytest.raises(ValueError, match="malformed"):
        pio.load_partition(path)


def test_render_draws_one_path_per_cell(strip_partition):
    root = rendering.render_partition(strip_partition, [2], curve_samples=50)
    group = next(g for g in root.iter("g") if g.get("id") == "level-2")
    assert len(group.findall("path")) == 16
    curves = [p for p in root.iter("path") if p.get("class") == "curve"]
    assert len(curves) == 1
    assert curves[0].get("d").startswith("M")
    with pytest.raises(ValueError):
        rendering.render_partition(strip_partition, [3])


def test_written_svg_parses(strip_partition, tmp_path):
    root = rendering.render_partition(strip_partition, [1, 2])
    path = rendering.write_svg(root, tmp_path / "out" / "strips.svg")
    tree = ET.parse(path)
    paths = tree.getroot().findall(f".//{{{rendering.SVG_NS}}}path")
    assert len(paths) == 1 + 2 + 16
