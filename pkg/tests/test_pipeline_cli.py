import json

import pandas as pd
import pytest

from convex_peano import aggregation
from convex_peano import app
from convex_peano import config
from convex_peano import construction
from convex_peano import partition_io
from convex_peano import pipeline_nodes as nodes

THIN = ["--shape", "rectangle", "--aspect", "0.05"]


@pytest.fixture
def saved_strips(strip_partition, tmp_path):
    return str(partition_io.save_partition(strip_partition, tmp_path / "strips.json"))


def _failed_state(thin_domain):
    return {
        "shape": construction.ShapeSpec("rectangle", aspect=0.05),
        "config": app.RunConfig(depth=2),
        "out": "unused.json",
        "domain": thin_domain,
        "schedule": construction.make_schedule(2, 0.2),
        "levels": [construction.init_level(thin_domain)],
        "candidate": None,
        "construction_error": {"message": "net leaves its sandwich", "condition": "net sandwich"},
        "attempts": 0,
        "station_delta_scale": 1.0,
    }


# -----------------------------------------------------------------------------
# Nodes and routers
# -----------------------------------------------------------------------------

def test_failed_level_is_retried_then_fatal(thin_domain, monkeypatch):
    monkeypatch.setattr(config, "MAX_RETRIES", 2)
    first = nodes.node_validate_level(_failed_state(thin_domain))
    assert first["attempts"] == 1
    assert first["station_delta_scale"] == 0.5
    assert first["level_error"]["type"] == "construction"
    assert not first.get("fatal_error")
    assert nodes.route_after_validate(first) == "retry"

    second = nodes.node_validate_level(first)
    assert second["fatal_error"] is True
    assert second["fatal_error_obj"]["stage"] == "validate_level"
    assert second["fatal_error_obj"]["context"]["level"] == 2
    assert nodes.route_after_validate(second) == "fatal"


def test_budget_error_skips_validation(thin_domain):
    s = {**_failed_state(thin_domain), "budget_error": {"message": "too many cells"}}
    assert nodes.node_validate_level(s) is not s
    assert "level_error" not in nodes.node_validate_level(s)
    assert nodes.route_after_validate(s) == "budget"


def test_routers_finish_at_depth(thin_domain):
    s = _failed_state(thin_domain)
    s["config"] = app.RunConfig(depth=1)
    assert nodes.route_after_init(s) == "done"
    s["is_valid_level"] = True
    assert nodes.route_after_validate(s) == "done"
    s["config"] = app.RunConfig(depth=3)
    assert nodes.route_after_validate(s) == "more"
    assert nodes.route_after_init(s) == "build"


def test_run_config_problems():
    assert app.RunConfig().problems() == []
    found = app.RunConfig(gamma0=0.5, depth=0, n_arc=4).problems()
    assert "gamma0 must lie in (0, 1/4)" in found
    assert len(found) == 3
    assert app.RunConfig(tolerances={"equality": 0.0}).problems() == ["equality tolerance must be positive"]


# -----------------------------------------------------------------------------
# Command line
# -----------------------------------------------------------------------------

def test_build_of_a_single_level(tmp_path):
    out = tmp_path / "one.json"
    assert app.main(["build", *THIN, "--depth", "1", "--out", str(out)]) == app.EXIT_OK
    cp = partition_io.load_partition(out)
    assert cp.depth == 1 and cp.level(1).M == 2
    assert cp.meta["label"] == "rectangle-0.05"


def test_usage_errors(tmp_path):
    assert app.main(["build", "--gamma0", "0.5", "--out", str(tmp_path / "p.json")]) == app.EXIT_USAGE
    assert app.main(["verify"]) == app.EXIT_USAGE
    assert app.main(["build", "--shape", "polygon"]) == app.EXIT_USAGE
    assert app.main(["verify", str(tmp_path / "missing.json")]) == app.EXIT_USAGE
    assert app.main(["--help"]) == app.EXIT_OK


def test_budget_build_keeps_the_partial_stack(tmp_path):
    out = tmp_path / "thin.json"
    code = app.main(["build", *THIN, "--depth", "2", "--budget", "10", "--out", str(out)])
    assert code == app.EXIT_BUDGET
    report = json.loads((tmp_path / "thin.budget.json").read_text(encoding="utf-8"))
    assert report["stage"] == "build_level"
    assert len(report["context"]["levels"]) == 1
    partial = partition_io.load_partition(tmp_path / "thin.partial.json")
    assert partial.depth == 1
    assert not out.exists()


def test_sample_writes_csv(saved_strips, tmp_path):
    out = tmp_path / "samples.csv"
    assert app.main(["sample", saved_strips, "--n", "5", "--out", str(out)]) == app.EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["u", "x", "y", "error_radius"]
    assert len(frame) == 5
    assert frame["x"].iloc[0] == pytest.approx(-0.3)
    assert app.main(["sample", saved_strips, "--n", "1", "--out", str(out)]) == app.EXIT_USAGE
    assert app.main(["sample", saved_strips, "--level", "3", "--out", str(out)]) == app.EXIT_USAGE


def test_render_command(saved_strips, tmp_path):
    out = tmp_path / "strips.svg"
    assert app.main(["render", saved_strips, "--level", "3", "--out", str(out)]) == app.EXIT_USAGE
    assert not out.exists()
    code = app.main(["render", saved_strips, "--level", "1", "--level", "2", "--curve-samples", "64", "--out", str(out)])
    assert code == app.EXIT_OK
    assert out.read_text(encoding="utf-8").count("<path") > 16


def test_verify_writes_a_report(saved_strips, tmp_path):
    report = tmp_path / "report.json"
    code = app.main(["verify", saved_strips, "--criterion", "coverage", "--report", str(report)])
    assert code == app.EXIT_OK
    data = json.loads(report.read_text(encoding="utf-8"))
    assert [r["j"] for r in data["reports"]] == [1, 2]
    assert all(r["pass"] for r in data["reports"])


def test_verify_rejects_unknown_criteria(strip_partition):
    with pytest.raises(ValueError):
        app.verify_partition(strip_partition, ["tidy"])


@pytest.mark.slow
def test_build_then_verify(tmp_path):
    out = tmp_path / "thin.json"
    assert app.main(["build", *THIN, "--depth", "2", "--out", str(out)]) == app.EXIT_OK
    assert app.main(["verify", str(out)]) == app.EXIT_OK


def test_validation_uses_the_configured_tolerances_and_seed(thin_domain, monkeypatch):
    seen = {}

    def fake_check_level(parent, child, schedule, domain, tolerances=None, seed=None):
        seen.update(tolerances=tolerances, seed=seed)
        return []

    monkeypatch.setattr(construction, "check_level", fake_check_level)
    s = _failed_state(thin_domain)
    s["construction_error"] = None
    s["candidate"] = construction.init_level(thin_domain)
    s["config"] = app.RunConfig(depth=2, tolerances={"equality": 1e-3, "convexity": 0.5}, seed=11)
    out = nodes.node_validate_level(s)
    assert out["is_valid_level"] is True
    assert seen == {"tolerances": {"equality": 1e-3, "convexity": 0.5}, "seed": 11}


def test_tolerance_flags_are_checked(tmp_path):
    out = str(tmp_path / "p.json")
    assert app.main(["build", *THIN, "--depth", "1", "--equality-tol", "0", "--out", out]) == app.EXIT_USAGE
    code = app.main(["build", *THIN, "--depth", "1", "--convexity-tol", "1e-2", "--seed", "3", "--out", out])
    assert code == app.EXIT_OK


@pytest.mark.slow
def test_strict_build_certifies_or_reports_the_growth_budget(tmp_path):
    out = tmp_path / "strict.json"
    args = ["build", *THIN, "--depth", "2", "--mode", "strict", "--k-chain", "2", "--j-cov", "3"]
    code = app.main([*args, "--out", str(out)])
    assert code in (app.EXIT_OK, app.EXIT_BUDGET)
    if code == app.EXIT_BUDGET:
        report = json.loads((tmp_path / "strict.budget.json").read_text(encoding="utf-8"))
        assert report["context"]["condition"] == "growth chain"
        assert partition_io.load_partition(tmp_path / "strict.partial.json").depth == 1
    else:
        assert partition_io.load_partition(out).depth == 2


# -----------------------------------------------------------------------------
# Tables
# -----------------------------------------------------------------------------

def test_level_summary(strip_partition):
    table = aggregation.level_summary(strip_partition.levels, strip_partition.domain)
    assert list(table["M"]) == [2, 16]
    assert table["max_dx"].iloc[1] == pytest.approx(0.2)
    assert table["coverage_gap"].max() == pytest.approx(0.0, abs=1e-12)
    assert table["gamma"].isna().all()


def test_report_table_puts_the_level_first(strip_partition):
    reports = [construction.coverage_report(lvl, strip_partition.domain) for lvl in strip_partition.levels]
    table = aggregation.report_table(reports, level=2)
    assert table.columns[0] == "j"
    assert table["pass"].all()
