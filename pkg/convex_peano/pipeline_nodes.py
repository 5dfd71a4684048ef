"""
Pipeline node implementations for the partition build graph.

Each node receives the ``state`` dictionary, copies it and returns the
updated copy.  ``graph_builder`` wires the nodes together with routers that
read the flags set here: ``is_valid_level`` after validation, ``fatal_error``
once the retries are exhausted and ``budget_error`` when a level would not
fit into the cell budget.
"""

from __future__ import annotations

from pathlib import Path

from . import aggregation
from . import config
from . import construction
from . import partition_io
from . import state
from .curve import CurvePartition


# -----------------------------------------------------------------------------
# Routers
# -----------------------------------------------------------------------------

def route_after_init(pipeline_state: state.PipelineState) -> str:
    """Stop right away when a single level was requested."""
    if len(pipeline_state["levels"]) >= pipeline_state["config"].depth:
        return "done"
    return "build"


def route_after_validate(pipeline_state: state.PipelineState) -> str:
    if pipeline_state.get("budget_error"):
        return "budget"
    if pipeline_state.get("fatal_error"):
        return "fatal"
    if not pipeline_state.get("is_valid_level"):
        return "retry"
    if len(pipeline_state["levels"]) >= pipeline_state["config"].depth:
        return "done"
    return "more"


# -----------------------------------------------------------------------------
# Levels
# -----------------------------------------------------------------------------

def node_init_level(pipeline_state: state.PipelineState) -> state.PipelineState:
    """Normalize the domain, fix the schedule and create level 1.

    Expects ``shape`` (a ``construction.ShapeSpec``) and ``config`` (the run
    configuration) in the state.
    """
    new_state: state.PipelineState = dict(pipeline_state)
    shape = new_state["shape"]
    cfg = new_state["config"]
    print(f"\n🔹 Building partition: {shape.label} (depth={cfg.depth}, gamma0={cfg.gamma0}, mode={cfg.mode})")
    domain, transform = shape.domain()
    schedule = construction.make_schedule(cfg.depth, cfg.gamma0, mode=cfg.mode, k_chain=cfg.k_chain, j_cov=cfg.j_cov)
    new_state["domain"] = domain
    new_state["transform"] = transform
    new_state["schedule"] = schedule
    new_state["levels"] = [construction.init_level(domain)]
    new_state["reports"] = {}
    new_state["attempts"] = 0
    new_state["station_delta_scale"] = 1.0
    return new_state


def node_build_level(pipeline_state: state.PipelineState) -> state.PipelineState:
    """Refine the last accepted level into a candidate."""
    new_state: state.PipelineState = dict(pipeline_state)
    cfg = new_state["config"]
    parent = new_state["levels"][-1]
    scale = new_state.get("station_delta_scale", 1.0)
    print(f"🔹 Refining level {parent.j} along {parent.axis} (station scale {scale:g})")
    new_state["candidate"] = None
    new_state["construction_error"] = None
    try:
        new_state["candidate"] = construction.next_level(
            parent,
            new_state["schedule"],
            new_state["domain"],
            mode=cfg.mode,
            n_arc=cfg.n_arc,
            budget=cfg.budget,
            max_workers=cfg.max_workers,
            station_delta_scale=scale,
        )
    except state.BudgetExceeded as exc:
        print(f"🛑 Budget exceeded: {exc}")
        new_state["budget_error"] = {"message": str(exc), **exc.context}
    except state.ConstructionError as exc:
        # handled by validate_level like a failed check
        print(f"⚠ Construction failed: {exc}")
        new_state["construction_error"] = {"message": str(exc), **exc.context}
    return new_state


def node_validate_level(pipeline_state: state.PipelineState) -> state.PipelineState:
    """Check the candidate level and accept it, retry it or give up.

    A retry halves ``station_delta_scale``.  After ``config.MAX_RETRIES``
    failed attempts the pipeline enters the fatal error state.
    """
    new_state: state.PipelineState = dict(pipeline_state)
    if new_state.get("budget_error"):
        return new_state
    attempts = new_state.get("attempts", 0) + 1
    new_state["attempts"] = attempts
    candidate = new_state.get("candidate")
    parent = new_state["levels"][-1]
    if candidate is not None:
        cfg = new_state["config"]
        reports = construction.check_level(
            parent, candidate, new_state["schedule"], new_state["domain"], cfg.tolerances, cfg.seed
        )
        failed = [r for r in reports if not r]
        new_state["reports"] = {**new_state.get("reports", {}), candidate.j: reports}
        if not failed:
            print(f"✅ Level {candidate.j}: M = {candidate.M}, m' = {candidate.m_prime_used}")
            new_state["levels"] = new_state["levels"] + [candidate]
            new_state["candidate"] = None
            new_state["is_valid_level"] = True
            new_state["attempts"] = 0
            new_state["station_delta_scale"] = 1.0
            return new_state
        error = {"type": "failed_checks", "failed": [r.to_dict() for r in failed]}
    else:
        error = {"type": "construction", **(new_state.get("construction_error") or {})}
    print(f"❌ Level {parent.j + 1} rejected (attempt {attempts}): {error}")
    new_state["is_valid_level"] = False
    new_state["level_error"] = error
    new_state["station_delta_scale"] = new_state.get("station_delta_scale", 1.0) / 2.0
    if attempts >= config.MAX_RETRIES:
        fatal_reason = f"Level {parent.j + 1} failed after {attempts} attempts"
        new_state["fatal_error"] = True
        new_state["fatal_reason"] = fatal_reason
        new_state["fatal_error_obj"] = state.build_fatal_error_object(
            label=new_state["shape"].label,
            stage="validate_level",
            fatal_reason=fatal_reason,
            attempts=attempts,
            context={"level": parent.j + 1, "error": error},
        )
    return new_state


# -----------------------------------------------------------------------------
# Persistence
# -----------------------------------------------------------------------------

def _partition(pipeline_state: state.PipelineState) -> CurvePartition:
    cfg = pipeline_state["config"]
    return CurvePartition(
        list(pipeline_state["levels"]),
        pipeline_state["domain"],
        pipeline_state["transform"],
        {"label": pipeline_state["shape"].label, "mode": cfg.mode, "seed": cfg.seed},
    )


def _side_file(pipeline_state: state.PipelineState, suffix: str) -> Path:
    out = Path(pipeline_state["out"])
    return out.with_name(out.stem + suffix)


def node_persist(pipeline_state: state.PipelineState) -> state.PipelineState:
    """Write the partition JSON and print the level summary."""
    new_state: state.PipelineState = dict(pipeline_state)
    cp = _partition(new_state)
    path = partition_io.save_partition(cp, new_state["out"], new_state["schedule"])
    new_state["partition"] = cp
    summary = aggregation.level_summary(cp.levels, cp.domain, new_state["schedule"])
    new_state["summary"] = summary
    print(summary.to_string(index=False))
    print(f"✅ Saved → {path}")
    return new_state


def node_save_fatal_error(pipeline_state: state.PipelineState) -> state.PipelineState:
    err_obj = pipeline_state.get("fatal_error_obj")
    if not err_obj:
        return pipeline_state
    path = partition_io.write_json(err_obj, _side_file(pipeline_state, ".error.json"))
    print(f"🛑 Fatal error saved → {path}")
    return pipeline_state


def node_save_budget_report(pipeline_state: state.PipelineState) -> state.PipelineState:
    """Persist the levels built so far next to a budget report."""
    new_state: state.PipelineState = dict(pipeline_state)
    budget_error = new_state["budget_error"]
    summary = aggregation.level_summary(new_state["levels"], new_state["domain"], new_state["schedule"])
    new_state["summary"] = summary
    report = state.build_fatal_error_object(
        label=new_state["shape"].label,
        stage="build_level",
        fatal_reason=budget_error.get("message", "cell budget exceeded"),
        attempts=new_state.get("attempts", 0),
        context={**budget_error, "levels": summary.to_dict(orient="records")},
    )
    path = partition_io.write_json(report, _side_file(new_state, ".budget.json"))
    partition_io.save_partition(_partition(new_state), _side_file(new_state, ".partial.json"), new_state["schedule"])
    print(summary.to_string(index=False))
    print(f"🛑 Budget report saved → {path}")
    return new_state


__all__ = [
    "route_after_init",
    "route_after_validate",
    "node_init_level",
    "node_build_level",
    "node_validate_level",
    "node_persist",
    "node_save_fatal_error",
    "node_save_budget_report",
]
