"""
CLI entry points for building, rendering, verifying and sampling partitions.

``python -m convex_peano.app build --shape square --depth 2 --out p.json``
runs the compiled build graph; the other commands work on a saved partition
file.  Exit codes: 0 success, 1 failed verification, 2 usage or input error,
3 cell budget exceeded.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from . import aggregation
from . import config
from . import construction
from . import curve
from . import graph_builder
from . import partition_io
from . import rendering
from . import seq_algebra as sa
from . import state

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

VERIFY_CRITERIA = (
    "population_of_souls",
    "population_of_sets",
    "coverage",
    "refinement",
    "extent",
    "membership",
    "continuity",
    "surjectivity",
)


@dataclass
class RunConfig:
    depth: int = 2
    gamma0: float = 0.2
    n_arc: int = config.N_ARC
    tolerances: Dict[str, float] = field(
        default_factory=lambda: {
            "equality": config.EQUALITY_TOL,
            "convexity": config.CONVEXITY_TOL,
        }
    )
    budget: int = config.CELL_BUDGET
    mode: str = config.MODE
    seed: int = config.SEED
    max_workers: int = config.MAX_WORKERS
    k_chain: Optional[int] = None
    j_cov: Optional[int] = None

    def problems(self) -> List[str]:
        found = []
        if not 0.0 < self.gamma0 < 0.25:
            found.append("gamma0 must lie in (0, 1/4)")
        if self.depth < 1:
            found.append("depth must be at least 1")
        if self.mode not in ("adaptive", "strict"):
            found.append(f"mode must be adaptive or strict, got {self.mode!r}")
        if self.n_arc < 8:
            found.append("n_arc must be at least 8")
        if self.budget < 2:
            found.append("budget must be at least 2")
        for name, value in self.tolerances.items():
            if not value > 0:
                found.append(f"{name} tolerance must be positive")
        return found


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------

def cmd_build(shape: construction.ShapeSpec, cfg: RunConfig, out: str) -> int:
    """Run the build graph and write the partition JSON to ``out``."""
    problems = cfg.problems()
    if problems:
        for p in problems:
            print(f"❌ {p}")
        return EXIT_USAGE
    app = graph_builder.build_app()
    initial_state: state.PipelineState = {"shape": shape, "config": cfg, "out": out}
    # one build and one validation per attempt
    limit = 10 + 2 * cfg.depth * (config.MAX_RETRIES + 1)
    try:
        final_state = app.invoke(initial_state, {"recursion_limit": limit})
    except (OSError, ValueError) as exc:
        print(f"❌ {exc}")
        return EXIT_USAGE
    if final_state.get("budget_error"):
        return EXIT_BUDGET
    if final_state.get("fatal_error"):
        return EXIT_FAILED
    return EXIT_OK


def _load(path: str) -> Optional[curve.CurvePartition]:
    try:
        return partition_io.load_partition(path)
    except (OSError, ValueError) as exc:
        print(f"❌ {exc}")
        return None


def cmd_render(partition: str, levels: Sequence[int], curve_samples: int, out: str) -> int:
    cp = _load(partition)
    if cp is None:
        return EXIT_USAGE
    levels = list(levels) or [cp.depth]
    bad = [j for j in levels if not 1 <= j <= cp.depth]
    if bad:
        print(f"❌ Level {bad[0]} outside the built depth {cp.depth}")
        return EXIT_USAGE
    root = rendering.render_partition(cp, levels, curve_samples)
    path = rendering.write_svg(root, out)
    print(f"✅ Saved → {path}")
    return EXIT_OK


def verify_partition(
    cp: curve.CurvePartition,
    criteria: Sequence[str] = VERIFY_CRITERIA,
    tol: Optional[float] = None,
    seed: int = config.SEED,
) -> pd.DataFrame:
    """Run the selected checks on every level; one table row per check.

    ``tol`` is the region-equality tolerance of the soul checks.
    """
    unknown = [c for c in criteria if c not in VERIFY_CRITERIA]
    if unknown:
        raise ValueError(f"unknown criterion {unknown[0]!r}")
    schedule = partition_io.schedule_from_meta(cp)
    tables = []
    for i, level in enumerate(cp.levels):
        parent = cp.levels[i - 1] if i else None
        reports: List[state.ValidationReport] = []
        if "population_of_souls" in criteria:
            reports.append(sa.validate(level.souls, "population_of_souls", tol, seed=seed))
        if "population_of_sets" in criteria:
            reports.append(sa.validate(level.bases(), "population_of_sets", seed=seed, domain_area=cp.domain.area))
        if "coverage" in criteria:
            reports.append(construction.coverage_report(level, cp.domain))
        if parent is not None and "refinement" in criteria:
            reports.append(sa.validate((parent.bases(), level.bases(), level.m_prime_used), "refinement"))
        if schedule is not None and parent is not None and "extent" in criteria:
            reports.append(construction.extent_report(parent, level, schedule))
        if schedule is not None and "membership" in criteria:
            reports.append(construction.membership_report(level, schedule, cp.domain, seed=seed))
        if "continuity" in criteria:
            reports.append(curve.continuity_report(cp, level.j))
        if "surjectivity" in criteria:
            reports.append(curve.surjectivity_report(cp, level.j))
        tables.append(aggregation.report_table(reports, level.j))
    return pd.concat(tables, ignore_index=True)


def cmd_verify(partition: str, criterion: str = "all", tol: Optional[float] = None, report: Optional[str] = None) -> int:
    cp = _load(partition)
    if cp is None:
        return EXIT_USAGE
    criteria = VERIFY_CRITERIA if criterion == "all" else (criterion,)
    try:
        table = verify_partition(cp, criteria, tol)
    except ValueError as exc:
        print(f"❌ {exc}")
        return EXIT_USAGE
    if table.empty:
        print(f"⚠ No {criterion} checks apply to this partition")
        return EXIT_OK
    print(table[["j", "criterion", "pass", "checked", "witness"]].to_string(index=False))
    if report:
        records: List[Dict[str, Any]] = table.to_dict(orient="records")
        path = partition_io.write_json({"partition": str(partition), "reports": records}, report)
        print(f"✅ Report saved → {path}")
    if table["pass"].all():
        print("✅ All checks passed")
        return EXIT_OK
    print(f"❌ {int((~table['pass']).sum())} check(s) failed")
    return EXIT_FAILED


def cmd_sample(partition: str, n: int, level: Optional[int], out: str) -> int:
    cp = _load(partition)
    if cp is None:
        return EXIT_USAGE
    if level is not None and not 1 <= level <= cp.depth:
        print(f"❌ Level {level} outside the built depth {cp.depth}")
        return EXIT_USAGE
    if n < 2:
        print("❌ need at least two samples")
        return EXIT_USAGE
    frame = aggregation.samples_frame(cp, n, level)
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    print(f"✅ Saved {len(frame)} samples → {path}")
    return EXIT_OK


# -----------------------------------------------------------------------------
# Argument parsing
# -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convex_peano", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a partition stack")
    b.add_argument("--shape", choices=construction.SHAPES, default="square")
    b.add_argument("--aspect", type=float, default=1.0, help="height/width of --shape rectangle")
    b.add_argument("--polygon", default=None, help="vertex file for --shape polygon")
    b.add_argument("--depth", type=int, default=2)
    b.add_argument("--gamma0", type=float, default=0.2)
    b.add_argument("--n-arc", type=int, default=config.N_ARC)
    b.add_argument("--budget", type=int, default=config.CELL_BUDGET)
    b.add_argument("--mode", choices=("adaptive", "strict"), default=config.MODE)
    b.add_argument("--seed", type=int, default=config.SEED)
    b.add_argument("--workers", type=int, default=config.MAX_WORKERS)
    b.add_argument("--k-chain", type=int, default=None)
    b.add_argument("--j-cov", type=int, default=None)
    b.add_argument("--equality-tol", type=float, default=config.EQUALITY_TOL)
    b.add_argument("--convexity-tol", type=float, default=config.CONVEXITY_TOL)
    b.add_argument("--out", default=str(Path(config.OUTPUT_DIR) / "partition.json"))

    r = sub.add_parser("render", help="render levels of a partition as SVG")
    r.add_argument("partition")
    r.add_argument("--level", type=int, action="append", default=[])
    r.add_argument("--curve-samples", type=int, default=0)
    r.add_argument("--out", default=str(Path(config.OUTPUT_DIR) / "partition.svg"))

    v = sub.add_parser("verify", help="run the verification suite on a partition")
    v.add_argument("partition")
    v.add_argument("--criterion", choices=("all",) + VERIFY_CRITERIA, default="all")
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--report", default=None)

    s = sub.add_parser("sample", help="evaluate the curve on a uniform grid (CSV)")
    s.add_argument("partition")
    s.add_argument("--n", type=int, default=1024)
    s.add_argument("--level", type=int, default=None)
    s.add_argument("--out", default=str(Path(config.OUTPUT_DIR) / "samples.csv"))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Script entry point when executed as ``python -m convex_peano.app``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "build":
        try:
            shape = construction.ShapeSpec(args.shape, args.aspect, args.polygon, args.n_arc)
        except ValueError as exc:
            print(f"❌ {exc}")
            return EXIT_USAGE
        cfg = RunConfig(
            depth=args.depth,
            gamma0=args.gamma0,
            n_arc=args.n_arc,
            budget=args.budget,
            mode=args.mode,
            seed=args.seed,
            max_workers=args.workers,
            k_chain=args.k_chain,
            j_cov=args.j_cov,
            tolerances={"equality": args.equality_tol, "convexity": args.convexity_tol},
        )
        return cmd_build(shape, cfg, args.out)
    if args.command == "render":
        return cmd_render(args.partition, args.level, args.curve_samples, args.out)
    if args.command == "verify":
        return cmd_verify(args.partition, args.criterion, args.tol, args.report)
    return cmd_sample(args.partition, args.n, args.level, args.out)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
