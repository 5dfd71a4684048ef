"""
Configuration for the convex Peano partition engine.

This module centralises every tolerance, budget and run default used by the
construction.  Values are read from environment variables prefixed with
``CONVEX_PEANO_`` so that a deployment (or a CI job) can tighten or relax
them without touching code.  The command line builds its ``RunConfig`` from
these defaults and lets flags override them; no other module reads the
environment.

All lengths are expressed in the normalized frame, where the domain has
diameter at most one, so absolute tolerances are meaningful.
"""

import os


# -----------------------------------------------------------------------------
# Geometric tolerances
#
# The kernel works on polygons with circular arcs discretized into N_ARC
# segments per full disc.  Every tolerance that depends on the arc
# discretization is derived from the resulting sagitta (see
# ``geometry.arc_tolerance``); the values below are the fixed ones.
# -----------------------------------------------------------------------------

# Orientation / incidence slack.
EPS_GEOM = float(os.getenv("CONVEX_PEANO_EPS_GEOM", "1e-9"))

# Two sets are "separated" when their distance exceeds this threshold.
EPS_SEP = float(os.getenv("CONVEX_PEANO_EPS_SEP", "1e-6"))

# Number of segments used for a full disc.
N_ARC = int(os.getenv("CONVEX_PEANO_N_ARC", "64"))

# Radius of the neighbourhood inspected by the local rho-convexity test.
EPS_LOC = float(os.getenv("CONVEX_PEANO_EPS_LOC", "0.05"))

# Polygon parts below this area are treated as numerical noise.
SLIVER_AREA = float(os.getenv("CONVEX_PEANO_SLIVER_AREA", "1e-10"))

# Hausdorff distance under which two regions count as the same set.
EQUALITY_TOL = float(os.getenv("CONVEX_PEANO_EQUALITY_TOL", "1e-7"))

# Hull deficiency allowed for a union to count as convex, as a fraction of
# the domain area.
CONVEXITY_TOL = float(os.getenv("CONVEX_PEANO_CONVEXITY_TOL", "1e-3"))

# A union whose hull adds less than this area is replaced by its hull.
HULL_SNAP_AREA = float(os.getenv("CONVEX_PEANO_HULL_SNAP_AREA", "1e-8"))


# -----------------------------------------------------------------------------
# Run control
# -----------------------------------------------------------------------------

# Maximal number of cells a level may hold before the run aborts.
CELL_BUDGET = int(float(os.getenv("CONVEX_PEANO_CELL_BUDGET", "1000000")))

# "adaptive" (short nets and stations) or "strict" (worst-case counts).
MODE = os.getenv("CONVEX_PEANO_MODE", "adaptive")

# How many times a level is rebuilt after a failed validation.
MAX_RETRIES = int(os.getenv("CONVEX_PEANO_MAX_RETRIES", "2"))

# Thread pool size for per-parent offspring.
MAX_WORKERS = int(os.getenv("CONVEX_PEANO_MAX_WORKERS", "4"))

# Seed for every sampled verification.
SEED = int(os.getenv("CONVEX_PEANO_SEED", "7"))

# Directory used by the CLI when no explicit output path is given.
OUTPUT_DIR = os.getenv("CONVEX_PEANO_OUTPUT_DIR", "output")


# -----------------------------------------------------------------------------
# Sampling sizes for the verifiers
#
# The universally quantified conditions of the construction cannot be
# checked exhaustively; the verifiers draw seeded samples of these sizes.
# -----------------------------------------------------------------------------

# Parent pairs drawn for the dust / anti-dust / filling checks.
DUST_PAIRS = int(os.getenv("CONVEX_PEANO_DUST_PAIRS", "20"))

# Exterior points drawn per rho-family membership check.
F_RHO_SAMPLES = int(os.getenv("CONVEX_PEANO_F_RHO_SAMPLES", "24"))

# Up to this many cells every contiguous range is checked for convexity.
FULL_RANGE_LIMIT = int(os.getenv("CONVEX_PEANO_FULL_RANGE_LIMIT", "60"))

# Beyond FULL_RANGE_LIMIT, this many random ranges are checked.
RANDOM_RANGES = int(os.getenv("CONVEX_PEANO_RANDOM_RANGES", "200"))

# Smallest growth thickness tried by the adaptive station builder.
STATION_MIN_DELTA = float(os.getenv("CONVEX_PEANO_STATION_MIN_DELTA", "1e-5"))


__all__ = [
    "EPS_GEOM",
    "EPS_SEP",
    "N_ARC",
    "EPS_LOC",
    "SLIVER_AREA",
    "EQUALITY_TOL",
    "CONVEXITY_TOL",
    "HULL_SNAP_AREA",
    "CELL_BUDGET",
    "MODE",
    "MAX_RETRIES",
    "MAX_WORKERS",
    "SEED",
    "OUTPUT_DIR",
    "DUST_PAIRS",
    "F_RHO_SAMPLES",
    "FULL_RANGE_LIMIT",
    "RANDOM_RANGES",
    "STATION_MIN_DELTA",
]
