"""
Top-level package for the convex Peano partition engine.

Importing this package has no side effects.  Individual modules such as
``geometry``, ``seq_algebra``, ``construction`` and ``graph_builder`` should
be imported explicitly by consumers.  The command line entry point lives in
``app.py`` (``python -m convex_peano.app``).
"""

__all__ = [
    "config",
    "state",
    "geometry",
    "seq_algebra",
    "rho_convex",
    "nets_stations",
    "offspring",
    "construction",
    "curve",
    "partition_io",
    "aggregation",
    "rendering",
    "pipeline_nodes",
    "graph_builder",
    "app",
]
