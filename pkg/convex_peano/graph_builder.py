"""
Graph builder for the partition build pipeline.

The graph runs ``init_level`` once and then loops ``build_level`` and
``validate_level`` until the requested depth is reached, the cell budget is
exhausted or a level keeps failing its checks.
"""

from typing import Any

from langgraph.graph import StateGraph, END  # type: ignore

from . import state
from . import pipeline_nodes as nodes


def add_build_pipeline(graph: StateGraph) -> None:
    """Register nodes and edges of the level loop."""
    graph.add_node("init_level", nodes.node_init_level)
    graph.add_node("build_level", nodes.node_build_level)
    graph.add_node("validate_level", nodes.node_validate_level)
    graph.add_node("persist", nodes.node_persist)
    graph.add_node("save_fatal_error", nodes.node_save_fatal_error)
    graph.add_node("save_budget_report", nodes.node_save_budget_report)
    graph.set_entry_point("init_level")
    graph.add_conditional_edges(
        "init_level",
        nodes.route_after_init,
        {"done": "persist", "build": "build_level"},
    )
    graph.add_edge("build_level", "validate_level")
    graph.add_conditional_edges(
        "validate_level",
        nodes.route_after_validate,
        {
            "more": "build_level",
            "done": "persist",
            "retry": "build_level",
            "fatal": "save_fatal_error",
            "budget": "save_budget_report",
        },
    )
    graph.add_edge("persist", END)
    graph.add_edge("save_fatal_error", END)
    graph.add_edge("save_budget_report", END)


def build_app() -> Any:
    """Construct and compile the build graph."""
    graph = StateGraph(state.PipelineState)
    add_build_pipeline(graph)
    return graph.compile()


__all__ = ["add_build_pipeline", "build_app"]
