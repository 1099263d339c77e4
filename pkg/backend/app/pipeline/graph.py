"""
graph.py

LangGraph StateGraph for one experiment run.

Flow:
    START → validate
        → if a gate fired → END (exit 1)
        → run
            → if the experiment raised → END (exit 1)
            → evaluate → write → END (exit 0 or 2)
"""

import logging

from langgraph.graph import END, StateGraph

from app.pipeline.nodes import evaluate, run_experiment, validate, write_report
from app.pipeline.state import RunState

logger = logging.getLogger(__name__)


def _continue_unless_error(next_node: str):
    def route(state: RunState) -> str:
        return END if state.get("error") else next_node

    return route


def compile() -> object:
    """Build and compile the run pipeline.

    Returns:
        A compiled LangGraph runnable.
    """
    graph = StateGraph(RunState)

    graph.add_node("validate", validate)
    graph.add_node("run", run_experiment)
    graph.add_node("evaluate", evaluate)
    graph.add_node("write", write_report)

    graph.set_entry_point("validate")
    graph.add_conditional_edges("validate", _continue_unless_error("run"), ["run", END])
    graph.add_conditional_edges("run", _continue_unless_error("evaluate"), ["evaluate", END])
    graph.add_edge("evaluate", "write")
    graph.add_edge("write", END)

    logger.debug("Run pipeline compiled.")
    return graph.compile()
