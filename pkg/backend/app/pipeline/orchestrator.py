"""
orchestrator.py

run(config): drive one RunConfig through the pipeline graph and return the
process exit code (0 all criteria pass, 2 a criterion failed, 1 usage or
configuration error).
"""

import logging

from app.core.models import RunConfig
from app.pipeline.graph import compile as compile_graph

logger = logging.getLogger(__name__)


def run_pipeline(config: RunConfig) -> dict:
    """Invoke the graph and return its final state."""
    graph = compile_graph()
    return graph.invoke({"config": config, "logs": []})


def run(config: RunConfig) -> int:
    final_state = run_pipeline(config)
    code = int(final_state.get("exit_code", 1))
    if final_state.get("error"):
        logger.error("%s: %s", config.command, final_state["error"])
    else:
        logger.info("%s finished with exit code %d", config.command, code)
    return code
