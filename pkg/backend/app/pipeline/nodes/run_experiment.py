"""
run_experiment.py

Pipeline node dispatching the validated config to its experiment.
"""

import logging
import time

from app.core.errors import ConfigurationError, ToolkitError
from app.experiments.registry import run_experiment

logger = logging.getLogger(__name__)


def run(state) -> dict:
    config, params = state["config"], state["params"]
    logs = list(state.get("logs") or [])
    start = time.perf_counter()
    try:
        report = run_experiment(config, params)
    except ConfigurationError as exc:
        logger.error("%s stopped at gate %s: %s", config.command, exc.gate, exc)
        logs.append(f"[run] rejected by gate {exc.gate}: {exc}")
        return {"error": str(exc), "gate": exc.gate, "exit_code": 1, "logs": logs}
    except ToolkitError as exc:
        logger.error("%s failed: %s", config.command, exc)
        logs.append(f"[run] {type(exc).__name__}: {exc}")
        return {"error": str(exc), "exit_code": 1, "logs": logs}
    report.runtime_seconds = time.perf_counter() - start
    logs.append(f"[run] {len(report.rows)} rows, {len(report.criteria)} criteria in {report.runtime_seconds:.2f}s")
    return {"report": report, "logs": logs}
