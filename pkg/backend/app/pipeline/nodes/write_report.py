"""
write_report.py

Pipeline node writing the CSV table and JSON summary of a finished run.
"""

import logging

from app.core.result_writer import save_report

logger = logging.getLogger(__name__)


def run(state) -> dict:
    config, report = state["config"], state["report"]
    logs = list(state.get("logs") or [])
    logs.append(f"[write] output directory {config.out}")
    report.config = config.model_dump(mode="json")
    report.logs = logs
    artifacts = save_report(report, config.out)
    return {"artifacts": artifacts, "logs": logs}
