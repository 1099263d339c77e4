"""
evaluate.py

Pipeline node turning the report's criteria into the exit code.
"""

import logging

logger = logging.getLogger(__name__)


def run(state) -> dict:
    """Exit 0 iff every criterion holds, 2 otherwise."""
    report = state["report"]
    logs = list(state.get("logs") or [])
    failed = [c for c in report.criteria if not c.passed]
    for c in failed:
        logs.append(f"[evaluate] FAIL {c.name}: {c.value:.6g} vs {c.threshold:.6g} {c.detail}".rstrip())
    if failed:
        logger.warning("%s: %d of %d criteria failed", report.experiment, len(failed), len(report.criteria))
    logs.append(f"[evaluate] passed={not failed}")
    return {"exit_code": 2 if failed else 0, "logs": logs}
