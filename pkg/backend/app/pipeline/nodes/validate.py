"""
validate.py

Pipeline node applying the configuration gates to the run's RunConfig.
"""

import logging

from app.core.errors import ConfigurationError, UsageError
from app.core.guard import validate_run_config

logger = logging.getLogger(__name__)


def run(state) -> dict:
    """Resolve GroupParams or record the gate that rejected the config."""
    config = state["config"]
    logs = list(state.get("logs") or [])
    try:
        params = validate_run_config(config)
    except ConfigurationError as exc:
        logs.append(f"[validate] rejected by gate {exc.gate}: {exc}")
        return {"error": str(exc), "gate": exc.gate, "exit_code": 1, "logs": logs}
    except UsageError as exc:
        logs.append(f"[validate] usage error: {exc}")
        return {"error": str(exc), "exit_code": 1, "logs": logs}
    logs.append(f"[validate] {config.command} on {params.label}")
    return {"params": params, "logs": logs}
