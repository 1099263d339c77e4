from typing import List, Optional, TypedDict

from app.core.models import CocycleReport, RunConfig
from app.geometry.params import GroupParams


class RunState(TypedDict, total=False):
    # Input
    config: RunConfig
    params: Optional[GroupParams]

    # Pipeline state
    report: Optional[CocycleReport]
    error: Optional[str]
    gate: Optional[str]
    logs: List[str]

    # Results
    exit_code: int
    artifacts: dict
