"""
executor.py

Ordered map over independent parameter points. Results come back in input
order regardless of completion order, so reports are deterministic.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, Optional

from app.core.constants import MAX_WORKERS

logger = logging.getLogger(__name__)


class OrderedExecutor:
    """Runs a function over parameter points, serially or on a thread pool."""

    def __init__(self, max_workers: Optional[int] = None) -> None:
        """
        Args:
            max_workers: Thread count; 1 runs inline. Defaults to MAX_WORKERS.
        """
        self.max_workers = max(1, int(max_workers or MAX_WORKERS))

    def map(self, func: Callable[[Any], Any], points: Iterable[Any]) -> list[Any]:
        """
        Apply ``func`` to every point.

        Returns:
            Results in the order of ``points``.

        Raises:
            Whatever ``func`` raises for the first failing point (in input order).
        """
        points = list(points)
        if self.max_workers == 1 or len(points) <= 1:
            return [func(p) for p in points]
        logger.debug("Mapping %d points over %d workers", len(points), self.max_workers)
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            futures = [pool.submit(func, p) for p in points]
            return [f.result() for f in futures]
