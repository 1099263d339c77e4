"""
refinement.py

Tracks grid refinements (spacing h -> h/2) for convergence checks and decides
whether another refinement is warranted.
"""

import logging

logger = logging.getLogger(__name__)


class RefinementManager:
    """Refinement loop with a configurable maximum number of halvings."""

    def __init__(self, tolerance: float = 0.05, max_refinements: int = 1) -> None:
        """
        Initialise the refinement manager.

        Args:
            tolerance: Relative change below which a quantity counts as converged.
            max_refinements: Maximum number of h -> h/2 steps allowed.
        """
        self.tolerance = tolerance
        self.max_refinements = max_refinements
        self._refinements: int = 0
        self.history: list[float] = []
        logger.info(
            "RefinementManager initialised (tolerance=%.3g, max_refinements=%d)",
            tolerance,
            max_refinements,
        )

    def record(self, value: float) -> None:
        self.history.append(float(value))

    def relative_change(self) -> float:
        if len(self.history) < 2:
            return float("inf")
        prev, last = self.history[-2], self.history[-1]
        scale = max(abs(prev), abs(last), 1e-300)
        return abs(last - prev) / scale

    def converged(self) -> bool:
        return self.relative_change() <= self.tolerance

    def should_refine(self) -> bool:
        """
        A refinement is allowed only when the last two values have not yet
        converged **and** the refinement limit has not been reached.
        """
        if len(self.history) >= 2 and self.converged():
            logger.info("Converged (relative change %.3e)", self.relative_change())
            return False
        if self.has_exceeded():
            logger.warning(
                "Refinement limit reached (%d/%d).", self._refinements, self.max_refinements
            )
            return False
        return True

    def track_refinement(self) -> None:
        self._refinements += 1
        logger.info("Refinement tracked: %d/%d", self._refinements, self.max_refinements)

    def has_exceeded(self) -> bool:
        return self._refinements >= self.max_refinements
