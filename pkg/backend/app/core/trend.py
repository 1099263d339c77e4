"""
trend.py

Growth checks and trend fits for experiment curves.

Divergence claims are tested as strict monotone growth plus a minimum
amplification factor; fitted growth laws are reported as derived expectations
only.
"""

import logging

import numpy as np
from scipy.stats import linregress

from app.core.models import TrendFit

logger = logging.getLogger(__name__)

_LAWS = ("linear", "sqrt", "log", "power")


def fit_trend(x, y, law: str) -> TrendFit:
    """
    Fit y against a candidate law.

    Args:
        x: Parameter values (t, k or 1/eps).
        y: Measured values.
        law: "linear" (y ~ x), "sqrt" (y ~ sqrt x), "log" (y ~ log x) or
            "power" (log y ~ log x, slope is the exponent).

    Returns:
        A TrendFit; NaN slope when fewer than two usable points remain.
    """
    if law not in _LAWS:
        raise ValueError(f"Unknown growth law '{law}'")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    if law in ("log", "power", "sqrt"):
        keep &= x > 0
    if law == "power":
        keep &= y > 0
    x, y = x[keep], y[keep]
    if x.size < 2 or np.all(x == x[0]):
        logger.warning("Not enough points to fit a %s trend", law)
        return TrendFit(law=law, slope=float("nan"), intercept=float("nan"), r_value=float("nan"))
    if law == "sqrt":
        x = np.sqrt(x)
    elif law == "log":
        x = np.log(x)
    elif law == "power":
        x, y = np.log(x), np.log(y)
    res = linregress(x, y)
    return TrendFit(law=law, slope=float(res.slope), intercept=float(res.intercept), r_value=float(res.rvalue))


def strictly_increasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(v.size < 2 or np.all(np.diff(v) > 0))


def amplification(values) -> float:
    """Last over first value; inf when the first value is zero and the last positive."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan")
    if v[0] == 0:
        return float("inf") if v[-1] > 0 else float("nan")
    return float(v[-1] / v[0])


def step_ratios(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[1:] / v[:-1]


def plateau_variation(values) -> float:
    """max / min over the upper half of a curve."""
    v = np.asarray(values, dtype=float)
    upper = v[len(v) // 2:]
    if upper.size == 0 or np.min(upper) <= 0:
        return float("inf")
    return float(np.max(upper) / np.min(upper))


def equal_increments(values, tolerance: float) -> tuple[bool, float]:
    """Whether consecutive differences agree to ``tolerance`` relative to their mean."""
    d = np.diff(np.asarray(values, dtype=float))
    if d.size < 2:
        return True, 0.0
    mean = float(np.mean(d))
    if mean == 0:
        return False, float("inf")
    spread = float(np.max(np.abs(d - mean)) / abs(mean))
    return spread <= tolerance, spread
