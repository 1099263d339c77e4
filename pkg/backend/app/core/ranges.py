"""
ranges.py

Parameter-list syntax accepted on the command line:

    "1..8"        integers 1, 2, ..., 8
    "0.5..8:0.5"  0.5, 1.0, ..., 8.0
    "1,2,4,8"     explicit list
    "1..3,10"     mixed
"""

import re

from app.core.errors import UsageError

_RANGE = re.compile(r"^\s*(-?[\d.eE+-]+?)\s*\.\.\s*(-?[\d.eE+-]+?)\s*(?::\s*([\d.eE+-]+))?\s*$")


def _number(text: str, source: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"Invalid number '{text}' in parameter list '{source}'.") from None


def parse_range(text: str) -> list[float]:
    """Expand a parameter-list expression into floats, in the order written."""
    if text is None or not text.strip():
        raise UsageError("Empty parameter list.")
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise UsageError(f"Empty item in parameter list '{text}'.")
        match = _RANGE.match(part)
        if not match:
            values.append(_number(part, text))
            continue
        start, stop = _number(match.group(1), text), _number(match.group(2), text)
        step = _number(match.group(3), text) if match.group(3) else 1.0
        if step <= 0:
            raise UsageError(f"Step must be positive in '{part}'.")
        if stop < start:
            raise UsageError(f"Range '{part}' runs backwards.")
        count = int(round((stop - start) / step))
        if abs(start + count * step - stop) > 1e-9 * max(1.0, abs(stop)):
            raise UsageError(f"Range '{part}' does not land on its end point.")
        values.extend(start + i * step for i in range(count + 1))
    return values


def parse_int_range(text: str) -> list[int]:
    values = parse_range(text)
    if any(v != int(v) for v in values):
        raise UsageError(f"Parameter list '{text}' must contain integers.")
    return [int(v) for v in values]
