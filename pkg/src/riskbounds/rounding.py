"""Presentation rounding: round half away from zero, like printed tables do.

Python's built-in round() uses banker's rounding, which disagrees with how
reference tables are typically printed (0.125 -> 0.13, not 0.12).  Going
through Decimal with ROUND_HALF_UP on the shortest repr avoids binary
representation surprises.
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal


def round_half_away(x: float, digits: int = 2) -> float:
    """Round to ``digits`` decimals with ties going away from zero."""
    quantum = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(float(x))).quantize(quantum, rounding=ROUND_HALF_UP))


def format_fixed(x: float, digits: int) -> str:
    """Fixed-point string with half-away-from-zero rounding."""
    value = round_half_away(x, digits) + 0.0  # normalizes -0.0 to 0.0
    return f"{value:.{digits}f}"
