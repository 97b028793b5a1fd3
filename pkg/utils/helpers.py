"""
Helper utility functions for the localization simulator.
Functions for parsing angle input, formatting numbers, and other common tasks.
"""

import math
import re
from typing import Optional, Sequence, Union

# ============= INPUT PARSING =============

# "pi", "-pi/2", "2*pi/3", "0.5 pi", "3pi/4"
_PI_PATTERN = re.compile(
    r"""^\s*
    (?P<sign>[+-])?\s*
    (?:(?P<factor>\d+(?:\.\d*)?|\.\d+)\s*\*?\s*)?
    pi
    (?:\s*/\s*(?P<divisor>\d+(?:\.\d*)?|\.\d+))?
    \s*$""",
    re.IGNORECASE | re.VERBOSE,
)


def parse_angle(value: Union[str, float, int]) -> float:
    """
    Angle in radians from a number or a pi expression.
    Examples: 0.628, "pi/5", "2*pi/3", "-pi/2", "pi"

    Raises:
        ValueError: the value is neither a number nor a pi expression
    """
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)

    text = str(value).strip()
    match = _PI_PATTERN.match(text)
    if match:
        factor = float(match.group("factor")) if match.group("factor") else 1.0
        divisor = float(match.group("divisor")) if match.group("divisor") else 1.0
        if divisor == 0:
            raise ValueError(f"division by zero in angle {text!r}")
        angle = factor * math.pi / divisor
        return -angle if match.group("sign") == "-" else angle

    try:
        return float(text)
    except ValueError:
        raise ValueError(f"not an angle: {text!r} (use radians or forms like 'pi/5')") from None


# ============= DATA FORMATTING =============

def format_optional(value: Optional[float], digits: int = 4) -> str:
    """Format a number for display, "n/a" when undefined."""
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return "n/a"
    return f"{value:.{digits}g}"


def format_angle(theta: float) -> str:
    """Show theta as pi/n when it is one, otherwise in radians."""
    if theta != 0:
        ratio = math.pi / theta
        nearest = round(ratio)
        if nearest != 0 and abs(ratio - nearest) < 1e-9:
            return "pi" if nearest == 1 else f"pi/{nearest}"
    return f"{theta:.6g}"


def is_strictly_monotone(values: Sequence[Optional[float]], increasing: bool = True) -> bool:
    """True when every value is defined and the sequence strictly rises (or falls)."""
    if any(v is None for v in values):
        return False
    pairs = zip(values, values[1:])
    if increasing:
        return all(a < b for a, b in pairs)
    return all(a > b for a, b in pairs)
