"""Exact rational scalars: coercion and the strict "p/q" wire format.

Floats are rejected everywhere.  All arithmetic in this package is exact, so a
float sneaking in would silently poison every downstream equality check.
"""

from __future__ import annotations

import re
from fractions import Fraction

_RATIONAL_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


def as_fraction(value) -> Fraction:
    """Coerce an int, Fraction, or "p/q" string to a Fraction.

    Floats (and bools) are rejected with TypeError.
    """
    if isinstance(value, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def parse_rational(text: str) -> Fraction:
    """Parse the decimal-free "p/q" wire format (also plain integers "p")."""
    if not isinstance(text, str) or not _RATIONAL_RE.match(text):
        raise ValueError(f"not a 'p/q' rational: {text!r}")
    return Fraction(text)


def format_rational(value: Fraction) -> str:
    """Serialize a Fraction to its canonical decimal-free string."""
    return str(Fraction(value))
