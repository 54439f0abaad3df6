"""Time units and duration parsing.

Everything inside the simulator runs on a single common unit (hours).
Durations read from files carry explicit unit suffixes ("2 s", "5 min",
"0.3 h", "1 yr"); conversion factors are exact rationals so that
converting to the common unit and back is an identity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

HOURS_PER_YEAR = 8760

# Exact factors: unit -> hours
_UNIT_TO_HOURS = {
    "s": Fraction(1, 3600),
    "sec": Fraction(1, 3600),
    "second": Fraction(1, 3600),
    "seconds": Fraction(1, 3600),
    "min": Fraction(1, 60),
    "minute": Fraction(1, 60),
    "minutes": Fraction(1, 60),
    "h": Fraction(1),
    "hr": Fraction(1),
    "hour": Fraction(1),
    "hours": Fraction(1),
    "d": Fraction(24),
    "day": Fraction(24),
    "days": Fraction(24),
    "yr": Fraction(HOURS_PER_YEAR),
    "y": Fraction(HOURS_PER_YEAR),
    "year": Fraction(HOURS_PER_YEAR),
    "years": Fraction(HOURS_PER_YEAR),
}

_CANONICAL = {"s": "s", "min": "min", "h": "h", "d": "d", "yr": "yr"}

_DURATION_RE = re.compile(r"^\s*([+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\s*([a-zA-Z]*)\s*$")


class UnitError(ValueError):
    """Unknown unit or malformed duration string."""


def _factor(unit: str) -> Fraction:
    try:
        return _UNIT_TO_HOURS[unit.lower()]
    except KeyError:
        raise UnitError(f"unknown time unit {unit!r}") from None


@dataclass(frozen=True)
class Duration:
    """A value with a time unit; converts exactly between units."""

    value: Fraction
    unit: str = "h"

    @classmethod
    def of(cls, value, unit: str = "h") -> "Duration":
        _factor(unit)  # validate
        return cls(Fraction(str(value)) if not isinstance(value, Fraction) else value, unit)

    def to(self, unit: str) -> "Duration":
        new = self.value * _factor(self.unit) / _factor(unit)
        return Duration(new, unit)

    @property
    def hours(self) -> float:
        return float(self.value * _factor(self.unit))

    def __str__(self) -> str:
        v = self.value
        text = str(float(v)) if v.denominator != 1 else str(v.numerator)
        return f"{text} {self.unit}"


def parse_duration(text: str) -> Duration:
    """Parse "2 s", "5min", "0.3 h", "4", "1 yr". A bare number means hours."""
    m = _DURATION_RE.match(str(text))
    if not m:
        raise UnitError(f"malformed duration {text!r}")
    value, unit = m.group(1), m.group(2) or "h"
    _factor(unit)
    return Duration(Fraction(value), unit)


def duration_hours(text) -> float:
    """Shorthand: parse a duration string (or accept a number) and return hours."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    return parse_duration(text).hours


def parse_rate_per_year(text) -> float:
    """Parse a failure rate like "0.07/yr" or a bare number (per year)."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip()
    if "/" in s:
        num, _, unit = s.partition("/")
        per_hours = float(_factor(unit.strip()))
        return float(num) * HOURS_PER_YEAR / per_hours
    return float(s)
