# snncodec/models/pattern.py

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction

from snncodec.errors import ContractError

DISPLAY_QUANTUM = Decimal("0.0001")


@dataclass(frozen=True)
class FiringPattern:
    bits: tuple

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ContractError(f"pattern bits must be 0/1, got {self.bits}")

    @classmethod
    def from_string(cls, text):
        return cls(tuple(int(ch) for ch in text))

    @property
    def time_steps(self):
        return len(self.bits)

    @property
    def spike_count(self):
        return sum(self.bits)

    def __str__(self):
        return "".join(str(b) for b in self.bits)


def display_value(value):
    """Exact rational -> 4-decimal string, rounded half-even."""
    if value is None:
        return "inf"
    q = Decimal(value.numerator) / Decimal(value.denominator)
    return str(q.quantize(DISPLAY_QUANTUM, rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class PatternBoundary:
    """Half-open input interval [lo, hi) producing `pattern`; hi=None means +inf."""
    pattern: FiringPattern
    lo: Fraction
    hi: Fraction | None = None

    def __post_init__(self):
        if self.hi is not None and not self.lo < self.hi:
            raise ContractError(f"empty interval [{self.lo}, {self.hi})")

    def contains(self, x):
        x = Fraction(x)
        return self.lo <= x and (self.hi is None or x < self.hi)

    @property
    def lo_display(self):
        return display_value(self.lo)

    @property
    def hi_display(self):
        return display_value(self.hi)
