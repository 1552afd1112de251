"""Exact time quantities for the pipeline model.

Durations are exact rationals measured in shift-operation units, so the
analytical model and the simulator can be compared for strict equality.
One XOR costs six shifts by default; display in XOR units divides by the
configured XOR cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Union

RationalLike = Union[int, str, Fraction, Rational]


def as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str, Rational)):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class TimeQuantum:
    """Non-negative exact duration in shift units."""

    __slots__ = ("ticks",)

    def __init__(self, ticks: RationalLike):
        t = as_fraction(ticks)
        if t < 0:
            raise ValueError(f"durations cannot be negative: {t}")
        self.ticks = t

    def __add__(self, other: "TimeQuantum") -> "TimeQuantum":
        return TimeQuantum(self.ticks + other.ticks)

    def __mul__(self, factor: RationalLike) -> "TimeQuantum":
        return TimeQuantum(self.ticks * as_fraction(factor))

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TimeQuantum) and self.ticks == other.ticks

    def __lt__(self, other: "TimeQuantum") -> bool:
        return self.ticks < other.ticks

    def __le__(self, other: "TimeQuantum") -> bool:
        return self.ticks <= other.ticks

    def __gt__(self, other: "TimeQuantum") -> bool:
        return self.ticks > other.ticks

    def __ge__(self, other: "TimeQuantum") -> bool:
        return self.ticks >= other.ticks

    def __hash__(self) -> int:
        return hash(("TimeQuantum", self.ticks))

    def __bool__(self) -> bool:
        return bool(self.ticks)

    def __repr__(self) -> str:
        return f"TimeQuantum({self.ticks})"


@dataclass(frozen=True)
class CostParams:
    """Primitive operation costs, all in shift units.

    Defaults follow the model: a shift costs one unit, an XOR six, byte
    substitution and the cross-processor combine overhead are free.
    """

    t_shift: Fraction = field(default=Fraction(1))
    t_xor: Fraction = field(default=Fraction(6))
    t_byte_sub: Fraction = field(default=Fraction(0))
    t_ov: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        for name in ("t_shift", "t_xor", "t_byte_sub", "t_ov"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.t_xor <= 0:
            raise ValueError("t_xor must be positive")
        if self.t_shift < 0 or self.t_byte_sub < 0 or self.t_ov < 0:
            raise ValueError("operation costs cannot be negative")

    def xor_units(self, duration: TimeQuantum) -> Fraction:
        """Express a duration in XOR units for display and table comparison."""
        return duration.ticks / self.t_xor


DEFAULT_PARAMS = CostParams()
