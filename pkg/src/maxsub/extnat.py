"""Natural numbers extended by a single infinite value (aleph-null)."""
from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering


@total_ordering
@dataclass(frozen=True)
class ExtNat:
    """Element of N ∪ {ℵ₀}. ``value is None`` encodes the infinite value."""

    value: int | None

    def __post_init__(self):
        if self.value is not None and self.value < 0:
            raise ValueError(f"finite ExtNat must be nonnegative, got {self.value}")

    @property
    def is_inf(self) -> bool:
        return self.value is None

    @property
    def is_fin(self) -> bool:
        return self.value is not None

    def __add__(self, other: ExtNat | int) -> ExtNat:
        other = as_extnat(other)
        if self.is_inf or other.is_inf:
            return INF
        return ExtNat(self.value + other.value)

    __radd__ = __add__

    def __lt__(self, other: ExtNat | int) -> bool:
        other = as_extnat(other)
        if self.is_inf:
            return False
        if other.is_inf:
            return True
        return self.value < other.value

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and not isinstance(other, bool):
            return self.value == other
        if not isinstance(other, ExtNat):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return "Inf" if self.is_inf else f"Fin({self.value})"

    def __str__(self):
        return "ℵ₀" if self.is_inf else str(self.value)

    def to_json(self):
        return "inf" if self.is_inf else self.value

    @classmethod
    def from_json(cls, obj) -> ExtNat:
        if obj == "inf":
            return INF
        return Fin(int(obj))


def Fin(n: int) -> ExtNat:
    return ExtNat(int(n))


INF = ExtNat(None)
ZERO = ExtNat(0)


def as_extnat(x: ExtNat | int) -> ExtNat:
    if isinstance(x, ExtNat):
        return x
    return Fin(x)


def ext_add(a: ExtNat, b: ExtNat) -> ExtNat:
    return a + b


def ext_min(*xs: ExtNat) -> ExtNat:
    return min(as_extnat(x) for x in xs)


def ext_max(*xs: ExtNat) -> ExtNat:
    return max(as_extnat(x) for x in xs)
