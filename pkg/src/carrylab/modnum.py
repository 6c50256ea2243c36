"""Digit arithmetic mod b and the digit orderings induced by units."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class Base:
    """A positional base b >= 2."""

    b: int

    def __post_init__(self) -> None:
        if not isinstance(self.b, int) or isinstance(self.b, bool):
            raise ValueError(f"base must be an int, got {self.b!r}")
        if self.b < 2:
            raise ValueError(f"base must be >= 2, got {self.b}")

    def digits(self) -> range:
        return range(self.b)


@dataclass(frozen=True, slots=True)
class Digit:
    """A digit that remembers its base, so cross-base mixups fail loudly."""

    value: int
    base: Base

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.base.b:
            raise ValueError(
                f"digit {self.value} out of range for base {self.base.b}")


def as_base(base: Base | int) -> Base:
    return base if isinstance(base, Base) else Base(base)


def digit_value(base: Base | int, d: Digit | int) -> int:
    """Validate d against base and return its plain integer value.

    Accepts either a bare int or a Digit; a Digit carrying a different base
    is rejected rather than silently reduced.
    """
    base = as_base(base)
    if isinstance(d, Digit):
        if d.base != base:
            raise ValueError(
                f"digit of base {d.base.b} used in base {base.b} context")
        return d.value
    if not 0 <= d < base.b:
        raise ValueError(f"digit {d} out of range for base {base.b}")
    return d


def mod_add(base: Base | int, x: Digit | int, y: Digit | int) -> Digit:
    base = as_base(base)
    xv = digit_value(base, x)
    yv = digit_value(base, y)
    return Digit((xv + yv) % base.b, base)


def units(base: Base | int) -> tuple[int, ...]:
    """Digits coprime to b, ascending."""
    b = as_base(base).b
    return tuple(u for u in range(1, b) if math.gcd(u, b) == 1)


def euler_phi(base: Base | int) -> int:
    return len(units(base))


def mod_inverse(base: Base | int, u: Digit | int) -> int:
    base = as_base(base)
    uv = digit_value(base, u)
    if math.gcd(uv, base.b) != 1:
        raise ValueError(f"{uv} is not a unit mod {base.b}")
    return pow(uv, -1, base.b)


@dataclass(frozen=True, slots=True)
class Ordering:
    """The digit sequence (0, u, 2u, ...) mod b generated by a unit u.

    position(d) is the index of d in the sequence, i.e. u^-1 * d mod b.
    """

    base: Base
    unit: int
    sequence: tuple[int, ...]

    def position(self, d: Digit | int) -> int:
        dv = digit_value(self.base, d)
        return (mod_inverse(self.base, self.unit) * dv) % self.base.b

    def positions(self) -> tuple[int, ...]:
        """position(d) for every digit d, as a lookup table indexed by d."""
        return tuple(self.position(d) for d in self.base.digits())


def ordering_from_unit(base: Base | int, u: Digit | int) -> Ordering:
    base = as_base(base)
    uv = digit_value(base, u)
    if math.gcd(uv, base.b) != 1:
        raise ValueError(f"ordering requires a unit, got {uv} mod {base.b}")
    seq = tuple((uv * i) % base.b for i in range(base.b))
    return Ordering(base, uv, seq)


def nondegenerate_orderings(base: Base | int) -> tuple[Ordering, ...]:
    """One ordering per unit pair {u, b-u}.

    u and b-u traverse the same digit cycle in opposite directions, so they
    induce identical neighbor structure; the smaller unit represents the pair.
    """
    base = as_base(base)
    keep = [u for u in units(base) if u <= base.b - u]
    return tuple(ordering_from_unit(base, u) for u in keep)
