"""Carry functions for base-b addition.

A carry table F sends a digit pair (n, m) to the value carried into the next
column. Valid tables are normalized (F(n,0) = F(0,n) = 0) and satisfy the
two-digit associativity identity

    F(n,m) + F(n+m, p) = F(m,p) + F(n, m+p)   (mod b),

which makes them 2-cocycles on Z_b. Every valid table arises from the
schoolbook carry by a coboundary shift, and there are exactly b^(b-2) of them.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .modnum import Base, Digit, as_base, digit_value, euler_phi, ordering_from_unit, units


@dataclass(frozen=True, slots=True)
class CarryTable:
    """A b x b table of carried values, indexed as entries[n][m].

    table_id is the table's canonical index within enumerate_carry_tables
    (row-major lexicographic rank); it is bookkeeping only and never takes
    part in equality.
    """

    base: Base
    entries: tuple[tuple[int, ...], ...]
    table_id: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        b = self.base.b
        if len(self.entries) != b or any(len(row) != b for row in self.entries):
            raise ValueError(f"carry table must be {b}x{b}")
        for row in self.entries:
            for v in row:
                if not 0 <= v < b:
                    raise ValueError(f"carry value {v} out of range for base {b}")

    def __getitem__(self, nm: tuple[int, ...]) -> int:
        n, m = nm
        return self.entries[digit_value(self.base, n)][digit_value(self.base, m)]

    def key(self) -> tuple[int, ...]:
        """Row-major flattening; the canonical sort key."""
        return tuple(v for row in self.entries for v in row)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def carried_values(self) -> tuple[int, ...]:
        """Distinct nonzero values appearing in the table, ascending."""
        return tuple(sorted({v for row in self.entries for v in row if v != 0}))


def table_from_array(base: Base | int, arr: np.ndarray,
                     table_id: int | None = None) -> CarryTable:
    base = as_base(base)
    entries = tuple(tuple(int(v) for v in row) for row in np.asarray(arr))
    return CarryTable(base, entries, table_id)


def one_carry(base: Base | int) -> CarryTable:
    """The schoolbook carry: 1 whenever a column overflows."""
    base = as_base(base)
    b = base.b
    entries = tuple(
        tuple(1 if n + m >= b else 0 for m in range(b)) for n in range(b))
    return CarryTable(base, entries)


def u_carry(base: Base | int, u: Digit | int) -> CarryTable:
    """The carry that plays the role of one_carry under the ordering of u.

    Digits are ranked by their position in (0, u, 2u, ...); the table carries
    u exactly when the positions of the two operands sum past b.
    """
    base = as_base(base)
    uv = digit_value(base, u)
    pos = ordering_from_unit(base, uv).positions()
    b = base.b
    entries = tuple(
        tuple(uv if pos[n] + pos[m] >= b else 0 for m in range(b))
        for n in range(b))
    return CarryTable(base, entries)


def is_normalized(F: CarryTable) -> bool:
    b = F.base.b
    return all(F.entries[n][0] == 0 and F.entries[0][n] == 0 for n in range(b))


def is_cocycle(F: CarryTable) -> bool:
    """Check the two-digit associativity identity over all digit triples."""
    b = F.base.b
    e = F.entries
    for n in range(b):
        for m in range(b):
            for p in range(b):
                lhs = e[n][m] + e[(n + m) % b][p]
                rhs = e[m][p] + e[n][(m + p) % b]
                if lhs % b != rhs % b:
                    return False
    return True


@dataclass(frozen=True, slots=True)
class CoboundaryMap:
    """A digit relabeling c with c(0) = 0, stored as values[d] = c(d)."""

    base: Base
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        b = self.base.b
        if len(self.values) != b:
            raise ValueError(f"coboundary map needs {b} values")
        if self.values[0] != 0:
            raise ValueError("coboundary map must fix 0")
        for v in self.values:
            if not 0 <= v < b:
                raise ValueError(f"coboundary value {v} out of range")

    def __call__(self, d: Digit | int) -> int:
        return self.values[digit_value(self.base, d)]


def coboundary_shift(F: CarryTable, c: CoboundaryMap) -> CarryTable:
    """Shift F by the coboundary of c: F'(n,m) = F(n,m) + c(n) + c(m) - c(n+m)."""
    if c.base != F.base:
        raise ValueError("coboundary map and table disagree on base")
    b = F.base.b
    cv = c.values
    entries = tuple(
        tuple((F.entries[n][m] + cv[n] + cv[m] - cv[(n + m) % b]) % b
              for m in range(b))
        for n in range(b))
    return CarryTable(F.base, entries)


_ENUMERATION_MAX_BASE = 6


@functools.lru_cache(maxsize=None)
def _enumerate_cached(b: int) -> tuple[CarryTable, ...]:
    if b > _ENUMERATION_MAX_BASE:
        raise ResourceLimitError(
            f"enumeration scans b^(b-1) coboundary maps; base {b} exceeds "
            f"the supported maximum {_ENUMERATION_MAX_BASE}")
    base = Base(b)
    start = one_carry(base)
    seen: dict[tuple[int, ...], CarryTable] = {}
    # all maps c: Z_b -> Z_b with c(0) = 0
    for idx in range(b ** (b - 1)):
        vals = [0]
        rest = idx
        for _ in range(b - 1):
            vals.append(rest % b)
            rest //= b
        shifted = coboundary_shift(start, CoboundaryMap(base, tuple(vals)))
        seen.setdefault(shifted.key(), shifted)
    tables = sorted(seen.values(), key=CarryTable.key)
    out = []
    for i, t in enumerate(tables):
        if not (is_normalized(t) and is_cocycle(t)):
            raise AssertionError("enumerated table failed validity check")
        out.append(CarryTable(base, t.entries, table_id=i))
    expected = b ** (b - 2)
    if len(out) != expected:
        raise AssertionError(
            f"enumeration produced {len(out)} tables, expected {expected}")
    return tuple(out)


def enumerate_carry_tables(base: Base | int) -> tuple[CarryTable, ...]:
    """All valid carry tables for the base, sorted by row-major flattening.

    Generated as coboundary shifts of one_carry and deduplicated; the result
    has exactly b^(b-2) tables and each table's index is its canonical id.
    """
    return _enumerate_cached(as_base(base).b)


def table_by_id(base: Base | int, table_id: int) -> CarryTable:
    tables = enumerate_carry_tables(base)
    if not 0 <= table_id < len(tables):
        raise ValueError(
            f"carry id {table_id} out of range for base {as_base(base).b} "
            f"({len(tables)} tables)")
    return tables[table_id]


_BRUTE_FORCE_MAX_BASE = 4


def brute_force_equivalent_cocycles(base: Base | int) -> tuple[CarryTable, ...]:
    """Independent cross-check of the enumeration for small bases.

    Scans every normalized b x b table, keeps the 2-cocycles, and keeps those
    differing from one_carry by a coboundary (solved for directly). The scan
    is b^((b-1)^2) tables, so bases above 4 are refused.
    """
    base = as_base(base)
    b = base.b
    if b > _BRUTE_FORCE_MAX_BASE:
        raise ResourceLimitError(
            f"brute force scan infeasible for base {b} (max {_BRUTE_FORCE_MAX_BASE})")

    free = (b - 1) ** 2
    count = b ** free
    # Tables laid out as (count, b, b) with zero border row/column.
    grids = np.zeros((count, b, b), dtype=np.int64)
    combos = np.indices((b,) * free).reshape(free, -1).T  # (count, free)
    grids[:, 1:, 1:] = combos.reshape(count, b - 1, b - 1)

    keep = np.ones(count, dtype=bool)
    for n in range(b):
        for m in range(b):
            for p in range(b):
                lhs = grids[:, n, m] + grids[:, (n + m) % b, p]
                rhs = grids[:, m, p] + grids[:, n, (m + p) % b]
                keep &= (lhs - rhs) % b == 0
    cocycles = grids[keep]

    start = one_carry(base).as_array()
    found = []
    for grid in cocycles:
        if _solve_coboundary(start, grid, b) is not None:
            found.append(table_from_array(base, grid))
    found.sort(key=CarryTable.key)
    return tuple(found)


def _solve_coboundary(F: np.ndarray, G: np.ndarray, b: int) -> tuple[int, ...] | None:
    """Find c with c(0)=0 and G - F = c(n) + c(m) - c(n+m) mod b, if any.

    c(1) determines the rest through delta(1, m) = c(1) + c(m) - c(1+m), so
    try each value of c(1) and verify the full table.
    """
    delta = (G - F) % b
    for c1 in range(b):
        c = [0] * b
        if b > 1:
            c[1 % b] = c1
        ok = True
        for m in range(1, b - 1):
            c[(1 + m) % b] = (c[1] + c[m] - delta[1, m]) % b
        for n in range(b):
            for m in range(b):
                if (c[n] + c[m] - c[(n + m) % b]) % b != delta[n, m]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return tuple(c)
    return None


@dataclass(frozen=True, slots=True)
class SingleValue:
    """All carries share one value, a unit of Z_b."""

    unit: int


@dataclass(frozen=True, slots=True)
class LowDimMultiValue:
    """Several carried values, yet associativity holds at every tested depth."""


@dataclass(frozen=True, slots=True)
class OtherMultiValue:
    """Several carried values and associativity fails beyond two digits."""


CarryClass = SingleValue | LowDimMultiValue | OtherMultiValue

_CLASSIFY_DEPTHS = (1, 2, 3, 4)


def classify(F: CarryTable) -> CarryClass:
    """Sort an enumerated table into one of the three carry classes.

    SingleValue: the nonzero entries are exactly {u} for a unit u.
    LowDimMultiValue: multi-valued but fully associative at depths 1 through 4
    (exhaustive where feasible, sampled above the triplet budget).
    OtherMultiValue: everything else.
    """
    from .addition import associativity_fraction  # deferred: addition imports this module

    valid = {t.key() for t in enumerate_carry_tables(F.base)}
    if F.key() not in valid:
        raise ValueError("table is not a valid carry table for its base")

    carried = F.carried_values()
    if len(carried) == 1 and carried[0] in units(F.base):
        return SingleValue(carried[0])
    if all(associativity_fraction(F, k) == 1.0 for k in _CLASSIFY_DEPTHS):
        return LowDimMultiValue()
    return OtherMultiValue()


def class_label(cls: CarryClass) -> str:
    if isinstance(cls, SingleValue):
        return "single_value"
    if isinstance(cls, LowDimMultiValue):
        return "low_dim_multi_value"
    return "other_multi_value"
