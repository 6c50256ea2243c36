"""Multi-digit addition driven by a carry table.

Numbers store digits least-significant-first; display is most-significant
first. Adding k-digit numbers keeps k digits (the final carry is discarded),
so each carry table makes Z_b^k a magma, and the depth-k carry grid records
the discarded carry for every operand pair.

Code convention: a k-digit number maps to the integer sum(d_j * b^(j-1)),
which ranks tuples in most-significant-first lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .carry import CarryTable
from .errors import ResourceLimitError
from .modnum import Base, as_base

# Budget caps; above them operations either sample or refuse.
GRID_CELL_LIMIT = 10 ** 8          # cells in a pairwise dynamic program
ORBIT_LIMIT = 10 ** 6              # counting-orbit length b^k
PAIR_EXHAUSTIVE_LIMIT = 10 ** 6    # operand pairs checked exhaustively
PAIR_SAMPLES = 10_000
TRIPLET_EXHAUSTIVE_LIMIT = 2_000_000
TRIPLET_SAMPLES = 20_000

# Fixed Philox keys so sampled checks are reproducible and thread-independent,
# and every table is judged on the same sampled operands.
_PAIR_KEY = 0x7A1C5EED
_TRIPLET_KEY = 0x5EEDCA88


@dataclass(frozen=True, slots=True)
class BaseNumber:
    """A fixed-width number in base b; digits[0] is the ones digit."""

    base: Base
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.digits) == 0:
            raise ValueError("a number needs at least one digit")
        for d in self.digits:
            if not 0 <= d < self.base.b:
                raise ValueError(f"digit {d} out of range for base {self.base.b}")

    @classmethod
    def from_msd(cls, base: Base | int, seq) -> "BaseNumber":
        """Build from a most-significant-first digit sequence."""
        return cls(as_base(base), tuple(reversed(tuple(seq))))

    @classmethod
    def from_int(cls, base: Base | int, value: int, width: int) -> "BaseNumber":
        base = as_base(base)
        if not 0 <= value < base.b ** width:
            raise ValueError(f"{value} does not fit in {width} base-{base.b} digits")
        digits = []
        for _ in range(width):
            digits.append(value % base.b)
            value //= base.b
        return cls(base, tuple(digits))

    def msd(self) -> tuple[int, ...]:
        return tuple(reversed(self.digits))

    def to_int(self) -> int:
        return sum(d * self.base.b ** j for j, d in enumerate(self.digits))

    def __repr__(self) -> str:
        return f"BaseNumber(base={self.base.b}, msd={self.msd()})"


def zeros(base: Base | int, width: int) -> BaseNumber:
    return BaseNumber(as_base(base), (0,) * width)


def _check_bases(F: CarryTable, *nums: BaseNumber) -> None:
    for x in nums:
        if x.base != F.base:
            raise ValueError(
                f"operand base {x.base.b} does not match table base {F.base.b}")


def _add_digits(F: CarryTable, a: tuple[int, ...], b_: tuple[int, ...]):
    """Column-by-column addition; returns (sum digits, discarded final carry)."""
    b = F.base.b
    e = F.entries
    width = max(len(a), len(b_))
    a = a + (0,) * (width - len(a))
    b_ = b_ + (0,) * (width - len(b_))
    carry = 0
    out = []
    for j in range(width):
        nj, mj = a[j], b_[j]
        out.append((nj + mj + carry) % b)
        carry = (e[nj][mj] + e[(nj + mj) % b][carry]) % b
    return tuple(out), carry


def add(F: CarryTable, n: BaseNumber, m: BaseNumber) -> BaseNumber:
    """n + m under carry table F; the result keeps the wider operand's width."""
    _check_bases(F, n, m)
    digits, _ = _add_digits(F, n.digits, m.digits)
    return BaseNumber(F.base, digits)


def final_carry(F: CarryTable, n: BaseNumber, m: BaseNumber) -> int:
    """The carry that add() discards off the top column."""
    _check_bases(F, n, m)
    _, carry = _add_digits(F, n.digits, m.digits)
    return carry


def add_codes(F: CarryTable, width: int, xs, ys) -> np.ndarray:
    """Vectorized add on integer-coded operands of the given width."""
    b = F.base.b
    e = F.as_array()
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    carry = np.zeros(np.broadcast_shapes(xs.shape, ys.shape), dtype=np.int64)
    out = np.zeros_like(carry)
    scale = 1
    for _ in range(width):
        nj = (xs // scale) % b
        mj = (ys // scale) % b
        out += ((nj + mj + carry) % b) * scale
        carry = (e[nj, mj] + e[(nj + mj) % b, carry]) % b
        scale *= b
    return out


def _dp_grid(F: CarryTable, width: int, want_sums: bool):
    """All-pairs dynamic program over digit columns.

    Returns (sum code grid or None, final carry grid), each (b^width, b^width).
    """
    b = F.base.b
    N = b ** width
    if N * N > GRID_CELL_LIMIT:
        raise ResourceLimitError(
            f"pairwise grid for base {b} width {width} needs {N * N} cells")
    e = F.as_array()
    rows = np.arange(N, dtype=np.int64).reshape(N, 1)
    cols = np.arange(N, dtype=np.int64).reshape(1, N)
    carry = np.zeros((N, N), dtype=np.int64)
    sums = np.zeros((N, N), dtype=np.int64) if want_sums else None
    scale = 1
    for _ in range(width):
        nj = (rows // scale) % b
        mj = (cols // scale) % b
        if want_sums:
            sums += ((nj + mj + carry) % b) * scale
        carry = (e[nj, mj] + e[(nj + mj) % b, carry]) % b
        scale *= b
    return sums, carry


def sum_code_grid(F: CarryTable, width: int) -> np.ndarray:
    """Result codes of x + y for every pair of width-digit operands."""
    sums, _ = _dp_grid(F, width, want_sums=True)
    return sums


def depth_k_table(F: CarryTable, depth: int) -> np.ndarray:
    """The carry leaving column `depth` for every pair of depth-digit operands.

    Bit-identical to running the column recursion cell by cell; computed as a
    dynamic program over columns so whole grids stay affordable.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    _, carry = _dp_grid(F, depth, want_sums=False)
    return carry


def counting_orbit(F: CarryTable, g: BaseNumber, steps: int) -> list[BaseNumber]:
    """Repeatedly add g starting from zero: [0, g, g+g, ...], steps additions."""
    _check_bases(F, g)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    x = zeros(F.base, len(g.digits))
    orbit = [x]
    for _ in range(steps):
        x = add(F, x, g)
        orbit.append(x)
    return orbit


def integer_equivalence_check(F: CarryTable, width: int) -> bool:
    """Does (Z_b^width, +_F) behave as Z mod b^width under counting?

    True iff adding (0,...,0,1) repeatedly visits every width-digit number
    exactly once before returning to zero, and the visit order rep satisfies
    rep(i) + rep(j) = rep(i + j mod b^width). Pairs are checked exhaustively
    up to PAIR_EXHAUSTIVE_LIMIT, then on PAIR_SAMPLES seeded draws.
    """
    b = F.base.b
    N = b ** width
    if N > ORBIT_LIMIT:
        raise ResourceLimitError(
            f"orbit of length {N} exceeds limit {ORBIT_LIMIT}")

    one = BaseNumber.from_int(F.base, 1, width)
    orbit = counting_orbit(F, one, N)
    rep = np.array([x.to_int() for x in orbit[:N]], dtype=np.int64)
    if orbit[N].to_int() != 0 or len(set(rep.tolist())) != N:
        return False

    if N * N <= PAIR_EXHAUSTIVE_LIMIT:
        sums = sum_code_grid(F, width)
        idx = (np.arange(N).reshape(N, 1) + np.arange(N).reshape(1, N)) % N
        return bool(np.all(sums[rep.reshape(N, 1), rep.reshape(1, N)] == rep[idx]))

    rng = np.random.Generator(np.random.Philox(key=_PAIR_KEY))
    i = rng.integers(0, N, size=PAIR_SAMPLES, dtype=np.int64)
    j = rng.integers(0, N, size=PAIR_SAMPLES, dtype=np.int64)
    got = add_codes(F, width, rep[i], rep[j])
    return bool(np.all(got == rep[(i + j) % N]))


@dataclass(frozen=True, slots=True)
class AssocDetail:
    fraction: float
    mode: str      # "exhaustive" or "sampled"
    samples: int   # triplets actually checked


def associativity_detail(F: CarryTable, depth: int) -> AssocDetail:
    """Fraction of operand triplets of width depth+1 that associate.

    Exhaustive when b^(3*(depth+1)) <= TRIPLET_EXHAUSTIVE_LIMIT, otherwise
    TRIPLET_SAMPLES triplets drawn from a fixed-key Philox stream (the same
    triplets for every table of the same base and depth).
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    b = F.base.b
    width = depth + 1
    N = b ** width
    total = N ** 3

    if total <= TRIPLET_EXHAUSTIVE_LIMIT:
        sums = sum_code_grid(F, width)
        left = sums[sums, :]      # left[n,m,p]  = (n+m)+p
        right = sums[:, sums]     # right[n,m,p] = n+(m+p)
        matched = int((left == right).sum())
        return AssocDetail(matched / total, "exhaustive", total)

    rng = np.random.Generator(np.random.Philox(key=_TRIPLET_KEY))
    n, m, p = rng.integers(0, N, size=(3, TRIPLET_SAMPLES), dtype=np.int64)
    left = add_codes(F, width, add_codes(F, width, n, m), p)
    right = add_codes(F, width, n, add_codes(F, width, m, p))
    matched = int((left == right).sum())
    return AssocDetail(matched / TRIPLET_SAMPLES, "sampled", TRIPLET_SAMPLES)


def associativity_fraction(F: CarryTable, depth: int) -> float:
    return associativity_detail(F, depth).fraction


@dataclass(frozen=True, slots=True)
class EquivarianceResult:
    holds: bool
    mode: str  # "exhaustive", or "sampled" if any width was sampled

    def __bool__(self) -> bool:
        return self.holds


def is_k_equivariant(F: CarryTable, k: int) -> EquivarianceResult:
    """Whether addition under F associates for all operands of width <= k.

    Width-1 triplets always associate (the final carry is discarded), so the
    test runs widths 2..k. Widths past the triplet budget are sampled and the
    result is flagged accordingly.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    holds = True
    mode = "exhaustive"
    for width in range(2, k + 1):
        detail = associativity_detail(F, width - 1)
        if detail.mode == "sampled":
            mode = "sampled"
        if detail.fraction < 1.0:
            holds = False
            break
    return EquivarianceResult(holds, mode)
