"""Digit embeddings: exact one-hots or circular semantic kernels.

A semantic embedding places digits on a circle in the order generated by a
unit and assigns each component the kernel weight of its circular distance
to the embedded digit. The base-5 kernel is pinned to
{0: 0.5, 1: 0.2, 2: 0.05}; other bases use a circular Gaussian of width 0.8
renormalized so every embedding vector sums to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..modnum import Base, Digit, Ordering, as_base, digit_value, ordering_from_unit

PINNED_BASE5_KERNEL = {0: 0.5, 1: 0.2, 2: 0.05}
GAUSSIAN_SIGMA = 0.8


@dataclass(frozen=True)
class Symbolic:
    """One-hot embedding: digit d maps to the d-th standard basis vector."""


def circular_distance(b: int, i: int, j: int) -> int:
    d = abs(i - j) % b
    return min(d, b - d)


@dataclass(frozen=True)
class Semantic:
    ordering: Ordering
    kernel: dict[int, float] = field(hash=False)

    def __post_init__(self) -> None:
        b = self.ordering.base.b
        need = set(range(b // 2 + 1))
        missing = need - set(self.kernel)
        if missing:
            raise ConfigError(f"kernel missing distances {sorted(missing)}")
        total = sum(self.kernel[circular_distance(b, 0, j)] for j in range(b))
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"kernel sums to {total} over a circle, expected 1")


def gaussian_kernel(base: Base | int, sigma: float = GAUSSIAN_SIGMA) -> dict[int, float]:
    """exp(-d^2 / (2 sigma^2)) over circular distances, circle-sum normalized."""
    b = as_base(base).b
    raw = {d: math.exp(-d * d / (2.0 * sigma * sigma)) for d in range(b // 2 + 1)}
    total = sum(raw[circular_distance(b, 0, j)] for j in range(b))
    return {d: w / total for d, w in raw.items()}


def semantic_scheme(base: Base | int, unit: Digit | int = 1) -> Semantic:
    """The default semantic embedding for a base: pinned kernel at b=5."""
    base = as_base(base)
    kernel = dict(PINNED_BASE5_KERNEL) if base.b == 5 else gaussian_kernel(base)
    return Semantic(ordering_from_unit(base, unit), kernel)


def embed_digit(scheme: Symbolic | Semantic, base: Base | int,
                d: Digit | int) -> np.ndarray:
    base = as_base(base)
    dv = digit_value(base, d)
    b = base.b
    if isinstance(scheme, Symbolic):
        vec = np.zeros(b)
        vec[dv] = 1.0
        return vec
    if scheme.ordering.base != base:
        raise ValueError(
            f"scheme base {scheme.ordering.base.b} does not match base {b}")
    pos = scheme.ordering.positions()
    return np.array([scheme.kernel[circular_distance(b, pos[dv], pos[j])]
                     for j in range(b)])


def embedding_matrix(scheme: Symbolic | Semantic, base: Base | int) -> np.ndarray:
    """Row d = embed_digit(scheme, base, d); shape (b, b)."""
    b = as_base(base).b
    return np.stack([embed_digit(scheme, base, d) for d in range(b)])
