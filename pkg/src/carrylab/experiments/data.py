"""Interleaved-format sequence construction.

A k-digit problem becomes the 3k-token stream
(n_1, m_1, *, n_2, m_2, *, ..., n_k, m_k, *) with digit pairs least
significant first; the separator * is the all-zeros vector and each
separator step is an answer position whose target is the corresponding
digit of add(F, n, m).
"""

from __future__ import annotations

import numpy as np

from ..addition import BaseNumber, add, add_codes
from ..carry import CarryTable
from ..rnn import SequenceBatch
from .embeddings import Semantic, Symbolic, embedding_matrix

# fixed stream for evaluation pair sets, shared by every run at a given
# (base, digit length, count)
_EVAL_KEY = 0x0E7A15E7


def answer_positions(width: int) -> tuple[int, ...]:
    return tuple(3 * j + 2 for j in range(width))


def _pad(x: BaseNumber, width: int) -> BaseNumber:
    if len(x.digits) > width:
        raise ValueError(f"operand has {len(x.digits)} digits, width is {width}")
    return BaseNumber(x.base, x.digits + (0,) * (width - len(x.digits)))


def build_sequence(F: CarryTable, n: BaseNumber, m: BaseNumber,
                   scheme: Symbolic | Semantic) -> SequenceBatch:
    """A single interleaved example as a batch of one."""
    if n.base != F.base or m.base != F.base:
        raise ValueError("operand base does not match carry table base")
    width = max(len(n.digits), len(m.digits))
    n, m = _pad(n, width), _pad(m, width)
    E = embedding_matrix(scheme, F.base)
    tokens = np.zeros((1, 3 * width, F.base.b))
    for j in range(width):
        tokens[0, 3 * j] = E[n.digits[j]]
        tokens[0, 3 * j + 1] = E[m.digits[j]]
    targets = np.array([add(F, n, m).digits], dtype=np.int64)
    return SequenceBatch(tokens, answer_positions(width), targets)


def code_digits(base_b: int, codes: np.ndarray, width: int) -> np.ndarray:
    """Digit matrix (len(codes), width), least significant first."""
    codes = np.asarray(codes, dtype=np.int64).reshape(-1, 1)
    place = base_b ** np.arange(width, dtype=np.int64)
    return (codes // place) % base_b


def build_dataset(F: CarryTable, width: int, scheme: Symbolic | Semantic,
                  ns: np.ndarray, ms: np.ndarray) -> SequenceBatch:
    """Vectorized build_sequence over parallel arrays of operand codes."""
    b = F.base.b
    ns = np.asarray(ns, dtype=np.int64)
    ms = np.asarray(ms, dtype=np.int64)
    E = embedding_matrix(scheme, F.base)
    nd = code_digits(b, ns, width)
    md = code_digits(b, ms, width)
    tokens = np.zeros((len(ns), 3 * width, b))
    for j in range(width):
        tokens[:, 3 * j] = E[nd[:, j]]
        tokens[:, 3 * j + 1] = E[md[:, j]]
    sums = add_codes(F, width, ns, ms)
    return SequenceBatch(tokens, answer_positions(width),
                         code_digits(b, sums, width))


def all_pairs(base_b: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Every ordered pair of width-digit codes: (b^width)^2 rows."""
    N = base_b ** width
    i, j = np.divmod(np.arange(N * N, dtype=np.int64), N)
    return i, j


def eval_pairs(base_b: int, width: int,
               count: int) -> tuple[np.ndarray, np.ndarray]:
    """A fixed seeded sample of operand pairs, identical across runs."""
    rng = np.random.Generator(
        np.random.Philox(key=(_EVAL_KEY << 32) | (base_b << 16) | width))
    N = base_b ** width
    return (rng.integers(0, N, size=count, dtype=np.int64),
            rng.integers(0, N, size=count, dtype=np.int64))
