"""Structure measures on carry tables.

The depth-k carry grid of a table is treated as an image; its complexity is
summarized by the box-counting dimension of the border between carry regions,
by how often a carry happens at all, and by how often addition associates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .addition import AssocDetail, associativity_detail, depth_k_table
from .carry import CarryTable
from .modnum import ordering_from_unit, units

BORDER_RULES = ("any", "all")
DEFAULT_MAX_DEPTH = 4


def border_mask(grid, rule: str = "any") -> np.ndarray:
    """Mark cells starting a new carry region, scanning from the top-left.

    rule="any" (default): a cell is border iff it differs from at least one
    of the neighbors it has among {above, left}; (0,0) has neither and is
    never border. This is the rule under which single-value tables converge
    to dimension 1 while multi-value tables stay above 1.25.
    rule="all": stricter variant requiring disagreement with every existing
    neighbor; kept for comparison.
    """
    if rule not in BORDER_RULES:
        raise ValueError(f"unknown border rule {rule!r}")
    g = np.asarray(grid)
    if g.ndim != 2:
        raise ValueError("border_mask expects a 2-d grid")
    up_diff = np.zeros(g.shape, dtype=bool)
    left_diff = np.zeros(g.shape, dtype=bool)
    up_diff[1:, :] = g[1:, :] != g[:-1, :]
    left_diff[:, 1:] = g[:, 1:] != g[:, :-1]
    has_up = np.zeros(g.shape, dtype=bool)
    has_left = np.zeros(g.shape, dtype=bool)
    has_up[1:, :] = True
    has_left[:, 1:] = True
    if rule == "all":
        mask = (up_diff | ~has_up) & (left_diff | ~has_left) & (has_up | has_left)
    else:
        mask = up_diff | left_diff
    return mask


def _relabel_grid(F: CarryTable, grid: np.ndarray, depth: int, unit: int) -> np.ndarray:
    """Re-sort rows and columns after mapping each index digit to its
    position in the unit's ordering."""
    b = F.base.b
    pos = np.array(ordering_from_unit(F.base, unit).positions(), dtype=np.int64)
    n = np.arange(b ** depth, dtype=np.int64)
    perm = np.zeros_like(n)
    scale = 1
    for _ in range(depth):
        perm += pos[(n // scale) % b] * scale
        scale *= b
    inv = np.argsort(perm)
    return grid[inv][:, inv]


@dataclass(frozen=True, slots=True)
class BoxDimension:
    estimate: float
    border_count: int
    unit: int  # ordering under which the estimate was taken


def box_dimension(F: CarryTable, depth: int,
                  minimize_over_orderings: bool = False,
                  rule: str = "any") -> BoxDimension:
    """log N_eps / log b^depth, N_eps the border count of the depth grid.

    With minimize_over_orderings, the grid indices are relabeled digit-wise
    by every unit's ordering and the smallest estimate wins (ties go to the
    smaller unit; unit 1 is the identity relabeling). All units take part,
    not one per {u, b-u} pair: a u-carry table is descrambled only by its
    own unit's ordering, and under the default border rule the reversed
    ordering does not produce the same count. An empty border yields
    estimate 0.
    """
    grid = depth_k_table(F, depth)
    side = grid.shape[0]
    candidates = units(F.base) if minimize_over_orderings else (1,)
    best: BoxDimension | None = None
    for u in candidates:
        relabeled = grid if u == 1 else _relabel_grid(F, grid, depth, u)
        count = int(border_mask(relabeled, rule).sum())
        est = math.log(count) / math.log(side) if count > 0 else 0.0
        if best is None or est < best.estimate:
            best = BoxDimension(est, count, u)
    assert best is not None
    return best


def carry_frequency(F: CarryTable, depth: int) -> float:
    """Fraction of depth-digit operand pairs that produce a nonzero carry."""
    grid = depth_k_table(F, depth)
    return float(np.count_nonzero(grid)) / grid.size


def overall_carry_frequency(F: CarryTable, max_depth: int = DEFAULT_MAX_DEPTH) -> float:
    """Mean carry frequency over depths 1..max_depth."""
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    return sum(carry_frequency(F, k) for k in range(1, max_depth + 1)) / max_depth


@dataclass(frozen=True, slots=True)
class DepthMeasures:
    depth: int
    border_count: int
    box_dim: float
    box_dim_min_ordering: float
    min_ordering_unit: int
    carry_frequency: float
    assoc: AssocDetail


@dataclass(frozen=True, slots=True)
class MeasureReport:
    base: int
    table_id: int | None
    per_depth: tuple[DepthMeasures, ...]
    overall_carry_frequency: float
    min_ordering_unit: int  # minimizer at the deepest depth

    def at_depth(self, depth: int) -> DepthMeasures:
        for row in self.per_depth:
            if row.depth == depth:
                return row
        raise KeyError(f"no measures at depth {depth}")


def measure_report(F: CarryTable, max_depth: int = DEFAULT_MAX_DEPTH,
                   rule: str = "any") -> MeasureReport:
    """All per-depth measures for one table, depths 1..max_depth."""
    rows = []
    for k in range(1, max_depth + 1):
        plain = box_dimension(F, k, minimize_over_orderings=False, rule=rule)
        minimized = box_dimension(F, k, minimize_over_orderings=True, rule=rule)
        rows.append(DepthMeasures(
            depth=k,
            border_count=plain.border_count,
            box_dim=plain.estimate,
            box_dim_min_ordering=minimized.estimate,
            min_ordering_unit=minimized.unit,
            carry_frequency=carry_frequency(F, k),
            assoc=associativity_detail(F, k),
        ))
    return MeasureReport(
        base=F.base.b,
        table_id=F.table_id,
        per_depth=tuple(rows),
        overall_carry_frequency=sum(r.carry_frequency for r in rows) / len(rows),
        min_ordering_unit=rows[-1].min_ordering_unit,
    )
