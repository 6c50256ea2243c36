import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carrylab.addition import depth_k_table
from carrylab.carry import enumerate_carry_tables, one_carry, table_by_id, table_from_array, u_carry
from carrylab.measures import (
    BORDER_RULES,
    border_mask,
    box_dimension,
    carry_frequency,
    measure_report,
    overall_carry_frequency,
)
from carrylab.modnum import units

ONE3_BORDERS = {1: 2, 2: 8, 3: 26, 4: 80}
ONE3_DIMS = {1: 0.630930, 2: 0.946395, 3: 0.988549, 4: 0.997173}


def test_border_mask_constant_grid_is_empty():
    for rule in BORDER_RULES:
        assert not border_mask(np.zeros((5, 5), dtype=np.int64), rule).any()
        assert not border_mask(np.full((4, 4), 3), rule).any()


def test_border_mask_depth_one_anchor():
    grid = depth_k_table(one_carry(3), 1)
    for rule in BORDER_RULES:
        cells = {(int(i), int(j)) for i, j in zip(*np.nonzero(border_mask(grid, rule)))}
        # only the two cells where the carry region touches its boundary
        # from inside count; (2,2) has carrying neighbors both up and left
        assert cells == {(1, 2), (2, 1)}


def test_border_mask_origin_never_marked():
    grid = np.array([[1, 0], [0, 0]])
    for rule in BORDER_RULES:
        assert not border_mask(grid, rule)[0, 0]


def test_border_mask_rules_differ():
    # a cell whose up-neighbor matches but left-neighbor differs is a border
    # cell under "any" and interior under "all"
    grid = np.array([[0, 0, 0], [0, 1, 1], [0, 1, 1]])
    any_mask = border_mask(grid, "any")
    all_mask = border_mask(grid, "all")
    assert any_mask[2, 1] and not all_mask[2, 1]
    assert any_mask.sum() > all_mask.sum()


def test_border_mask_rejects_bad_input():
    with pytest.raises(ValueError):
        border_mask(np.zeros((3, 3)), "diagonal")
    with pytest.raises(ValueError):
        border_mask(np.zeros(9))


def test_box_dimension_one_carry_base3():
    for depth, want in ONE3_DIMS.items():
        for rule in BORDER_RULES:
            bd = box_dimension(one_carry(3), depth, rule=rule)
            assert bd.border_count == ONE3_BORDERS[depth]
            assert bd.estimate == pytest.approx(want, abs=1e-6)
            assert bd.unit == 1
            assert bd.estimate == pytest.approx(
                math.log(bd.border_count) / math.log(3 ** depth))


def test_box_dimension_empty_border_is_zero():
    zero = table_from_array(3, [[0] * 3] * 3)
    assert box_dimension(zero, 2).estimate == 0.0
    assert box_dimension(zero, 2).border_count == 0


def test_minimized_dimension_never_exceeds_plain():
    for b in (3, 4):
        for F in enumerate_carry_tables(b):
            for depth in (1, 2, 3):
                plain = box_dimension(F, depth)
                best = box_dimension(F, depth, minimize_over_orderings=True)
                assert best.estimate <= plain.estimate + 1e-12
                assert best.unit in units(b)


def test_minimizing_ordering_descrambles_u_carry():
    # the 3-carry in base 4 looks space filling under the standard order but
    # collapses to a clean staircase once digits are ranked by threes
    scrambled = box_dimension(u_carry(4, 3), 4)
    best = box_dimension(u_carry(4, 3), 4, minimize_over_orderings=True)
    assert scrambled.estimate > 1.25
    assert best.unit == 3
    assert best.estimate == pytest.approx(0.9993, abs=5e-4)


def test_depth4_dimension_separates_classes_base3():
    sv = box_dimension(one_carry(3), 4, minimize_over_orderings=True)
    low = box_dimension(table_by_id(3, 1), 4, minimize_over_orderings=True)
    assert sv.estimate == pytest.approx(0.9972, abs=5e-4)
    assert low.estimate == pytest.approx(1.4432, abs=5e-4)
    assert sv.estimate <= 1.1 < 1.25 <= low.estimate


def test_carry_frequency_one_carry_base3():
    F = one_carry(3)
    assert carry_frequency(F, 1) == pytest.approx(3 / 9)
    assert carry_frequency(F, 2) == pytest.approx(36 / 81)
    assert carry_frequency(F, 3) == pytest.approx(351 / 729)
    assert carry_frequency(F, 4) == pytest.approx(3240 / 6561)


def test_carry_frequency_depth_one_single_value():
    # a unit carry fires on (b-1)b/2 of the b^2 digit pairs
    for b in (3, 4, 5):
        for u in units(b):
            assert carry_frequency(u_carry(b, u), 1) == pytest.approx((b - 1) / (2 * b))


def test_carry_frequency_zero_table():
    zero = table_from_array(4, [[0] * 4] * 4)
    assert carry_frequency(zero, 3) == 0.0


def test_overall_carry_frequency():
    F = one_carry(3)
    assert overall_carry_frequency(F, max_depth=2) == pytest.approx(
        (3 / 9 + 36 / 81) / 2)
    assert overall_carry_frequency(F, max_depth=1) == carry_frequency(F, 1)
    with pytest.raises(ValueError):
        overall_carry_frequency(F, max_depth=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 4).flatmap(
    lambda b: st.tuples(st.just(b), st.integers(0, b ** (b - 2) - 1))))
def test_carry_frequency_in_unit_interval(args):
    b, tid = args
    f = carry_frequency(table_by_id(b, tid), 2)
    assert 0.0 <= f <= 1.0


def test_measure_report_shape():
    F = table_by_id(3, 1)
    r = measure_report(F, max_depth=3)
    assert r.base == 3
    assert r.table_id == 1
    assert [d.depth for d in r.per_depth] == [1, 2, 3]
    assert r.min_ordering_unit == r.per_depth[-1].min_ordering_unit
    assert r.overall_carry_frequency == pytest.approx(
        sum(d.carry_frequency for d in r.per_depth) / 3)
    assert r.at_depth(2) is r.per_depth[1]
    with pytest.raises(KeyError):
        r.at_depth(4)


def test_measure_report_depth_one_matches_raw_table():
    F = u_carry(4, 3)
    row = measure_report(F, max_depth=1).at_depth(1)
    assert row.border_count == box_dimension(F, 1).border_count
    assert row.carry_frequency == carry_frequency(F, 1)
    assert row.assoc.fraction == 1.0


def test_measure_report_deterministic():
    F = table_by_id(4, 9)
    assert measure_report(F, max_depth=2) == measure_report(F, max_depth=2)
