import math

import pytest

from staircase.probe import (
    OutOfRange,
    eval_F,
    family_target,
    locate_st,
    nonsmooth_scan,
    solve_base,
)

A0, P0, Q0 = 1.0, 1 / 3, 1 / 3


def test_family_target():
    assert family_target(1, 1 / 3, 1 / 3, 0, 0).values() == (1, 0, 0, 1 / 3, 1 / 3)
    assert family_target(1, 1 / 3, 1 / 3, 1e-3, 0).values() == (1, 0, 0, 1 / 3 - 1e-3, 1 / 3)
    with pytest.raises(OutOfRange):
        family_target(1, 1 / 3, 1 / 3, 1 / 3, 0)
    with pytest.raises(OutOfRange):
        family_target(1, 1 / 3, 1 / 3, -1e-3, 0)


def test_locate_degenerate():
    base = solve_base(A0, P0, Q0, 0, 0).config
    loc = locate_st(base, P0, Q0)
    assert (loc.s, loc.t) == (0.0, 0.0)


def test_locate_small_offsets():
    base = solve_base(A0, P0, Q0, 1e-4, 1e-4).config
    loc = locate_st(base, P0, Q0)
    assert loc.residual < 1e-8 and loc.s > 0 and loc.t > 0
    # the leading-order guess overshoots by the 1/ln corrections
    for got, guess in ((loc.s, loc.guess[0]), (loc.t, loc.guess[1])):
        assert 0.5 < got / guess < 1.0


def test_located_s_increases_with_y():
    x = 1e-4
    s_vals = []
    for y in (0.0, 5e-5, 1e-4):
        base = solve_base(A0, P0, Q0, x, y).config
        s_vals.append(float(locate_st(base, P0, Q0).s))
    assert s_vals[0] < s_vals[1] < s_vals[2]


def test_F_at_origin_is_a0():
    v = eval_F(A0, P0, Q0, 0.0, 0.0)
    assert abs(float(v.F) - A0) < 1e-12


def test_F_grows_along_x():
    for k in (8, 10, 12, 14, 16):
        assert float(eval_F(A0, P0, Q0, 2.0**-k, 0.0).F) > A0


def test_F_continuous_on_symmetric_base():
    h = 1e-4
    f0 = float(eval_F(A0, P0, Q0, h, h).F)
    f1 = float(eval_F(A0, P0, Q0, h * (1 + 1e-6), h).F)
    assert abs(f1 - f0) < 1e-6 * (f0 - A0) + 1e-12


def test_scan_structure():
    scan = nonsmooth_scan(A0, P0, Q0, 8, 12, with_delta=False)
    assert [row["k"] for row in scan.table] == list(range(8, 13))
    assert not scan.excluded
    assert abs(float(scan.samples[0].F) - A0) < 1e-12
    assert scan.control_flat
    assert scan.D_fit["c"] > 0
    assert all(math.isfinite(row["D_over_h2"]) for row in scan.table)
    assert len(list(scan.csv_rows())) == 5


def test_scan_range_checked():
    with pytest.raises(OutOfRange):
        nonsmooth_scan(A0, P0, Q0, 8, 20)
