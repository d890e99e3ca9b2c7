from fractions import Fraction as F

import pytest

from staircase.flatsurf import area_total, build_pillowcase, build_staircase, shear, stratum
from staircase.surgery import (
    NotTypeB,
    NotTypeC,
    SurgeryTrace,
    is_staircase,
    pillow_type,
    reduce_pillow_b,
    reduce_pillow_c,
    replay,
    run,
)

STAIR = (1, 1, -1, -1, -1, -1, -1, -1)

B_CASES = [
    ([1, F(1, 2), F(3, 4)], [1, 1, 1]),
    ([1, F(1, 2), 1], [3, 2, 1]),
    ([F(3, 4), F(1, 3), F(2, 5)], [F(1, 2), F(1, 3), F(1, 7)]),
]
C_CASES = [
    ([F(1, 2), 1, F(1, 2)], [1, 1, 1]),
    ([F(1, 2), 1, F(3, 4)], [1, 1, 1]),
    ([F(1, 3), 1, F(1, 3)], [2, 1, F(1, 2)]),
]


def _check_trace(surface, out, trace):
    assert is_staircase(out)
    assert replay(trace) == out
    assert trace.scale_factor() == area_total(out) / area_total(surface)
    for step in trace.steps:
        assert stratum(step.surface) == STAIR
        assert all(step.checks.values()), (step.label, step.checks)


@pytest.mark.parametrize("widths,heights", B_CASES)
def test_reduce_pillow_b(widths, heights):
    s = build_pillowcase("b", widths, heights)
    out, trace = reduce_pillow_b(s)
    assert trace.script == "fig4"
    _check_trace(s, out, trace)


@pytest.mark.parametrize("widths,heights", C_CASES)
def test_reduce_pillow_c(widths, heights):
    s = build_pillowcase("c", widths, heights)
    out, trace = reduce_pillow_c(s)
    _check_trace(s, out, trace)


def test_equal_ends_take_the_long_script():
    _, long = reduce_pillow_c(build_pillowcase("c", [F(1, 2), 1, F(1, 2)], [1, 1, 1]))
    _, short = reduce_pillow_c(build_pillowcase("c", [F(1, 2), 1, F(3, 4)], [1, 1, 1]))
    assert long.script == "fig5" and short.script == "fig5-short"
    assert len(short.steps) < len(long.steps)


def test_ordered_heights_give_identity_step():
    s = build_pillowcase("b", [1, F(1, 2), F(3, 4)], [1, 2, 3])
    _, trace = reduce_pillow_b(s)
    ii = [st for st in trace.steps if st.label == "(ii)"]
    assert ii and all(st.op["op"] == "act" and st.op["im"] == "1/1" for st in ii)


def test_wrong_types_are_rejected():
    stair = build_staircase(a=1, b=1, c=1, p=F(1, 4), q=F(1, 4))
    with pytest.raises(NotTypeB):
        reduce_pillow_b(stair)
    with pytest.raises(NotTypeC):
        reduce_pillow_c(stair)
    with pytest.raises(NotTypeB):
        reduce_pillow_b(build_pillowcase("c", [F(1, 2), 1, F(1, 2)], [1, 1, 1]))


def test_pillow_type_and_is_staircase():
    stair = build_staircase(a=1, b=1, c=1, p=F(1, 4), q=F(1, 4))
    assert is_staircase(stair)
    assert not is_staircase(build_pillowcase("b", [1, F(1, 2), F(3, 4)], [1, 1, 1]))
    assert not is_staircase(shear(stair, 1, F(1, 8)))
    assert pillow_type(build_pillowcase("b", [1, F(1, 2), F(3, 4)], [1, 1, 1])) == "b"


def test_trace_json_round_trip():
    s = build_pillowcase("b", [1, F(1, 2), F(3, 4)], [1, 1, 1])
    out, trace = run("fig4", s)
    back = SurgeryTrace.from_json(trace.to_json())
    assert replay(back) == out
