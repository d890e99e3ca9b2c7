from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from staircase.flatsurf import (
    TOP,
    FlatSurfaceError,
    InvalidSpec,
    NonPeriodic,
    StaircaseSpec,
    area_total,
    build_pillowcase,
    build_rect_marked,
    build_staircase,
    check_invariants,
    dumps,
    isomorphic,
    loads,
    polydisk_act,
    rot,
    shear,
    stratum,
    trace_vertical,
    twist_candidates,
    vertex_classes,
)

Q4 = F(1, 4)


def gauss_bonnet(surface):
    return sum(stratum(surface))


def test_rectangle_is_one_cylinder():
    s = build_staircase(a=1, b=0, c=0, p=F(1, 3), q=F(1, 3))
    assert len(s.cylinders) == 1
    cyl = s.cylinders[0]
    assert (cyl.circ, cyl.height, cyl.twist) == (2, 1, 0)
    # four pi-angle corners and two regular marked points (P3, P4 on the top edge)
    assert stratum(s) == (0, 0, -1, -1, -1, -1)


def test_staircase_stratum_and_area():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    assert stratum(s) == (1, 1, -1, -1, -1, -1, -1, -1)
    assert area_total(s) == F(7, 2)


def test_staircase_dimensions():
    s = build_staircase(a=2, b=1, c=1, p=Q4, q=F(1, 2))
    assert [c.circ for c in s.cylinders] == [2, F(3, 2), F(1, 2)]
    assert [c.height for c in s.cylinders] == [2, 1, 1]
    three_pi = [cls for cls in vertex_classes(s) if len(cls) == 3]
    assert len(three_pi) == 2


def test_staircase_labels_are_vertices():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    assert set(s.label_map) == {"P1", "P2", "P3", "P4", "P5", "P6", "Q1", "Q2"}
    assert check_invariants(s)["labels_on_vertices"]


def test_pillowcase_b_vertical_cylinders():
    s = build_pillowcase("b", [1, F(1, 2), F(3, 4)], [1, 1, 1])
    dec = trace_vertical(s)
    assert len(dec.cylinders) >= 2
    assert dec.area == area_total(s)


def test_pillowcase_c_equal_ends_has_two_vertical_cylinders():
    s = build_pillowcase("c", [F(1, 2), 1, F(1, 2)], [1, 1, 1])
    assert len(trace_vertical(s).cylinders) == 2


@pytest.mark.parametrize("kind,widths", [("b", [1, 1, F(3, 4)]), ("b", [1, 2, 1]), ("c", [1, F(1, 2), 1])])
def test_pillowcase_rejects_wrong_shape(kind, widths):
    with pytest.raises(InvalidSpec):
        build_pillowcase(kind, widths, [1, 1, 1])


def test_rect_marked_matches_staircase():
    assert build_rect_marked(1, F(1, 3), F(1, 5)) == build_staircase(StaircaseSpec(1, 0, 0, F(1, 3), F(1, 5)))


def test_rect_marked_top_arcs():
    s = build_rect_marked(2, Q4, F(1, 2))
    lengths = [g.length for g in s.circle(0, TOP)]
    assert lengths == [Q4, F(1, 2), Q4, Q4, F(1, 2), Q4]
    # each polygon edge appears twice: 2(1-p-q), 2q, 2p
    assert lengths[0] + lengths[5] == F(1, 2) and lengths[1] + lengths[4] == 1 and lengths[2] + lengths[3] == F(1, 2)


def test_act_identity_and_dehn_twist():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    assert polydisk_act(s, 1, (0, 1)) == s
    cyl = s.cylinders[1]
    assert polydisk_act(s, 1, (cyl.circ / cyl.height, 1)) == s


def test_act_scales_area():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    assert area_total(polydisk_act(s, 0, (0, 2))) == F(11, 2)
    t = s
    for j in range(3):
        t = polydisk_act(t, j, (0, 3))
    assert area_total(t) == 3 * area_total(s)


def test_act_rejects_lower_half_plane():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    with pytest.raises(FlatSurfaceError):
        polydisk_act(s, 0, (0, 0))


def test_rot_of_rectangle():
    s = build_staircase(a=1, b=0, c=0, p=F(1, 3), q=F(1, 3))
    r = rot(s)
    assert area_total(r) == area_total(s)
    assert sum(c.height for c in r.cylinders) == 1
    assert all(c.circ == 2 for c in r.cylinders)


def test_rot_is_an_involution():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    assert isomorphic(rot(rot(s)), s)


def test_rot_circumferences_of_staircase():
    s = build_staircase(a=2, b=1, c=1, p=Q4, q=F(1, 2))
    r = rot(s)
    # twice the vertical edges a + b + c, a + b, a
    assert sorted(c.circ for c in r.cylinders) == [4, 6, 8]
    assert stratum(r) == stratum(s)


def test_trace_vertical_zero_twist_staircase():
    s = build_staircase(a=2, b=1, c=1, p=Q4, q=F(1, 2))
    dec = trace_vertical(s)
    assert len(dec.cylinders) == 3
    assert dec.area == area_total(s)


def test_trace_vertical_step_bound():
    s = shear(build_staircase(a=2, b=1, c=1, p=Q4, q=F(1, 2)), 1, F(1, 10**9 + 7))
    assert isinstance(trace_vertical(s, max_steps=10), NonPeriodic)


def test_shear_not_isomorphic():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    assert not isomorphic(shear(s, 1, F(1, 7)), s)


def test_twist_candidates_create_saddle_connections():
    s = build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)
    cands = twist_candidates(s, 1)
    assert cands == sorted(cands) and all(0 <= c < s.circ(1) for c in cands)


def test_json_round_trip_is_exact():
    s = shear(build_staircase(a=F(3, 7), b=F(2, 9), c=1, p=F(1, 5), q=F(2, 11)), 2, F(1, 13))
    text = dumps(s)
    assert loads(text) == s
    assert '"circ": "2/1"' in text


def test_json_rejects_broken_gluing():
    obj = loads(dumps(build_staircase(a=1, b=1, c=1, p=Q4, q=Q4)))
    text = dumps(obj).replace('"partner": 1,', '"partner": 2,', 1)
    with pytest.raises(FlatSurfaceError):
        loads(text)


small = st.fractions(min_value=F(1, 8), max_value=3, max_denominator=8)


@settings(max_examples=40, deadline=None)
@given(a=small, b=small, c=small, p=st.integers(1, 5), q=st.integers(1, 5), j=st.integers(0, 2), k=st.integers(1, 12))
def test_laws_on_random_staircases(a, b, c, p, q, j, k):
    s = build_staircase(a=a, b=b, c=c, p=F(p, 13), q=F(q, 13))
    assert gauss_bonnet(s) == -4
    cyl = s.cylinders[j]
    t = shear(s, j, cyl.circ * k / 12)
    assert gauss_bonnet(t) == -4 and all(check_invariants(t).values())
    assert area_total(t) == area_total(s)
    assert shear(s, j, cyl.circ) == s
