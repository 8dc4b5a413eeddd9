from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcarc.geometry import (
    BoxIndex,
    DilatedRegion,
    DimensionError,
    Location,
    RationalBox,
    atoms,
    atom_in_box,
    box_gap_sq,
    box_span_sq,
    closed_box_in_union,
    closure_dilation_in_box,
    closure_dilation_in_dilation,
    dilations_intersect,
    dist_sq,
    dyadic,
    dyadic_sq,
    locate_point,
    point,
    point_box_gap_sq,
    rat,
    region_diam_lt,
    union_diam_lt,
)

sq = lambda a, b: RationalBox((a, a), (b, b))  # noqa: E731


def test_rat_and_point():
    assert rat("3/4") == F(3, 4)
    assert rat(2) == 2
    assert point("1/2", 0) == (F(1, 2), F(0))
    with pytest.raises((TypeError, ValueError)):
        rat(0.5)


def test_box_validation():
    with pytest.raises(ValueError):
        RationalBox((1, 0), (0, 1))
    with pytest.raises(DimensionError):
        RationalBox((0,), (1, 1))


def test_dist_sq_examples():
    assert dist_sq((0, 0), (3, 4)) == 25
    assert dist_sq((F(1, 3), 2), (F(1, 3), 2)) == 0
    assert dist_sq((F(1, 2), 0), (0, F(1, 2))) == F(1, 2)


def test_box_gap_examples():
    assert box_gap_sq(sq(0, 1), RationalBox((2, 0), (3, 1))) == 1
    assert box_gap_sq(sq(0, 2), sq(1, 3)) == 0
    assert box_gap_sq(sq(0, 1), sq(2, 3)) == 2


def test_box_span_examples():
    assert box_span_sq(sq(0, 1), sq(0, 1)) == 2
    assert box_span_sq(sq(0, 1), sq(2, 3)) == 18
    assert box_span_sq(sq(0, 1), RationalBox((1, 0), (2, 1))) == 5


def test_dilations_intersect_examples():
    v = DilatedRegion(sq(0, 1), 2)
    w = DilatedRegion(RationalBox((F(3, 2), 0), (2, 1)), 3)
    assert not dilations_intersect(v, w)
    # gap 1/2 equals 1/4 + 1/4: open regions stay apart
    assert not dilations_intersect(v, DilatedRegion(RationalBox((F(3, 2), 0), (2, 1)), 2))
    assert dilations_intersect(v, DilatedRegion(sq(F(1, 2), 2), 5))


def test_closure_in_box_examples():
    R = sq(F(1, 4), F(3, 4))
    assert closure_dilation_in_box(DilatedRegion(R, 3), sq(0, 1))
    assert not closure_dilation_in_box(DilatedRegion(R, 2), sq(0, 1))
    assert not closure_dilation_in_box(DilatedRegion(R, 3), sq(5, 6))


def test_closure_in_dilation_examples():
    v = DilatedRegion(sq(F(3, 8), F(5, 8)), 4)
    assert closure_dilation_in_dilation(v, DilatedRegion(sq(0, 1), 1))
    assert not closure_dilation_in_dilation(v, DilatedRegion(sq(2, 3), 1))
    assert not closure_dilation_in_dilation(v, v)


def test_locate_point_examples():
    v = DilatedRegion(sq(0, 1), 1)
    assert locate_point(sq(F(2, 5), F(3, 5)), v) is Location.INSIDE
    assert locate_point(sq(5, 6), v) is Location.OUTSIDE
    straddle = RationalBox((F(7, 5), F(2, 5)), (F(8, 5), F(3, 5)))
    assert locate_point(straddle, v) is Location.UNKNOWN


def test_region_diam():
    v = DilatedRegion(RationalBox((0, 0), (F(1, 8), F(1, 8))), 5)
    # diam = sqrt(2)/8 + 1/16 ~ 0.239 < 1/4
    assert region_diam_lt(v, 2)
    assert not region_diam_lt(v, 3)
    assert not region_diam_lt(DilatedRegion(sq(0, F(1, 1024)), 1), 0)


def test_union_diam_matches_pairwise():
    regions = [DilatedRegion(RationalBox((F(i, 8), 0), (F(i + 1, 8), F(1, 8))), 6) for i in range(4)]
    # span (0,0)-(1/2,1/8): sqrt(17)/8 ~ 0.515, plus 2/64
    assert union_diam_lt(regions, 0)
    assert not union_diam_lt(regions, 1)


def test_closed_box_in_union():
    U = [RationalBox((0, 0), (2, 2)), RationalBox((1, 1), (3, 3))]
    assert closed_box_in_union((F(1, 2), F(1, 2)), (F(5, 2), F(5, 2)), U) is False
    assert closed_box_in_union((F(1, 2), F(1, 2)), (F(3, 2), F(3, 2)), U)
    assert closed_box_in_union((F(3, 2), F(3, 2)), (F(5, 2), F(5, 2)), U)
    # the closed box touches the open boundary at x = 0
    assert not closed_box_in_union((0, F(1, 2)), (1, 1), U)


def test_box_index_finds_neighbours():
    idx = BoxIndex(F(1, 4))
    boxes = [sq(F(i, 8), F(i + 1, 8)) for i in range(8)]
    for i, b in enumerate(boxes):
        idx.add(b, i)
    got = {i for _, i in idx.query(sq(F(3, 8), F(4, 8)))}
    assert {2, 3, 4} <= got


small = st.fractions(min_value=-4, max_value=4, max_denominator=64)


@st.composite
def boxes(draw, dim=2):
    lo, hi = [], []
    for _ in range(dim):
        a, b = draw(small), draw(small)
        if a == b:
            b = a + F(1, 64)
        lo.append(min(a, b))
        hi.append(max(a, b))
    return RationalBox(tuple(lo), tuple(hi))


@given(boxes(), boxes())
def test_gap_symmetric_and_below_span(a, b):
    assert box_gap_sq(a, b) == box_gap_sq(b, a)
    assert box_gap_sq(a, b) <= box_span_sq(a, b)
    assert (box_gap_sq(a, b) == 0) == all(
        max(x, z) <= min(y, w) for x, y, z, w in zip(a.lo, a.hi, b.lo, b.hi)
    )


@given(boxes(), st.lists(small, min_size=2, max_size=2))
def test_point_gap_zero_iff_in_closure(b, p):
    p = tuple(p)
    inside = all(lo <= c <= hi for c, lo, hi in zip(p, b.lo, b.hi))
    assert (point_box_gap_sq(p, b) == 0) == inside


@given(boxes(), st.integers(0, 5), boxes())
def test_closure_in_box_is_sound(R, m, Q):
    # a certified inclusion puts every corner of the closed dilation bbox in Q
    v = DilatedRegion(R, m)
    if closure_dilation_in_box(v, Q):
        bb = v.bbox()
        assert all(Q.contains_point(c) for c in bb.corners())


@given(boxes(), st.integers(0, 4), boxes(), st.integers(0, 4))
def test_closure_in_dilation_is_sound(R, m, S, n):
    v, w = DilatedRegion(R, m), DilatedRegion(S, n)
    if closure_dilation_in_dilation(v, w):
        # every corner of closure(bbox-of-v) within reach of S is in W
        r = v.radius
        for c in R.corners():
            for dx in (-r, 0, r):
                for dy in (-r, 0, r):
                    if dx * dx + dy * dy <= r * r:
                        q = (c[0] + dx, c[1] + dy)
                        assert point_box_gap_sq(q, S) < w.radius ** 2


@settings(max_examples=60)
@given(boxes(), st.lists(boxes(), min_size=1, max_size=3))
def test_union_cover_agrees_with_atom_points(B, U):
    # brute force: the centre and endpoints of every atom
    got = closed_box_in_union(B.lo, B.hi, U)
    reps = []
    for atom in atoms(B.lo, B.hi, U):
        reps.append(tuple((a + b) / 2 for a, b in atom))
    expect = all(any(u.contains_point(p) for u in U) for p in reps)
    assert got == expect


@given(st.integers(0, 40))
def test_dyadic(k):
    assert dyadic(k) == F(1, 2**k)
    assert dyadic_sq(k) == F(1, 4**k)


@given(boxes(), st.integers(0, 5), st.integers(0, 5))
def test_diam_monotone_in_k(R, m, k):
    v = DilatedRegion(R, m)
    if region_diam_lt(v, k + 1):
        assert region_diam_lt(v, k)
    assert union_diam_lt([v], k) == region_diam_lt(v, k)


def test_atom_in_box_singletons():
    box = sq(0, 1)
    # (a, a) is the single value a, (a, b) with a < b the open interval
    assert atom_in_box(((F(0), F(0)), (F(1, 4), F(3, 4))), box) is False
    assert atom_in_box(((F(1, 2), F(1, 2)), (F(0), F(1))), box)
    assert atom_in_box(((F(1, 2), F(1, 2)), (F(1, 4), F(3, 4))), box)
