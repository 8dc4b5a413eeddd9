import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcarc.budget import Budget, BudgetExhausted
from lcarc.catalog import catalog_name, covers_set, l_polyline, segment, u_polyline
from lcarc.geometry import RationalBox, dyadic, dyadic_sq
from lcarc.lebesgue import dyadic_upper_exp, fits_with_margin, lebesgue_number
from oracles import grid_pair_violations, in_open_box, tree_samples


def box(x0, y0, x1, y1):
    return RationalBox((F(x0), F(y0)), (F(x1), F(y1)))


SEG_COVER = [box(F(-1, 4), F(-1, 4), F(5, 8), F(1, 4)), box(F(3, 8), F(-1, 4), F(5, 4), F(1, 4))]


def reference_lebesgue(X, C):
    """Same search on plain Fractions, with delta a dyadic upper bound on diam(S)."""
    for i in itertools.count():
        boxes = X[i].boxes
        if all(any(fits_with_margin(S, S.diam_sq(), R) for R in C) for S in boxes):
            m = min(S.diam_sq() for S in boxes)
            L = 0
            while dyadic_sq(L) >= m:
                L += 1
            return L


def violations(X, C, L):
    pts = [p for p, _ in tree_samples(X.vertices, X.edges, dyadic(L + 3))]
    return grid_pair_violations(pts, C, dyadic(L))


def test_segment_cover_example():
    X = segment()
    L = lebesgue_number(catalog_name(X), SEG_COVER, Budget(10**5))
    assert not violations(X, SEG_COVER, L)
    assert not violations(X, SEG_COVER, L + 1)


def test_separating_pair_forces_two():
    p, q = (F(7, 20), F(0)), (F(13, 20), F(0))
    assert not any(in_open_box(p, R.lo, R.hi) and in_open_box(q, R.lo, R.hi) for R in SEG_COVER)
    # (3/10)^2 sits between 4^-2 and 4^-1, so 2^-L <= 3/10 forces L >= 2
    assert dyadic_sq(2) < F(9, 100) < dyadic_sq(1)
    L = lebesgue_number(catalog_name(segment()), SEG_COVER, Budget(10**5))
    assert L >= 2


def test_single_box_cover():
    X = catalog_name(segment())
    b = Budget(10**5)
    L = lebesgue_number(X, [box(-8, -8, 8, 8)], b)
    # the first pulled cover already fits
    assert b.steps_used == 1 + len(X[0].boxes)
    assert not violations(segment(), [box(-8, -8, 8, 8)], L)


def test_budget_exhaustion():
    with pytest.raises(BudgetExhausted):
        lebesgue_number(catalog_name(segment()), SEG_COVER, Budget(3))


def test_empty_cover_rejected():
    with pytest.raises(ValueError):
        lebesgue_number(catalog_name(segment()), [], Budget(10))


@pytest.mark.parametrize("make", [segment, l_polyline, u_polyline])
@pytest.mark.parametrize("level", [0, 1, 2])
def test_integer_route_matches_reference(make, level):
    X = make()
    name = catalog_name(X)
    C = name[level].boxes
    got = lebesgue_number(catalog_name(X), C, Budget(10**6))
    assert got == reference_lebesgue(catalog_name(X), C)
    assert not violations(X, C, got)


coord = st.fractions(min_value=-2, max_value=3, max_denominator=16)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(coord, coord), min_size=1, max_size=4))
def test_random_covers_agree(cuts):
    # strips across the segment cut at random places, plus an overlap so they cover
    xs = sorted({F(-1, 4), F(5, 4)} | {min(max(a, F(-1, 8)), F(9, 8)) for a, _ in cuts})
    C = [box(a - F(1, 16), F(-1, 4), b + F(1, 16), F(1, 4)) for a, b in zip(xs, xs[1:])]
    assert covers_set(segment(), C)
    got = lebesgue_number(catalog_name(segment()), C, Budget(10**6))
    assert got == reference_lebesgue(catalog_name(segment()), C)
    assert not violations(segment(), C, got)


def test_dyadic_upper_exp():
    assert dyadic_upper_exp(F(1, 4)) == 1
    assert dyadic_upper_exp(F(1, 5)) == 1
    assert dyadic_upper_exp(F(1, 3)) == 0
    assert dyadic_upper_exp(F(4)) == -1
    assert dyadic_upper_exp(F(5)) == -2
    with pytest.raises(ValueError):
        dyadic_upper_exp(F(0))


@given(st.fractions(min_value=F(1, 10**6), max_value=10**4))
def test_dyadic_upper_exp_property(q):
    e = dyadic_upper_exp(q)
    two = lambda k: F(1, 2**k) if k >= 0 else F(2**-k)  # noqa: E731
    assert two(e) ** 2 >= q > two(e + 1) ** 2


def test_fits_with_margin_examples():
    S = box(0, 0, F(1, 4), F(1, 4))
    assert fits_with_margin(S, F(1, 64), box(F(-1, 8), F(-1, 8), F(3, 8), F(3, 8)))
    assert fits_with_margin(S, F(1, 64), box(F(-1, 8), F(-1, 8), F(3, 8), F(3, 8) - F(1, 1000))) is False
    assert not fits_with_margin(S, F(1, 16), box(F(-1, 8), F(-1, 8), F(3, 8), F(3, 8)))
