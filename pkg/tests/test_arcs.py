from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcarc.arcs import (
    ChainTower,
    check_level,
    compact_from_param,
    endpoints,
    eval_tower,
    inverse_modulus,
    min_separation_sq,
    modulus_of,
    parametrize_arc,
    subinterval,
    tower_to_name,
)
from lcarc.budget import Budget, BudgetExhausted
from lcarc.catalog import (
    box_hits_set,
    catalog_name,
    covers_set,
    dist_to_set_sq,
    l_polyline,
    segment,
)
from lcarc.chains import ArcChain, ThroughMap, WitnessingChain, chain_diam_lt
from lcarc.connectivity import derived_lc
from lcarc.functions import identity
from lcarc.geometry import RationalBox, closure_dilation_in_dilation, dyadic, dyadic_sq, union_diam_lt
from lcarc.names import (
    PolygonalCurve,
    check_cauchy,
    exact_curve_name,
    func_eval,
    point_approx,
    point_from_rational,
    poly_eval,
)
from oracles import d2, hausdorff_lt

# steps used to materialize level 1 of the segment tower below
B3 = 131


def box(x0, y0, x1, y1):
    return RationalBox((F(x0), F(y0)), (F(x1), F(y1)))


def pname(*c):
    return point_from_rational(tuple(F(v) for v in c))


def segment_tower(budget):
    w = WitnessingChain(0, tuple(box(a, F(-1, 8), a + F(1, 2), F(1, 8)) for a in (F(-1, 8), F(1, 4), F(5, 8))))
    return ChainTower(
        catalog_name(segment()), identity(), ArcChain((w,)), budget,
        x=pname(0, 0), y=pname(1, 0),
        x_cert=box(F(-1, 16), F(-1, 16), F(1, 16), F(1, 16)),
        y_cert=box(F(15, 16), F(-1, 16), F(17, 16), F(1, 16)),
        depth=2,
    )


@pytest.fixture(scope="module")
def tower():
    T = segment_tower(Budget(10**8))
    T.level(5)
    return T


def test_subinterval_examples():
    unit = (F(0), F(1))
    assert subinterval(unit, 2, 1) == (0, F(1, 2))
    assert subinterval(unit, 3, 2) == (F(1, 3), F(2, 3))
    assert subinterval((F(1, 2), F(3, 4)), 2, 2) == (F(5, 8), F(3, 4))
    assert subinterval(unit, ThroughMap((0, 3)).blocks()[0], 3) == (F(2, 3), 1)
    with pytest.raises(ValueError):
        subinterval(unit, 2, 3)
    with pytest.raises(ValueError):
        subinterval(unit, 2, 0)


def test_level_one_within_b3():
    b = Budget(B3)
    T = segment_tower(b)
    T.level(1)
    assert b.steps_used == B3
    with pytest.raises(BudgetExhausted):
        segment_tower(Budget(B3 - 1)).level(1)


def test_levels_pass_invariants(tower):
    for j in range(1, 5):
        assert check_level(tower, j)
        assert chain_diam_lt(tower.chain(j), j - 1)


def test_intervals_tile(tower):
    for j in range(6):
        ivs = tower.intervals(j)
        assert len(ivs) == tower.chain(j).l
        assert ivs[0][0] == 0 and ivs[-1][1] == 1
        assert all(a < b for a, b in ivs)
        assert all(p[1] == q[0] for p, q in zip(ivs, ivs[1:]))
        if j:
            parents = tower.intervals(j - 1)
            tmap = tower.through(j)
            for i, (a, b) in enumerate(ivs, 1):
                pa, pb = parents[tmap.block_of(i) - 1]
                assert pa <= a < b <= pb


DYADIC_T = [F(i, 32) for i in range(32)]


def test_nesting_and_shrinkage(tower):
    for t in DYADIC_T + [F(1)]:
        for j in range(4):
            fine = tower.S(j + 1, t, t, closed=True)
            coarse = tower.S(j, t, t, closed=True)
            assert fine and coarse
            assert all(any(closure_dilation_in_dilation(u, v) for v in coarse) for u in fine)
            assert union_diam_lt(fine, max(j - 1, 0))


def test_eval_tower_examples(tower):
    assert eval_tower(tower, pname(0), 3).contains_point((0, 0))
    assert eval_tower(tower, pname(1), 3).contains_point((1, 0))
    b = eval_tower(tower, pname(F(1, 2)), 3)
    assert b.diam_sq() < F(1, 64)
    assert box_hits_set(segment(), b)
    assert dist_to_set_sq(segment(), b.center) < F(1, 64)
    with pytest.raises(ValueError):
        eval_tower(tower, pname(2), 2)


def test_tower_name(tower):
    h = tower_to_name(tower)
    assert check_cauchy(h, 5)
    assert hausdorff_lt(h[3].vertices, [(F(0), F(0)), (F(1), F(0))], F(1, 4), F(1, 64))
    for j in range(5):
        assert d2(poly_eval(h[j], F(0)), (0, 0)) < dyadic_sq(j + 1)
        assert d2(poly_eval(h[j], F(1)), (1, 0)) < dyadic_sq(j + 1)
    assert func_eval(h, pname(F(1, 4)), 2).diam_sq() < F(1, 16)


LINE = PolygonalCurve((F(0), F(1)), ((F(0), F(0)), (F(1), F(0))))
DIAG = PolygonalCurve((F(0), F(1)), ((F(0), F(0)), (F(1), F(1))))
ELL = PolygonalCurve((F(0), F(1, 2), F(1)), ((F(0), F(0)), (F(1), F(0)), (F(1), F(1))))
BACK = PolygonalCurve((F(0), F(1, 2), F(1)), ((F(0), F(0)), (F(1), F(0)), (F(0), F(0))))
POINT = PolygonalCurve((F(0), F(1)), ((F(1, 3), F(1, 3)), (F(1, 3), F(1, 3))))


def test_modulus_examples():
    m = modulus_of(exact_curve_name(LINE))
    # least m with 2^-m * 1 < 2^-(k+1)
    assert [m(k) for k in range(5)] == [k + 2 for k in range(5)]
    assert all(modulus_of(exact_curve_name(POINT))(k) == 0 for k in range(5))
    m2 = modulus_of(exact_curve_name(ELL))
    assert all(m2(k) >= k + 2 and 2 * dyadic(m2(k)) < dyadic(k + 1) for k in range(5))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.fractions(min_value=0, max_value=1, max_denominator=64),
       st.fractions(min_value=0, max_value=1, max_denominator=64))
def test_modulus_valid_on_ell(k, s, t):
    m = modulus_of(exact_curve_name(ELL))(k)
    if abs(s - t) <= dyadic(m):
        assert d2(poly_eval(ELL, s), poly_eval(ELL, t)) < dyadic_sq(k)


def test_inverse_modulus_examples():
    m1 = inverse_modulus(exact_curve_name(LINE), Budget(1000))
    assert all(m1(k) >= k for k in range(6))
    assert min_separation_sq(DIAG, F(1, 8)) == 2 * F(1, 64)
    assert min_separation_sq(LINE, F(1, 4)) == F(1, 16)
    assert min_separation_sq(LINE, F(2)) is None
    with pytest.raises(BudgetExhausted):
        inverse_modulus(exact_curve_name(BACK), Budget(20))(2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=2, max_size=5),
       st.integers(1, 4))
def test_min_separation_below_grid_min(pts, e):
    n = len(pts)
    curve = PolygonalCurve(tuple(F(i, n - 1) for i in range(n)),
                           tuple((F(a, 4), F(b, 4)) for a, b in pts))
    delta = dyadic(e)
    got = min_separation_sq(curve, delta)
    grid = [F(i, 48) for i in range(49)]
    sampled = min(
        d2(poly_eval(curve, s), poly_eval(curve, t))
        for s in grid for t in grid if t - s >= delta
    )
    assert got is not None and got <= sampled


def test_inverse_modulus_valid_on_ell():
    m1 = inverse_modulus(exact_curve_name(ELL), Budget(1000))
    grid = [F(i, 64) for i in range(65)]
    for k in range(4):
        r = dyadic_sq(m1(k))
        for s in grid:
            for t in grid:
                if d2(poly_eval(ELL, s), poly_eval(ELL, t)) < r:
                    assert abs(s - t) < dyadic(k)


def test_compact_from_param(tower):
    A = compact_from_param(tower_to_name(tower))
    for j in range(3):
        cov = A[j]
        assert covers_set(segment(), cov)
        assert all(box_hits_set(segment(), b) for b in cov)
        assert cov.max_diam_sq() < dyadic_sq(j)
    assert A.index_finer_than(3) <= 3


def test_endpoints_segment():
    x, y = endpoints(catalog_name(segment()), identity(), Budget(10**8))
    ends = [point_approx(x, 4), point_approx(y, 4)]
    truth = [(F(0), F(0)), (F(1), F(0))]
    assert any(all(b.contains_point(p) for b, p in zip(ends, order)) for order in (truth, truth[::-1]))
    assert all(b.diam_sq() < dyadic_sq(4) for b in ends)
    assert not ends[0].intersects(ends[1])


def test_parametrize_segment():
    h = parametrize_arc(catalog_name(segment()), identity(), Budget(10**8))
    assert check_cauchy(h, 4)
    assert hausdorff_lt(h[3].vertices, [(F(0), F(0)), (F(1), F(0))], F(1, 8), F(1, 128))


def test_parametrize_l_polyline():
    Lp = l_polyline()
    h = parametrize_arc(catalog_name(Lp), derived_lc(Lp), Budget(10**8))
    ends = {func_eval(h, pname(t), 2) for t in (0, 1)}
    for v in [(0, 0), (1, 1)]:
        assert any(b.contains_point(v) for b in ends)
