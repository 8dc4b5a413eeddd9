import itertools
import random
from fractions import Fraction as F

import pytest

from lcarc.budget import Budget, BudgetExhausted
from lcarc.catalog import catalog_name, covers_set, segment
from lcarc.chains import (
    EXHAUSTED,
    ArcChain,
    ThroughMap,
    WitnessingChain,
    chain_diam_lt,
    check_arc_chain,
    check_witnessing,
    enum_arc_chains,
    enum_witnessing,
    goes_straight_through,
    is_simple_chain,
    marked,
    through_map_from_sets,
)
from lcarc.functions import identity
from lcarc.geometry import RationalBox, point_box_gap_sq

# steps of the fixed schedule needed to reach the target chains on the segment
B1 = 92
B2 = 310

SEG = segment()
ID = identity()


def box(x0, y0, x1, y1):
    return RationalBox((F(x0), F(y0)), (F(x1), F(y1)))


def link(m, *boxes):
    return WitnessingChain(m, tuple(boxes))


def hbox(a, b, h):
    return box(a, -h, b, h)


def test_check_witnessing_examples():
    r1 = box(0, F(-1, 16), F(3, 16), F(1, 16))
    r2 = box(F(1, 8), F(-1, 16), F(5, 16), F(1, 16))
    assert check_witnessing(link(2, r1, r2), ID, SEG)
    assert not check_witnessing(link(4, r1, r2), ID, SEG)
    r3 = box(F(1, 4), F(-1, 16), F(7, 16), F(1, 16))
    assert not check_witnessing(link(2, r1, r3), ID, SEG)


def test_check_witnessing_certificate_must_hit():
    r1 = box(0, 0, F(3, 16), F(1, 8))
    r2 = box(F(1, 8), 0, F(5, 16), F(1, 8))
    # the overlap lies strictly above the segment
    assert not check_witnessing(link(2, r1, r2), ID, SEG)


def test_witnessing_validation():
    with pytest.raises(ValueError):
        WitnessingChain(0, ())
    with pytest.raises(ValueError):
        WitnessingChain(-1, (box(0, 0, 1, 1),))


def test_check_arc_chain_examples():
    w = link(2, box(0, F(-1, 16), F(3, 16), F(1, 16)), box(F(1, 8), F(-1, 16), F(5, 16), F(1, 16)))
    assert check_arc_chain(ArcChain((w,)), ID, SEG)
    far = link(2, box(F(3, 4), F(-1, 16), F(15, 16), F(1, 16)))
    assert not check_arc_chain(ArcChain((w, far)), ID, SEG)
    a = link(3, hbox(0, F(1, 4), F(1, 16)))
    b = link(3, hbox(F(3, 16), F(7, 16), F(1, 16)))
    c = link(3, hbox(F(3, 8), F(5, 8), F(1, 16)))
    assert check_arc_chain(ArcChain((a, b, c)), ID, SEG) is False
    # moving the third link away by 1/4 makes the chain simple
    d = link(3, hbox(F(5, 8), F(7, 8), F(1, 16)))
    assert is_simple_chain((a, b, d))


def test_valid_three_link_chain():
    # pieces 1/4 wide with radius 1/32 and gaps of 1/8 between 1 and 3
    a = link(5, hbox(0, F(1, 4), F(1, 32)))
    b = link(5, hbox(F(7, 32), F(15, 32), F(1, 32)))
    c = link(5, hbox(F(7, 16), F(11, 16), F(1, 32)))
    f = lambda m: 1  # noqa: E731
    assert check_arc_chain(ArcChain((a, b, c)), f, SEG)


def test_chain_diam_examples():
    p = ArcChain((link(4, box(0, 0, F(1, 8), F(1, 8))),))
    assert chain_diam_lt(p, 1)
    assert not chain_diam_lt(p, 2)
    for k in range(3, 8):
        assert not chain_diam_lt(p, k)


def test_enum_witnessing_first_passes():
    X = catalog_name(SEG)
    first = next(enum_witnessing(X, ID, Budget(1000)))
    assert check_witnessing(first, ID, SEG)


def test_enum_witnessing_b1():
    X = catalog_name(SEG)
    b = Budget(B1)
    target = None
    for w in enum_witnessing(X, ID, b):
        if w.k == 1 and w.m == 1 and w.first.contains_point((F(1, 2), F(0))):
            target = w
            break
    assert target is not None
    assert b.steps_used == B1


def test_enum_witnessing_sound_distinct_deterministic():
    X = catalog_name(SEG)
    got = list(marked(enum_witnessing(X, ID, Budget(400))))
    assert got[-1] is EXHAUSTED
    chains = got[:-1]
    assert len(chains) > 20
    assert len(set(chains)) == len(chains)
    assert all(check_witnessing(w, ID, SEG) for w in chains)
    again = list(itertools.islice(enum_witnessing(catalog_name(SEG), ID, Budget(400)), len(chains)))
    assert again == chains


def test_enum_raises_without_marker():
    with pytest.raises(BudgetExhausted):
        list(enum_witnessing(catalog_name(SEG), ID, Budget(30)))


def test_enum_arc_chains_b2():
    X = catalog_name(SEG)
    b = Budget(B2)
    found = None
    seen = []
    for p in enum_arc_chains(X, ID, b):
        seen.append(p)
        if p.l == 2 and covers_set(SEG, [r for w in p.links for r in w.boxes]):
            found = p
            break
    assert found is not None and b.steps_used == B2
    assert len(set(seen)) == len(seen)
    assert all(check_arc_chain(p, ID, SEG) for p in seen)


def test_enum_arc_chains_on_name_mode():
    # the same emissions checked against the name, not the set
    X = catalog_name(SEG)
    ps = list(itertools.islice(enum_arc_chains(X, ID, Budget(200)), 15))
    assert all(check_arc_chain(p, ID, catalog_name(SEG), Budget(10**5)) for p in ps)


COARSE = ArcChain((
    link(3, hbox(F(-1, 8), F(5, 8), F(1, 8))),
    link(3, hbox(F(3, 8), F(9, 8), F(1, 8))),
))
FINE_X = [(F(-1, 16), F(1, 4)), (F(3, 16), F(17, 32)), (F(1, 2), F(13, 16)), (F(3, 4), F(17, 16))]


def fine(xs, h=F(1, 16), m=6):
    return ArcChain(tuple(link(m, hbox(a, b, h)) for a, b in xs))


def test_through_map_example():
    assert check_arc_chain(COARSE, lambda m: 0, SEG)
    assert check_arc_chain(fine(FINE_X), lambda m: 1, SEG)
    tm = goes_straight_through(fine(FINE_X), COARSE)
    assert tm == ThroughMap((0, 2, 4))
    assert [list(r) for r in tm.blocks()] == [[1, 2], [3, 4]]
    assert [tm.block_of(j) for j in (1, 2, 3, 4)] == [1, 1, 2, 2]


def test_through_map_refusals():
    assert goes_straight_through(COARSE, COARSE) is None
    over = FINE_X[:3] + [(F(3, 4), F(5, 4))]
    assert goes_straight_through(fine(over), COARSE) is None
    # a single fine link per coarse link is too short a block
    assert goes_straight_through(fine([FINE_X[0], FINE_X[3]]), COARSE) is None


def test_through_map_from_sets():
    assert through_map_from_sets([{1}, {1, 2}, {1, 2}, {2}], 2) == ThroughMap((0, 2, 4))
    assert through_map_from_sets([{1}, {1}, {1}, {2}], 2) is None
    assert through_map_from_sets([{2}, {2}, {1}, {1}], 2) is None
    assert through_map_from_sets([{1}, {1}, {2}, {2}, {2}], 2) == ThroughMap((0, 2, 5))
    with pytest.raises(ValueError):
        ThroughMap((0, 2, 2))
    with pytest.raises(ValueError):
        ThroughMap((1, 2))


# rational points on the unit circle from Pythagorean triples
DIRS = sorted({
    (F(sx * a, c), F(sy * b, c))
    for a, b, c in [(3, 4, 5), (4, 3, 5), (5, 12, 13), (12, 5, 13), (8, 15, 17), (1, 0, 1), (0, 1, 1)]
    for sx in (1, -1) for sy in (1, -1)
})


def boundary_samples(R, r, rng, n):
    """Points at distance exactly r from a corner of R, or on the dilated faces."""
    out = []
    for _ in range(n):
        if rng.random() < 0.5:
            c = rng.choice(list(R.corners()))
            d = rng.choice(DIRS)
            out.append((c[0] + r * d[0], c[1] + r * d[1]))
        else:
            t = F(rng.randrange(65), 64)
            x = R.lo[0] + t * (R.hi[0] - R.lo[0])
            y = rng.choice((R.lo[1] - r, R.hi[1] + r))
            out.append((x, y))
    return out


def test_through_map_soundness_fuzz():
    rng = random.Random(7)
    checked = 0
    for trial in range(40):
        s = F(rng.randrange(-4, 5), 64)
        xs = [(a + s, b + s) for a, b in FINE_X]
        p0 = fine(xs, h=F(rng.randrange(1, 5), 64))
        tm = goes_straight_through(p0, COARSE)
        if tm is None:
            continue
        for j, w in enumerate(p0.links, 1):
            coarse = COARSE.links[tm.block_of(j) - 1].regions()
            for v in w.regions():
                for q in boundary_samples(v.base, v.radius, rng, 4):
                    assert any(point_box_gap_sq(q, u.base) < u.radius ** 2 for u in coarse)
                    checked += 1
    assert checked >= 500
