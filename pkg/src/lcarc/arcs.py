"""Arc parametrizations from towers of nested arc chains, and back.

A tower is a sequence of arc chains, each narrowly going straight through the
previous one.  The through maps cut [0, 1] into nested interval families, and
h(t) is the single point left in the nested V-regions over the intervals
containing t.
"""

from __future__ import annotations

import bisect
import itertools
from fractions import Fraction
from typing import Iterator, List, Optional, Tuple

from .budget import Budget, BudgetExhausted
from .catalog import _segment_meets_atom
from .chains import ArcChain, HitOracle, ThroughMap, chain_diam_lt
from .construct import Level, box_in_dilation, covering_chain, refine
from .functions import LcFunction, ModulusOfContinuity
from .geometry import (
    BoxIndex,
    RationalBox,
    bounding_box,
    box_gap_sq,
    dist_sq,
    dyadic,
    dyadic_sq,
)
from .names import (
    CompactName,
    Cover,
    FunctionName,
    PointName,
    PolygonalCurve,
    _pad_exponent,
    point_approx,
)

Interval = Tuple[Fraction, Fraction]


def subinterval(parent: Interval, block, position: int) -> Interval:
    """Piece ``position`` (1-based) of ``parent`` cut into len(block) equal parts."""
    d = block if isinstance(block, int) else len(block)
    if not 1 <= position <= d:
        raise ValueError(f"position {position} outside 1..{d}")
    a, b = parent
    step = (b - a) / d
    return (a + (position - 1) * step, a + position * step)


def diam_exponent(chain: ArcChain, cap: int = 256) -> int:
    """Largest e <= cap with diam(chain) < 2^-e, or -1 if even e = 0 fails."""
    e = -1
    while e < cap and chain_diam_lt(chain, e + 1):
        e += 1
    return e


class ChainTower:
    """Lazily materialized tower of arc chains over a compact name.

    With endpoint names every level carries endpoint certificates.  A
    covering tower instead asks every level to cover the whole set; its
    limit curve then runs between the set's endpoints.
    """

    def __init__(self, X: CompactName, f, base: ArcChain, budget: Budget, *,
                 x: PointName | None = None, y: PointName | None = None,
                 x_cert: RationalBox | None = None, y_cert: RationalBox | None = None,
                 depth: int = 0, oracle: HitOracle | None = None):
        if (x is None) != (y is None):
            raise ValueError("give both endpoint names or neither")
        self.X, self.f, self.budget = X, f, budget
        self.x, self.y = x, y
        self.oracle = oracle or HitOracle(X)
        self.levels: List[Level] = [Level(base, None, x_cert, y_cert, depth)]
        self.targets: List[int] = [diam_exponent(base)]
        unit = (Fraction(0), Fraction(1))
        self._intervals: List[List[Interval]] = [
            [subinterval(unit, base.l, i) for i in range(1, base.l + 1)]
        ]

    @property
    def covering(self) -> bool:
        return self.x is None

    def level(self, j: int) -> Level:
        while len(self.levels) <= j:
            n = len(self.levels)
            prev = self.levels[-1]
            target = max(n, self.targets[-1] + 1)
            try:
                lev = refine(self.X, self.f, prev.chain, target, self.budget, self.oracle,
                             self.x, self.y, min_depth=prev.depth + 1)
            except BudgetExhausted as exc:
                raise BudgetExhausted(f"tower level {n} ({exc.what})", exc.steps) from exc
            self.levels.append(lev)
            self.targets.append(target)
        return self.levels[j]

    def chain(self, j: int) -> ArcChain:
        return self.level(j).chain

    def through(self, j: int) -> ThroughMap:
        """Map of level j into level j - 1 (j >= 1)."""
        if j < 1:
            raise ValueError("level 0 has no through map")
        return self.level(j).through

    def intervals(self, j: int) -> List[Interval]:
        while len(self._intervals) <= j:
            n = len(self._intervals)
            tmap = self.through(n)
            parents = self._intervals[-1]
            out = []
            for parent, block in zip(parents, tmap.blocks()):
                out.extend(subinterval(parent, block, p) for p in range(1, len(block) + 1))
            self._intervals.append(out)
        return self._intervals[j]

    def containing(self, j: int, lo: Fraction, hi: Fraction, closed: bool = False) -> List[int]:
        """0-based indices of level-j intervals meeting (lo, hi), or [lo, hi]
        when ``closed``."""
        ivs = self.intervals(j)
        starts = [a for a, _ in ivs]
        i = max(0, bisect.bisect_left(starts, lo) - 1)
        out = []
        while i < len(ivs) and ivs[i][0] <= hi:
            a, b = ivs[i]
            if (a <= hi and lo <= b) if closed else (a < hi and lo < b):
                out.append(i)
            i += 1
        return out

    def S(self, j: int, lo: Fraction, hi: Fraction, closed: bool = False):
        """Dilated pieces of S_{I,j}: the union of V_{j,i} over intervals meeting I."""
        chain = self.chain(j)
        return [v for i in self.containing(j, lo, hi, closed) for v in chain.links[i].regions()]


def check_level(tower: ChainTower, j: int) -> bool:
    """The tower invariants at level j >= 1."""
    from .chains import check_arc_chain

    lev = tower.level(j)
    prev = tower.level(j - 1)
    chain = lev.chain
    if not check_arc_chain(chain, tower.f, tower.oracle):
        return False
    if not chain_diam_lt(chain, j - 1):
        return False
    tmap = lev.through
    if tmap is None or tmap.t[-1] != chain.l or len(tmap.t) - 1 != prev.chain.l:
        return False
    if any(len(b) < 2 for b in tmap.blocks()):
        return False
    from .chains import containment_sets

    sets = containment_sets(chain, prev.chain)
    for i, block in enumerate(tmap.blocks(), 1):
        if any(i not in sets[k - 1] for k in block):
            return False
    if tower.covering:
        return True
    first, last = chain.links[0].regions(), chain.links[-1].regions()
    return any(box_in_dilation(lev.x_cert, v) for v in first) and any(
        box_in_dilation(lev.y_cert, v) for v in last
    )


def eval_tower(tower: ChainTower, tparam: PointName, k: int) -> RationalBox:
    """Box of diameter < 2^-k containing h(t): the bounding box of S_{I,j}
    for a narrow approximation I of t, at the first level j where it is
    small enough."""
    bound = dyadic_sq(k)
    for j in itertools.count():
        tower.budget.spend("evaluating a tower")
        if not chain_diam_lt(tower.chain(j), k + 1):
            continue
        ivs = tower.intervals(j)
        shortest = min(b - a for a, b in ivs)
        p = 0
        while dyadic(p) >= shortest / 2:
            p += 1
        tb = point_approx(tparam, p)
        boxes = [tower.chain(j).links[i].bbox() for i in tower.containing(j, tb.lo[0], tb.hi[0])]
        if not boxes:
            raise ValueError("parameter outside [0, 1]")
        box = bounding_box(boxes)
        if box.diam_sq() < bound:
            return box
    raise AssertionError("unreachable")


def level_curve(tower: ChainTower, L: int) -> PolygonalCurve:
    """Polygon through points of consecutive V_{L,i}: the first piece, each
    join certificate, the last piece.  It stays within diam(𝔭_L) of h."""
    chain = tower.chain(L)
    ivs = tower.intervals(L)
    bps = [Fraction(0)] + [b for _, b in ivs]
    verts = [chain.links[0].first.center]
    verts += [S.center for S in chain.certs()]
    verts.append(chain.links[-1].last.center)
    return PolygonalCurve(tuple(bps), tuple(verts))


def tower_to_name(tower: ChainTower) -> FunctionName:
    """delta_C name: F_j is the level curve of the first level of diameter
    < 2^-(j+1), so d_max(F_j, h) < 2^-(j+1) and d_max(F_j, F_s) <= 2^-j."""

    def gen():
        L = 0
        for j in itertools.count():
            while not chain_diam_lt(tower.chain(L), j + 1):
                L += 1
            yield level_curve(tower, L)

    name = FunctionName(gen, tower.X.dim)
    name.tower = tower
    name.evaluate = lambda t, k: eval_tower(tower, t, k)
    return name


# -- moduli ------------------------------------------------------------------------------------


def _ceil_exp(sq: Fraction) -> int:
    """Least e (any sign) with 4^e >= sq, so 2^e >= sqrt(sq)."""
    e = 0
    while Fraction(4) ** e < sq:
        e += 1
    while Fraction(4) ** (e - 1) >= sq:
        e -= 1
    return e


def modulus_of(h: FunctionName) -> ModulusOfContinuity:
    """m(k) from the slope of F_{k+2}: |s - t| <= 2^-m(k) gives
    d(h(s), h(t)) <= 2 * 2^-(k+2) + 2^-m(k) * slope < 2^-k."""

    def m(k: int) -> int:
        lam_sq = h[k + 2].lipschitz_sq()
        if lam_sq == 0:
            return 0
        return max(0, _ceil_exp(lam_sq) + k + 2)

    return ModulusOfContinuity(m, "slope")


def _clip(poly, delta):
    """Clip a convex polygon in the (s, t) plane to t - s >= delta."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = p[1] - p[0] - delta, q[1] - q[0] - delta
        if fp >= 0:
            out.append(p)
        if (fp >= 0) != (fq >= 0) and fp != fq:
            lam = fp / (fp - fq)
            out.append((p[0] + lam * (q[0] - p[0]), p[1] + lam * (q[1] - p[1])))
    dedup = []
    for v in out:
        if not dedup or dedup[-1] != v:
            dedup.append(v)
    if len(dedup) > 1 and dedup[0] == dedup[-1]:
        dedup.pop()
    return dedup


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _pair_min_sq(seg_s, seg_t, delta) -> Optional[Fraction]:
    """Exact min of |P(s) - Q(t)|^2 over the two pieces with t - s >= delta."""
    a0, a1, P0, P1 = seg_s
    b0, b1, Q0, Q1 = seg_t
    poly = _clip([(a0, b0), (a1, b0), (a1, b1), (a0, b1)], delta)
    if not poly:
        return None
    u = tuple((y - x) / (a1 - a0) for x, y in zip(P0, P1))
    v = tuple((y - x) / (b1 - b0) for x, y in zip(Q0, Q1))
    c = tuple(p - a0 * du - q + b0 * dv for p, q, du, dv in zip(P0, Q0, u, v))

    def D(s, t):
        return tuple(ci + s * ui - t * vi for ci, ui, vi in zip(c, u, v))

    best = None
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        D0 = D(*p)
        dD = tuple(x - y for x, y in zip(D(*q), D0))
        a = _dot(dD, dD)
        lam = Fraction(0)
        if a > 0:
            lam = min(max(-_dot(D0, dD) / a, Fraction(0)), Fraction(1))
        pt = tuple(x + lam * y for x, y in zip(D0, dD))
        val = _dot(pt, pt)
        if best is None or val < best:
            best = val
    uu, uv, vv = _dot(u, u), _dot(u, v), _dot(v, v)
    det = -uu * vv + uv * uv
    if det != 0:
        r1, r2 = -_dot(u, c), -_dot(v, c)
        s = (r1 * -vv - (-uv) * r2) / det
        t = (uu * r2 - uv * r1) / det
        if a0 <= s <= a1 and b0 <= t <= b1 and t - s >= delta:
            val = _dot(D(s, t), D(s, t))
            if val < best:
                best = val
    return best


def min_separation_sq(F: PolygonalCurve, delta: Fraction) -> Optional[Fraction]:
    """Exact min of |F(s) - F(t)|^2 over 0 <= s, t <= 1 with t - s >= delta;
    None when no such pair exists."""
    if delta > 1:
        return None
    segs = list(F.segments())
    best = None
    for t0 in F.breakpoints:
        if t0 + delta <= 1:
            v = dist_sq(F(t0), F(t0 + delta))
            best = v if best is None or v < best else best
    if best == 0:
        return best
    bboxes = [_seg_box(q0, q1) for _, _, q0, q1 in segs]
    reach = _dyadic_above_sqrt(best)
    index = BoxIndex(max(max(max(b.widths()) for b in bboxes), reach))
    for i, b in enumerate(bboxes):
        index.add(b, i)
    for i, seg in enumerate(segs):
        for _, j in index.query(bboxes[i].expand(reach)):
            if j < i or segs[j][1] - seg[0] < delta:
                continue
            if box_gap_sq(bboxes[i], bboxes[j]) >= best:
                continue
            v = _pair_min_sq(seg, segs[j], delta)
            if v is not None and v < best:
                best = v
    return best


def _seg_box(p, q) -> RationalBox:
    lo = tuple(min(a, b) for a, b in zip(p, q))
    hi = tuple(max(a, b) for a, b in zip(p, q))
    # widen degenerate axes so the box is a valid open box
    pad = Fraction(1, 1 << 40)
    return RationalBox(tuple(a - pad for a in lo), tuple(b + pad for b in hi))


def _dyadic_above_sqrt(sq: Fraction) -> Fraction:
    e = _ceil_exp(sq)
    return Fraction(2) ** e


def inverse_modulus(h: FunctionName, budget: Budget) -> ModulusOfContinuity:
    """m1(k): d(h(s), h(t)) < 2^-m1(k) forces |s - t| < 2^-k.

    The separation of h over |s - t| >= 2^-k is bounded below by that of
    F_J minus 2 * 2^-J; J grows until the bound is positive.
    """

    def m1(k: int) -> int:
        delta = dyadic(k)
        for J in itertools.count(k + 2):
            budget.spend("a certified separation bound")
            G = min_separation_sq(h[J], delta)
            if G is None:
                return 0
            slack = 2 * dyadic(J)
            if G > slack * slack:
                L = 0
                while (dyadic(L) + slack) ** 2 > G:
                    L += 1
                return L
        raise AssertionError("unreachable")

    return ModulusOfContinuity(m1, "separation")


def lc_from_param(h: FunctionName, budget: Budget) -> LcFunction:
    m = modulus_of(h)
    m1 = inverse_modulus(h, budget)
    return LcFunction(lambda k: m1(m(k)), "param")


def compact_from_param(h: FunctionName) -> CompactName:
    """Covers of the image: double cells of depth e (diameter < 2^-j) kept
    when F_{e+2} meets the cell shrunk by 2^-(e+2).  A kept cell then holds
    a point of the image, and every image point lies in a kept cell because
    each point sits half a grid step inside some double cell."""
    n = h.dim
    c = _pad_exponent(n)

    def covers():
        for j in itertools.count():
            e = j + 1 + c
            J = e + 2
            F = h[J]
            eps = dyadic(J)
            scale = 1 << e
            cells = set()
            for _, _, p, q in F.segments():
                ranges = [
                    range(_floor(min(a, b) * scale) - 2, _floor(max(a, b) * scale) + 1)
                    for a, b in zip(p, q)
                ]
                for a in itertools.product(*ranges):
                    if a in cells:
                        continue
                    atom = tuple(
                        (Fraction(x, scale) + eps, Fraction(x + 2, scale) - eps) for x in a
                    )
                    if _segment_meets_atom(p, q, atom):
                        cells.add(a)
            yield Cover(tuple(
                RationalBox(tuple(Fraction(x, scale) for x in a),
                            tuple(Fraction(x + 2, scale) for x in a))
                for a in sorted(cells)
            ))

    F0 = h[0]
    bbox = bounding_box(RationalBox.around(v, Fraction(2)) for v in F0.vertices)
    return CompactName(covers, n, bbox)


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


# -- endpoints and parametrization of an arc ---------------------------------------------------


class EndpointSearch:
    """Endpoint localization for an arc from its name and an LC function.

    Covering arc chains of diameter < 2^-g(k) are searched for growing k;
    T_1, T_2 collect the links within 2^-k of the first and of the last link.
    Once their bounding boxes R_1, R_2 are disjoint, each endpoint name lists
    R_j followed by the localizers of finer chains that fit inside R_j.
    """

    def __init__(self, A: CompactName, f, budget: Budget, g=None):
        from .connectivity import ulac_function

        self.A, self.f, self.budget = A, f, budget
        self.g = g or ulac_function(A, f, budget)
        self.oracle = HitOracle(A)
        self._chains = {}
        self.k0: Optional[int] = None
        self.R: Optional[Tuple[RationalBox, RationalBox]] = None

    def chain(self, k: int):
        if k not in self._chains:
            self._chains[k] = covering_chain(self.A, self.f, self.g(k), self.budget, self.oracle)
        return self._chains[k]

    def localizers(self, k: int) -> Tuple[RationalBox, RationalBox]:
        chain, _ = self.chain(k)
        return localizer_box(chain, 1, k), localizer_box(chain, chain.l, k)

    def start(self) -> Tuple[RationalBox, RationalBox]:
        if self.R is None:
            for k in itertools.count():
                R1, R2 = self.localizers(k)
                if not R1.intersects(R2):
                    self.k0, self.R = k, (R1, R2)
                    break
        return self.R

    def boxes(self, which: int) -> Iterator[RationalBox]:
        R = self.start()[which]
        yield R
        for k in itertools.count(self.k0 + 1):
            inside = [T for T in self.localizers(k) if R.contains_box(T)]
            if len(inside) == 1:
                yield inside[0]

    def names(self) -> Tuple[PointName, PointName]:
        dim = self.A.dim
        return (PointName(lambda: self.boxes(0), dim), PointName(lambda: self.boxes(1), dim))


def localizer_links(chain: ArcChain, end: int, k: int) -> List[int]:
    """1-based i with d(closure V_end, closure V_i) < 2^-k."""
    ref = chain.links[end - 1]
    eps = dyadic(k)
    out = []
    for i, w in enumerate(chain.links, 1):
        if box_gap_sq(ref.bbox(), w.bbox()) >= eps * eps:
            continue
        if _closures_closer(ref, w, eps):
            out.append(i)
    return out


def _closures_closer(a, b, eps) -> bool:
    for u in a.regions():
        for v in b.regions():
            reach = eps + u.radius + v.radius
            if box_gap_sq(u.base, v.base) < reach * reach:
                return True
    return False


def localizer_box(chain: ArcChain, end: int, k: int) -> RationalBox:
    """Open bounding box of T_j(𝔭, k)."""
    return bounding_box(chain.links[i - 1].bbox() for i in localizer_links(chain, end, k))


def endpoints(A: CompactName, f, budget: Budget) -> Tuple[PointName, PointName]:
    return EndpointSearch(A, f, budget).names()


def parametrize_arc(A: CompactName, f, budget: Budget) -> FunctionName:
    """Name of a parametrization of the arc A, from h(0) in R_1 to h(1) in R_2.

    The covering chain that separated the endpoints starts a covering tower;
    each level covers A, so the limit curve is onto A and its ends are the
    endpoints.
    """
    search = EndpointSearch(A, f, budget)
    search.start()
    chain, depth = search.chain(search.k0)
    tower = ChainTower(A, f, chain, budget, depth=depth, oracle=search.oracle)
    name = tower_to_name(tower)
    name.endpoints = search.names()
    return name
