"""Pull-based names for points, compact sets and continuous curves.

A name is an infinite, deterministic stream.  Streams memoize what they have
produced, so ``name[i]`` is stable and two readers see the same prefix.

Point names enumerate dyadic boxes rather than every rational box.  Each
consumer only ever needs arbitrarily small boxes containing the point, which
the dyadic family supplies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Tuple

from .geometry import (
    RationalBox,
    RationalPoint,
    DimensionError,
    dist_sq,
    dyadic,
    dyadic_sq,
    rat,
)


class Stream:
    """Memoized infinite stream over a generator factory."""

    def __init__(self, factory: Callable[[], Iterator]):
        self._factory = factory
        self._it: Iterator | None = None
        self._cache: list = []

    def __getitem__(self, i: int):
        if i < 0:
            raise IndexError("streams are indexed from 0")
        if self._it is None:
            self._it = self._factory()
        while len(self._cache) <= i:
            self._cache.append(next(self._it))
        return self._cache[i]

    def __iter__(self):
        for i in itertools.count():
            yield self[i]

    def prefix(self, n: int) -> list:
        return [self[i] for i in range(n)]

    @property
    def pulled(self) -> int:
        return len(self._cache)


# -- points ------------------------------------------------------------------


class PointName(Stream):
    """Stream of rational boxes, each containing the named point."""

    def __init__(self, factory: Callable[[], Iterator[RationalBox]], dim: int):
        super().__init__(factory)
        self.dim = dim

    def approx(self, k: int, limit: int | None = None) -> RationalBox:
        return point_approx(self, k, limit)


def _dyadic_intervals(c: Fraction, depth: int):
    """Dyadic intervals (a 2^-d, b 2^-d), b - a in {1, 2}, containing c."""
    scale = 1 << depth
    x = c * scale
    f = x.numerator // x.denominator
    out = []
    if x == f:
        out.append((f - 1, f + 1))
    else:
        out.extend([(f - 1, f + 1), (f, f + 1), (f, f + 2)])
    out.sort()
    return [(Fraction(a, scale), Fraction(b, scale)) for a, b in out]


def point_from_rational(q: RationalPoint) -> PointName:
    """Canonical name of a rational point, by depth then lexicographic order."""
    q = tuple(rat(c) for c in q)
    if not q:
        raise DimensionError("empty point")

    def gen():
        for depth in itertools.count():
            per_axis = [_dyadic_intervals(c, depth) for c in q]
            for combo in itertools.product(*per_axis):
                yield RationalBox.from_intervals(combo)

    return PointName(gen, len(q))


def point_from_boxes(source: Callable[[], Iterator[RationalBox]], dim: int) -> PointName:
    return PointName(source, dim)


def point_approx(p: PointName, k: int, limit: int | None = None) -> RationalBox:
    """First emitted box with squared diameter below 4^-k."""
    bound = dyadic_sq(k)
    for i in itertools.count():
        if limit is not None and i >= limit:
            from .budget import BudgetExhausted

            raise BudgetExhausted(f"point approximation at precision {k}", limit)
        box = p[i]
        if box.diam_sq() < bound:
            return box
    raise AssertionError("unreachable")


# -- compact sets --------------------------------------------------------------


@dataclass(frozen=True)
class Cover:
    boxes: Tuple[RationalBox, ...]

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("a cover needs at least one box")
        dims = {b.dim for b in self.boxes}
        if len(dims) != 1:
            raise DimensionError("cover boxes of mixed dimension")

    @property
    def dim(self) -> int:
        return self.boxes[0].dim

    def max_diam_sq(self) -> Fraction:
        return max(b.diam_sq() for b in self.boxes)

    def __len__(self) -> int:
        return len(self.boxes)

    def __iter__(self):
        return iter(self.boxes)


class CompactName(Stream):
    """Stream of minimal covers of a compact set.

    ``boxes_in(i, region)`` returns the boxes of cover ``i`` that meet the
    closure of ``region``; subclasses that know more about their covers can
    answer without materializing the whole cover.
    """

    def __init__(self, factory: Callable[[], Iterator[Cover]], dim: int,
                 bbox: RationalBox | None = None):
        super().__init__(factory)
        self.dim = dim
        self.bbox = bbox

    def boxes_in(self, i: int, region: RationalBox) -> List[RationalBox]:
        return [b for b in self[i].boxes if _closures_meet(b, region)]

    def index_finer_than(self, k: int, limit: int = 64) -> int:
        """Index of the first cover whose boxes all have diameter < 2^-k."""
        bound = dyadic_sq(k)
        for i in range(limit):
            if self.cover_diam_sq(i) < bound:
                return i
        from .budget import BudgetExhausted

        raise BudgetExhausted(f"cover finer than 2^-{k}", limit)

    def cover_diam_sq(self, i: int) -> Fraction:
        return self[i].max_diam_sq()


def _closures_meet(a: RationalBox, b: RationalBox) -> bool:
    return all(
        max(x, z) <= min(y, w) for x, y, z, w in zip(a.lo, a.hi, b.lo, b.hi)
    )


def next_cover(c: CompactName, state: dict | None = None) -> Cover:
    """Pull the next cover; ``state`` carries the read position."""
    if state is None:
        state = c.__dict__.setdefault("_read_pos", {"i": 0})
    cov = c[state["i"]]
    state["i"] += 1
    return cov


# -- curves -------------------------------------------------------------------


@dataclass(frozen=True)
class PolygonalCurve:
    breakpoints: Tuple[Fraction, ...]
    vertices: Tuple[RationalPoint, ...]

    def __post_init__(self):
        bps = tuple(rat(t) for t in self.breakpoints)
        verts = tuple(tuple(rat(c) for c in v) for v in self.vertices)
        if len(bps) < 2 or len(bps) != len(verts):
            raise ValueError("need at least two breakpoints, one vertex each")
        if bps[0] != 0 or bps[-1] != 1:
            raise ValueError("breakpoints must run from 0 to 1")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if len({len(v) for v in verts}) != 1:
            raise DimensionError("vertices of mixed dimension")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "vertices", verts)

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def segments(self):
        return zip(self.breakpoints, self.breakpoints[1:], self.vertices, self.vertices[1:])

    def __call__(self, t) -> RationalPoint:
        return poly_eval(self, t)

    def lipschitz_sq(self) -> Fraction:
        """Squared maximal speed over the linear pieces."""
        best = Fraction(0)
        for t0, t1, q0, q1 in self.segments():
            dt = t1 - t0
            s = dist_sq(q0, q1) / (dt * dt)
            if s > best:
                best = s
        return best


def poly_eval(F: PolygonalCurve, t) -> RationalPoint:
    t = rat(t)
    if not 0 <= t <= 1:
        raise ValueError(f"parameter {t} outside [0, 1]")
    bps = F.breakpoints
    lo, hi = 0, len(bps) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bps[mid] <= t:
            lo = mid
        else:
            hi = mid
    t0, t1 = bps[lo], bps[hi]
    q0, q1 = F.vertices[lo], F.vertices[hi]
    s = (t - t0) / (t1 - t0)
    return tuple(a + s * (b - a) for a, b in zip(q0, q1))


def poly_dmax_sq(F: PolygonalCurve, G: PolygonalCurve) -> Fraction:
    """Exact squared sup distance; on each common piece the squared distance
    is a convex quadratic, so its maximum sits at a breakpoint."""
    if F.dim != G.dim:
        raise DimensionError("curves of different dimension")
    ts = sorted(set(F.breakpoints) | set(G.breakpoints))
    return max(dist_sq(poly_eval(F, t), poly_eval(G, t)) for t in ts)


class FunctionName(Stream):
    """Stream of polygonal curves F_0, F_1, ... with d_max(F_t, F_s) <= 2^-t."""

    def __init__(self, factory: Callable[[], Iterator[PolygonalCurve]], dim: int):
        super().__init__(factory)
        self.dim = dim


def check_cauchy(h: FunctionName, count: int) -> bool:
    curves = h.prefix(count)
    for t in range(count):
        bound = dyadic_sq(t)
        for s in range(t, count):
            if poly_dmax_sq(curves[t], curves[s]) > bound:
                return False
    return True


def exact_curve_name(curve: PolygonalCurve) -> FunctionName:
    """Name of a polygonal curve: F_t = curve for every t."""

    def gen():
        while True:
            yield curve

    return FunctionName(gen, curve.dim)


def _pad_exponent(dim: int) -> int:
    """Least c with dim * 4^-c < 1."""
    c = 0
    while dim * Fraction(1, 1 << (2 * c)) >= 1:
        c += 1
    return c


def func_eval(h: FunctionName, t: PointName, k: int) -> RationalBox:
    """Box of diameter < 2^-k containing h(t).

    Per-coordinate half-width r = 2^-(k+1+c) with dim * 4^-c < 1 keeps the
    diameter below 2^-k.  The approximant error 2^-j is r/4, and the t-box is
    narrowed until the curve moves less than r/4 across it.

    Names that carry their own ``evaluate`` (arc towers) answer directly.
    """
    direct = getattr(h, "evaluate", None)
    if direct is not None:
        return direct(t, k)
    c = _pad_exponent(h.dim)
    j = k + 3 + c
    r = dyadic(k + 1 + c)
    F = h[j]
    lip_sq = F.lipschitz_sq()
    quarter = r / 4
    for prec in itertools.count(k):
        tb = point_approx(t, prec)
        w = tb.hi[0] - tb.lo[0]
        if lip_sq * w * w < quarter * quarter:
            break
    tc = min(max(tb.center[0], Fraction(0)), Fraction(1))
    # h(t) is within 2^-j of F(t), and F(t) within lip * w / 2 of F(tc)
    return RationalBox.around(poly_eval(F, tc), r)
