"""Test continua with exactly decidable predicates.

Three families: polylines (finite connected graphs of rational segments),
grids of closed rational boxes, and circles with rational center and radius.
They serve as the set X for every construction and as ground truth.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .budget import BudgetExhausted
from .geometry import (
    DimensionError,
    RationalBox,
    RationalPoint,
    atoms,
    dist_sq,
    dyadic,
    dyadic_sq,
    point,
    point_box_gap_sq,
    rat,
)
from .names import CompactName, Cover, PolygonalCurve


class SetFormatError(ValueError):
    pass


# -- the continua ----------------------------------------------------------------


@dataclass(frozen=True)
class Polyline:
    vertices: Tuple[RationalPoint, ...]
    edges: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        verts = tuple(point(v) for v in self.vertices)
        if not verts:
            raise ValueError("polyline without vertices")
        if len({len(v) for v in verts}) != 1:
            raise DimensionError("vertices of mixed dimension")
        edges = tuple(tuple(e) for e in self.edges) or tuple(
            (i, i + 1) for i in range(len(verts) - 1)
        )
        for a, b in edges:
            if not (0 <= a < len(verts) and 0 <= b < len(verts)) or verts[a] == verts[b]:
                raise ValueError(f"bad edge {(a, b)}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        if not _connected(len(verts), edges):
            raise ValueError("polyline graph is not connected")

    @property
    def dim(self) -> int:
        return len(self.vertices[0])

    def segments(self):
        for a, b in self.edges:
            yield self.vertices[a], self.vertices[b]

    def is_tree(self) -> bool:
        return len(self.edges) == len(self.vertices) - 1


@dataclass(frozen=True)
class BoxGrid:
    """Union of closed rational boxes; the boxes are given by their open
    interiors but the set is their closure."""

    boxes: Tuple[RationalBox, ...]

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("empty box grid")
        if len({b.dim for b in self.boxes}) != 1:
            raise DimensionError("boxes of mixed dimension")
        n = len(self.boxes)
        adj = [
            (i, j)
            for i, j in itertools.combinations(range(n), 2)
            if _closed_boxes_meet(self.boxes[i], self.boxes[j])
        ]
        if not _connected(n, adj):
            raise ValueError("box grid union is not connected")

    @property
    def dim(self) -> int:
        return self.boxes[0].dim


@dataclass(frozen=True)
class Circle:
    center: RationalPoint
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", point(self.center))
        object.__setattr__(self, "radius", rat(self.radius))
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")
        if len(self.center) != 2:
            raise DimensionError("circles live in the plane")

    @property
    def dim(self) -> int:
        return 2


TestContinuum = Polyline | BoxGrid | Circle


def _connected(n: int, edges) -> bool:
    if n == 0:
        return False
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    todo = [0]
    while todo:
        u = todo.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    return len(seen) == n


def _closed_boxes_meet(a: RationalBox, b: RationalBox) -> bool:
    return all(max(x, z) <= min(y, w) for x, y, z, w in zip(a.lo, a.hi, b.lo, b.hi))


def hull(X: TestContinuum) -> Tuple[RationalPoint, RationalPoint]:
    """Closed axis-aligned hull [lo, hi] of X."""
    if isinstance(X, Polyline):
        cols = list(zip(*X.vertices))
    elif isinstance(X, BoxGrid):
        cols = list(zip(*[c for b in X.boxes for c in (b.lo, b.hi)]))
    else:
        r = X.radius
        return tuple(c - r for c in X.center), tuple(c + r for c in X.center)
    return tuple(min(c) for c in cols), tuple(max(c) for c in cols)


def bounding_box(X: TestContinuum) -> RationalBox:
    """Declared open bounding box: the hull padded by 1."""
    lo, hi = hull(X)
    return RationalBox(tuple(a - 1 for a in lo), tuple(b + 1 for b in hi))


# -- atom intersection -----------------------------------------------------------
# An atom is a tuple of (a, b) pairs; a == b pins the coordinate, a < b is an
# open interval.  Open boxes are atoms with no pinned coordinates.


def _segment_meets_atom(p, q, atom) -> bool:
    lo, lo_closed, hi, hi_closed = Fraction(0), True, Fraction(1), True
    for pi, qi, (a, b) in zip(p, q, atom):
        d = qi - pi
        if a == b:
            if d == 0:
                if pi != a:
                    return False
                continue
            s = (a - pi) / d
            if s > lo or (s == lo and lo_closed):
                lo, lo_closed = s, True
            else:
                return False
            if s < hi or (s == hi and hi_closed):
                hi, hi_closed = s, True
            else:
                return False
        else:
            if d == 0:
                if not a < pi < b:
                    return False
                continue
            s0, s1 = (a - pi) / d, (b - pi) / d
            if s0 > s1:
                s0, s1 = s1, s0
            if s0 >= lo:
                lo, lo_closed = s0, False
            if s1 <= hi:
                hi, hi_closed = s1, False
        if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
            return False
    return lo < hi or (lo == hi and lo_closed and hi_closed)


def _closed_box_meets_atom(box: RationalBox, atom) -> bool:
    for lo, hi, (a, b) in zip(box.lo, box.hi, atom):
        if a == b:
            if not lo <= a <= hi:
                return False
        elif not (a < hi and lo < b):
            return False
    return True


def _circle_meets_atom(X: Circle, atom) -> bool:
    lo = hi = Fraction(0)
    lo_closed = hi_closed = True
    for c, (a, b) in zip(X.center, atom):
        if a == b:
            v = (a - c) * (a - c)
            lo += v
            hi += v
            continue
        ea, eb = (a - c) * (a - c), (b - c) * (b - c)
        if a < c < b:
            hi += max(ea, eb)
        else:
            lo += min(ea, eb)
            lo_closed = False
            hi += max(ea, eb)
        hi_closed = False
    r2 = X.radius * X.radius
    above = lo < r2 or (lo == r2 and lo_closed)
    below = r2 < hi or (r2 == hi and hi_closed)
    return above and below


def meets_atom(X: TestContinuum, atom) -> bool:
    if isinstance(X, Polyline):
        return any(_segment_meets_atom(p, q, atom) for p, q in X.segments())
    if isinstance(X, BoxGrid):
        return any(_closed_box_meets_atom(b, atom) for b in X.boxes)
    return _circle_meets_atom(X, atom)


def box_hits_set(X: TestContinuum, R: RationalBox) -> bool:
    if R.dim != X.dim:
        raise DimensionError("box and set of different dimension")
    return meets_atom(X, tuple(zip(R.lo, R.hi)))


# -- covering ----------------------------------------------------------------------


def _edge_param_interval(p, q, box: RationalBox):
    """Open interval of s with p + s(q - p) inside the open box, or None."""
    lo, hi = None, None
    for pi, qi, a, b in zip(p, q, box.lo, box.hi):
        d = qi - pi
        if d == 0:
            if not a < pi < b:
                return None
            continue
        s0, s1 = (a - pi) / d, (b - pi) / d
        if s0 > s1:
            s0, s1 = s1, s0
        lo = s0 if lo is None or s0 > lo else lo
        hi = s1 if hi is None or s1 < hi else hi
    if lo is None:
        return (Fraction(-1), Fraction(2))
    if lo >= hi:
        return None
    return (lo, hi)


def _unit_interval_covered(intervals) -> bool:
    cur = Fraction(0)
    while True:
        best = None
        for lo, hi in intervals:
            if lo < cur < hi and (best is None or hi > best):
                best = hi
        if best is None:
            return False
        if best > 1:
            return True
        cur = best


def covers_set(X: TestContinuum, C: Cover | Sequence[RationalBox]) -> bool:
    boxes = list(C.boxes if isinstance(C, Cover) else C)
    if any(b.dim != X.dim for b in boxes):
        raise DimensionError("cover and set of different dimension")
    if isinstance(X, Polyline):
        for p, q in X.segments():
            ivs = [iv for iv in (_edge_param_interval(p, q, b) for b in boxes) if iv]
            if not _unit_interval_covered(ivs):
                return False
        return True
    lo, hi = hull(X)
    # every atom of the hull left uncovered must miss X
    for atom in atoms(lo, hi, boxes):
        if any(_atom_in_open_box(atom, b) for b in boxes):
            continue
        if meets_atom(X, atom):
            return False
    return True


def _atom_in_open_box(atom, box: RationalBox) -> bool:
    for (a, b), lo, hi in zip(atom, box.lo, box.hi):
        if a == b:
            if not lo < a < hi:
                return False
        elif not (lo <= a and b <= hi):
            return False
    return True


# -- distances -------------------------------------------------------------------------


def _segment_dist_sq(p: RationalPoint, a: RationalPoint, b: RationalPoint) -> Fraction:
    d = tuple(y - x for x, y in zip(a, b))
    dd = sum(c * c for c in d)
    s = sum((pi - ai) * di for pi, ai, di in zip(p, a, d)) / dd
    s = min(max(s, Fraction(0)), Fraction(1))
    foot = tuple(ai + s * di for ai, di in zip(a, d))
    return dist_sq(p, foot)


def dist_to_set_sq(X: TestContinuum, p: RationalPoint) -> Fraction:
    p = point(p)
    if len(p) != X.dim:
        raise DimensionError("point and set of different dimension")
    if isinstance(X, Polyline):
        return min(_segment_dist_sq(p, a, b) for a, b in X.segments()) if X.edges else dist_sq(
            p, X.vertices[0]
        )
    if isinstance(X, BoxGrid):
        return min(point_box_gap_sq(p, b) for b in X.boxes)
    raise TypeError("circle distances are irrational; use dist_to_set_lt")


def dist_to_set_lt(X: TestContinuum, p: RationalPoint, eps) -> bool:
    """Exact decision of d(p, X) < eps."""
    p = point(p)
    eps = rat(eps)
    if not isinstance(X, Circle):
        return dist_to_set_sq(X, p) < eps * eps
    # |p - c| must lie in (r - eps, r + eps)
    D = dist_sq(p, X.center)
    if D >= (X.radius + eps) ** 2:
        return False
    lower = X.radius - eps
    return lower <= 0 or D > lower * lower


def on_set(X: TestContinuum, p: RationalPoint) -> bool:
    p = point(p)
    if isinstance(X, Circle):
        return dist_sq(p, X.center) == X.radius ** 2
    return dist_to_set_sq(X, p) == 0


# -- sampling and local connectivity ----------------------------------------------------


def _isqrt_ceil_ratio(num_sq: Fraction, unit_sq: Fraction) -> int:
    """Least N >= 1 with num_sq / N^2 <= unit_sq."""
    ratio = num_sq / unit_sq
    n = max(1, math.isqrt(ratio.numerator // ratio.denominator))
    while Fraction(n * n) < ratio:
        n += 1
    return n


def sample_graph(X: TestContinuum, depth: int):
    """Points of X at spacing <= 2^-depth, with adjacency along X.

    Adjacent samples are joined inside X by a straight segment (polylines,
    boxes) or by a short circular arc.
    """
    h = dyadic(depth)
    index: Dict[RationalPoint, int] = {}
    pts: List[RationalPoint] = []
    adj: List[set] = []

    def node(p):
        if p not in index:
            index[p] = len(pts)
            pts.append(p)
            adj.append(set())
        return index[p]

    def link(u, v):
        if u != v:
            adj[u].add(v)
            adj[v].add(u)

    if isinstance(X, Polyline):
        for v in X.vertices:
            node(v)
        for a, b in X.segments():
            n = _isqrt_ceil_ratio(dist_sq(a, b), h * h)
            prev = node(a)
            for i in range(1, n + 1):
                s = Fraction(i, n)
                cur = node(tuple(x + s * (y - x) for x, y in zip(a, b)))
                link(prev, cur)
                prev = cur
    elif isinstance(X, BoxGrid):
        for box in X.boxes:
            axes = []
            for a, b in zip(box.lo, box.hi):
                n = _isqrt_ceil_ratio((b - a) ** 2, h * h)
                axes.append([a + (b - a) * Fraction(i, n) for i in range(n + 1)])
            grid = {}
            for combo in itertools.product(*[range(len(ax)) for ax in axes]):
                grid[combo] = node(tuple(ax[i] for ax, i in zip(axes, combo)))
            for combo, u in grid.items():
                for d in range(len(axes)):
                    nb = combo[:d] + (combo[d] + 1,) + combo[d + 1:]
                    if nb in grid:
                        link(u, grid[nb])
    else:
        # rational points via u -> ((1 - u^2), 2u) / (1 + u^2), u in [-1, 1]
        n = _isqrt_ceil_ratio(Fraction(16), (h / X.radius) ** 2)
        half = []
        for i in range(-n, n + 1):
            u = Fraction(i, n)
            half.append(((1 - u * u) / (1 + u * u), 2 * u / (1 + u * u)))
        ring = half + [(-x, -y) for x, y in half[1:-1]] + [half[0]]
        cx, cy = X.center
        ids = [node((cx + X.radius * x, cy + X.radius * y)) for x, y in ring]
        for u, v in zip(ids, ids[1:]):
            link(u, v)
    return pts, [sorted(a) for a in adj]


class _Buckets:
    def __init__(self, pts, cell: Fraction):
        self.cell = cell
        self.map: Dict[tuple, list] = {}
        for i, p in enumerate(pts):
            self.map.setdefault(self._key(p), []).append(i)

    def _key(self, p):
        return tuple((c / self.cell).__floor__() for c in p)

    def near(self, p):
        base = self._key(p)
        for off in itertools.product((-1, 0, 1), repeat=len(base)):
            yield from self.map.get(tuple(b + o for b, o in zip(base, off)), ())


def ball_component(pts, adj, buckets: _Buckets, p_idx: int, radius_sq: Fraction):
    """Samples in the open ball around pts[p_idx], and the component of p."""
    p = pts[p_idx]
    inside = {i for i in buckets.near(p) if dist_sq(pts[i], p) < radius_sq}
    comp = {p_idx}
    todo = [p_idx]
    while todo:
        u = todo.pop()
        for v in adj[u]:
            if v in inside and v not in comp:
                comp.add(v)
                todo.append(v)
    return inside, comp


def derive_lc(X: TestContinuum, k: int, depth: int) -> int:
    """A local-connectivity value f(k) for X, certified on a sample grid.

    Samples in B(p, 2^-k) that fall outside p's sampled component must be at
    distance >= 2^-j from p; the least such j >= k is taken over all samples.
    A +2 slack is added whenever some ball actually disconnects.
    """
    if depth < k + 3:
        raise BudgetExhausted(f"sample depth {depth} too coarse for scale 2^-{k}")
    pts, adj = sample_graph(X, depth)
    buckets = _Buckets(pts, dyadic(k))
    r2 = dyadic_sq(k)
    worst = None
    for i in range(len(pts)):
        inside, comp = ball_component(pts, adj, buckets, i, r2)
        for q in inside - comp:
            d = dist_sq(pts[i], pts[q])
            if worst is None or d < worst:
                worst = d
    if worst is None:
        return k
    j = k
    while dyadic_sq(j) > worst:
        j += 1
    if depth < j + 2:
        raise BudgetExhausted(f"sample depth {depth} cannot certify LC value {j}")
    return j + 2


def lc_violations(X: TestContinuum, fk: int, k: int, depth: int, limit: int | None = None):
    """Sample pairs (p, q) with d(p, q) < 2^-fk whose q is not in p's sampled
    component of B(p, 2^-k) ∩ X."""
    pts, adj = sample_graph(X, depth)
    close = _Buckets(pts, dyadic(fk))
    r2 = dyadic_sq(k)
    near = min(dyadic_sq(fk), r2)
    bad = []
    order = range(len(pts)) if limit is None else range(0, len(pts), max(1, len(pts) // limit))
    for i in order:
        p = pts[i]
        targets = {q for q in close.near(p) if q != i and dist_sq(pts[q], p) < near}
        missing = targets - _reach_in_ball(pts, adj, i, r2, targets)
        bad.extend((p, pts[q]) for q in sorted(missing))
    return bad


def _reach_in_ball(pts, adj, start: int, radius_sq: Fraction, targets: set) -> set:
    """Targets reachable from ``start`` through samples in the open ball;
    the search stops as soon as all of them are found."""
    p = pts[start]
    seen = {start}
    found = set()
    todo = [start]
    while todo and len(found) < len(targets):
        u = todo.pop()
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if dist_sq(pts[v], p) < radius_sq:
                if v in targets:
                    found.add(v)
                todo.append(v)
    return found


def sample_points(X: TestContinuum, depth: int) -> List[RationalPoint]:
    return sample_graph(X, depth)[0]


# -- unique arcs in trees ---------------------------------------------------------------


def _param_on_segment(p, a, b):
    """s in [0, 1] with p = a + s (b - a), or None."""
    s = None
    for pi, ai, bi in zip(p, a, b):
        d = bi - ai
        if d == 0:
            if pi != ai:
                return None
            continue
        t = (pi - ai) / d
        if s is None:
            s = t
        elif s != t:
            return None
    if s is None or not 0 <= s <= 1:
        return None
    return s


def rational_length(sq: Fraction, bits: int = 48) -> Fraction:
    """sqrt(sq) when it is rational, otherwise a positive dyadic approximation."""
    num, den = sq.numerator, sq.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    scale = 1 << bits
    return Fraction(max(1, math.isqrt(num * scale * scale // den)), scale)


def unique_arc(X: Polyline, x, y) -> PolygonalCurve:
    """The arc from x to y in a tree-shaped polyline."""
    if not isinstance(X, Polyline) or not X.is_tree():
        raise ValueError("unique arcs need an acyclic polyline")
    x, y = point(x), point(y)
    if x == y:
        raise ValueError("endpoints coincide")
    verts = list(X.vertices)
    edges = list(X.edges)
    for p in (x, y):
        if p in verts:
            continue
        for ei, (a, b) in enumerate(edges):
            if _param_on_segment(p, verts[a], verts[b]) is not None:
                verts.append(p)
                edges[ei] = (a, len(verts) - 1)
                edges.append((len(verts) - 1, b))
                break
        else:
            raise ValueError(f"point {p} is not on the polyline")
    adj = [[] for _ in verts]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    src, dst = verts.index(x), verts.index(y)
    parent = {src: None}
    todo = deque([src])
    while todo:
        u = todo.popleft()
        for v in adj[u]:
            if v not in parent:
                parent[v] = u
                todo.append(v)
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    path.reverse()
    pts = [verts[i] for i in path]
    lengths = [rational_length(dist_sq(a, b)) for a, b in zip(pts, pts[1:])]
    total = sum(lengths)
    bps = [Fraction(0)]
    for ln in lengths[:-1]:
        bps.append(bps[-1] + ln / total)
    bps.append(Fraction(1))
    return PolygonalCurve(tuple(bps), tuple(pts))


def curve_diam_sq(F: PolygonalCurve) -> Fraction:
    """Squared diameter of a polygonal curve's image (max over vertex pairs)."""
    vs = F.vertices
    return max(dist_sq(a, b) for a, b in itertools.combinations_with_replacement(vs, 2))


# -- integer cell tests ----------------------------------------------------------------------
# Cell tests dominate cover generation.  Scaling the set by a common
# denominator D and the cell grid by 2^d turns every comparison into integer
# arithmetic: the cell prod (a 2^-d, (a+2) 2^-d) becomes prod (aD, (a+2)D).


def _lcm_denominators(values) -> int:
    D = 1
    for v in values:
        D = D * v.denominator // math.gcd(D, v.denominator)
    return D


class _ScaledSet:
    def __init__(self, X: TestContinuum):
        self.X = X
        if isinstance(X, Polyline):
            vals = [c for v in X.vertices for c in v]
        elif isinstance(X, BoxGrid):
            vals = [c for b in X.boxes for c in b.lo + b.hi]
        else:
            vals = list(X.center) + [X.radius]
        self.D = _lcm_denominators(vals)
        D = self.D

        def ints(vec):
            return tuple(int(c * D) for c in vec)

        if isinstance(X, Polyline):
            self.segs = [(ints(p), ints(q)) for p, q in X.segments()]
        elif isinstance(X, BoxGrid):
            self.boxes = [(ints(b.lo), ints(b.hi)) for b in X.boxes]
        else:
            self.center = ints(X.center)
            self.radius = int(X.radius * D)

    def hit(self, depth: int, a: tuple) -> bool:
        D, s = self.D, 1 << depth
        lo = [c * D for c in a]
        hi = [(c + 2) * D for c in a]
        X = self.X
        if isinstance(X, Polyline):
            for p, q in self.segs:
                if _int_segment_meets_box([c * s for c in p], [c * s for c in q], lo, hi):
                    return True
            return False
        if isinstance(X, BoxGrid):
            return any(
                all(bl * s < h and l < bh * s for bl, bh, l, h in zip(bl_, bh_, lo, hi))
                for bl_, bh_ in self.boxes
            )
        return _int_circle_meets_box([c * s for c in self.center], self.radius * s, lo, hi)


def _int_segment_meets_box(P, Q, lo, hi) -> bool:
    """Closed segment P->Q against the open box prod (lo, hi), all integers.

    Parameter bounds are kept as (numerator, positive denominator, closed).
    """
    ln, ld, lc = 0, 1, True
    hn, hd, hc = 1, 1, True
    for p, q, a, b in zip(P, Q, lo, hi):
        d = q - p
        if d == 0:
            if not a < p < b:
                return False
            continue
        if d > 0:
            n0, n1, den = a - p, b - p, d
        else:
            n0, n1, den = p - b, p - a, -d
        if n0 * ld >= ln * den:
            ln, ld, lc = n0, den, False
        if n1 * hd <= hn * den:
            hn, hd, hc = n1, den, False
        left, right = ln * hd, hn * ld
        if left > right or (left == right and not (lc and hc)):
            return False
    left, right = ln * hd, hn * ld
    return left < right or (left == right and lc and hc)


def _int_circle_meets_box(C, r, lo, hi) -> bool:
    mn = mx = 0
    for c, a, b in zip(C, lo, hi):
        ea, eb = (a - c) ** 2, (b - c) ** 2
        if not a < c < b:
            mn += min(ea, eb)
        mx += max(ea, eb)
    r2 = r * r
    # the open box's distance range to the center is (mn, mx) with mn attained
    # only when the center lies inside the box on every axis
    inside = all(a < c < b for c, a, b in zip(C, lo, hi))
    above = mn < r2 or (mn == r2 and inside)
    return above and r2 < mx


# -- names of catalog sets ---------------------------------------------------------------


class CatalogName(CompactName):
    """kappa_mc name of a catalog set: cover i is every dyadic double cell
    prod (a_j 2^-i, (a_j + 2) 2^-i) that meets X.

    Each double cell at depth i+1 lies inside one at depth i, so region
    queries refine only cells that meet both X and the region.
    """

    def __init__(self, X: TestContinuum):
        self.X = X
        bbox = bounding_box(X)
        super().__init__(self._covers, X.dim, bbox)
        self._hits: Dict[tuple, bool] = {}
        self._scaled = _ScaledSet(X)

    def _covers(self):
        for i in itertools.count():
            yield Cover(tuple(self.boxes_in(i, self.bbox)))

    @staticmethod
    def cell_box(depth: int, a: tuple) -> RationalBox:
        s = 1 << depth
        return RationalBox(tuple(Fraction(c, s) for c in a), tuple(Fraction(c + 2, s) for c in a))

    def _hit(self, depth: int, a: tuple) -> bool:
        key = (depth, a)
        got = self._hits.get(key)
        if got is None:
            got = self._scaled.hit(depth, a)
            self._hits[key] = got
        return got

    def cells_in(self, depth: int, region: RationalBox) -> List[tuple]:
        lo, hi = hull(self.X)
        roots = itertools.product(
            *[range(math.floor(a) - 2, math.ceil(b) + 1) for a, b in zip(lo, hi)]
        )
        level = {a for a in roots if self._meets(0, a, region) and self._hit(0, a)}
        for d in range(1, depth + 1):
            bounds = self._grid_bounds(d, region)
            nxt = set()
            for a in level:
                for c in itertools.product(*[
                    [y for y in (2 * x, 2 * x + 1, 2 * x + 2) if l <= y <= h]
                    for x, (l, h) in zip(a, bounds)
                ]):
                    if c not in nxt and self._hit(d, c):
                        nxt.add(c)
            level = nxt
        return sorted(level)

    @staticmethod
    def _grid_bounds(depth: int, region: RationalBox):
        """Integer bounds on cell indices whose closures meet closure(region)."""
        s = 1 << depth
        return [
            (math.ceil(lo * s) - 2, math.floor(hi * s)) for lo, hi in zip(region.lo, region.hi)
        ]

    @classmethod
    def _meets(cls, depth: int, a: tuple, region: RationalBox) -> bool:
        return all(l <= c <= h for c, (l, h) in zip(a, cls._grid_bounds(depth, region)))

    def boxes_in(self, i: int, region: RationalBox) -> List[RationalBox]:
        return [self.cell_box(i, a) for a in self.cells_in(i, region)]

    def cover_diam_sq(self, i: int) -> Fraction:
        w = Fraction(2, 1 << i)
        return self.dim * w * w


def catalog_name(X: TestContinuum) -> CatalogName:
    return CatalogName(X)


# -- standard sets and the set-file format -------------------------------------------------


def segment() -> Polyline:
    return Polyline(((0, 0), (1, 0)))


def l_polyline() -> Polyline:
    return Polyline(((0, 0), (1, 0), (1, 1)))


def u_polyline() -> Polyline:
    return Polyline(((0, 0), (1, 0), (1, 1), (0, 1)))


def unit_circle() -> Circle:
    return Circle((0, 0), 1)


def two_boxes() -> BoxGrid:
    return BoxGrid((RationalBox((0, 0), (1, 1)), RationalBox((1, 0), (2, 1))))


def _parse_rational(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise SetFormatError(f"rationals are encoded as strings, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise SetFormatError(f"bad rational {s!r}") from exc


def _parse_point(v) -> RationalPoint:
    if not isinstance(v, list) or not v:
        raise SetFormatError(f"bad point {v!r}")
    return tuple(_parse_rational(c) for c in v)


def set_from_json(doc) -> TestContinuum:
    if not isinstance(doc, dict) or "type" not in doc:
        raise SetFormatError("set description needs a 'type' field")
    kind = doc["type"]
    try:
        if kind == "polyline":
            verts = [_parse_point(v) for v in doc["vertices"]]
            edges = tuple(tuple(int(i) for i in e) for e in doc.get("edges", ()))
            return Polyline(tuple(verts), edges)
        if kind == "boxgrid":
            boxes = [
                RationalBox(_parse_point(b["lo"]), _parse_point(b["hi"])) for b in doc["boxes"]
            ]
            return BoxGrid(tuple(boxes))
        if kind == "circle":
            return Circle(_parse_point(doc["center"]), _parse_rational(doc["radius"]))
    except SetFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SetFormatError(str(exc)) from exc
    raise SetFormatError(f"unknown set type {kind!r}")


def load_set(path) -> TestContinuum:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SetFormatError(str(exc)) from exc
    return set_from_json(doc)


def fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def set_to_json(X: TestContinuum) -> dict:
    fp = lambda p: [fmt_rational(c) for c in p]  # noqa: E731
    if isinstance(X, Polyline):
        return {"type": "polyline", "vertices": [fp(v) for v in X.vertices],
                "edges": [list(e) for e in X.edges]}
    if isinstance(X, BoxGrid):
        return {"type": "boxgrid",
                "boxes": [{"lo": fp(b.lo), "hi": fp(b.hi)} for b in X.boxes]}
    return {"type": "circle", "center": fp(X.center), "radius": fmt_rational(X.radius)}
