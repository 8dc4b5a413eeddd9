"""Exact rational geometry: points, open boxes and dilated box regions.

Every predicate here is decided over the rationals.  Distances are never
materialized; comparisons are made between squared quantities and squared
dyadic thresholds, so strict inequalities stay strict.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

Rational = Fraction
RationalPoint = Tuple[Fraction, ...]


class DimensionError(ValueError):
    pass


def rat(value) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a canonical Fraction.

    Floats are rejected: the core never touches binary floating point.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact value {value!r}")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot convert {value!r} to a rational")


def point(*coords) -> RationalPoint:
    if len(coords) == 1 and isinstance(coords[0], (tuple, list)):
        coords = tuple(coords[0])
    if not coords:
        raise DimensionError("a point needs at least one coordinate")
    return tuple(rat(c) for c in coords)


def dyadic(k: int) -> Fraction:
    """The scale 2^-k."""
    if k < 0:
        raise ValueError("dyadic exponents are natural numbers")
    return Fraction(1, 1 << k)


def dyadic_sq(k: int) -> Fraction:
    return Fraction(1, 1 << (2 * k))


def _check_dims(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise DimensionError(f"dimension mismatch: {len(a)} vs {len(b)}")


@dataclass(frozen=True)
class RationalBox:
    """Open box prod (lo_i, hi_i) with rational corners."""

    lo: RationalPoint
    hi: RationalPoint

    def __post_init__(self):
        lo = tuple(rat(c) for c in self.lo)
        hi = tuple(rat(c) for c in self.hi)
        _check_dims(lo, hi)
        if not lo:
            raise DimensionError("a box needs at least one coordinate")
        if any(a >= b for a, b in zip(lo, hi)):
            raise ValueError(f"empty box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_intervals(cls, intervals: Iterable[Tuple]) -> "RationalBox":
        intervals = list(intervals)
        return cls(tuple(a for a, _ in intervals), tuple(b for _, b in intervals))

    @classmethod
    def around(cls, p: RationalPoint, radius: Fraction) -> "RationalBox":
        return cls(tuple(c - radius for c in p), tuple(c + radius for c in p))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> RationalPoint:
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))

    def widths(self) -> Tuple[Fraction, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    def corners(self) -> Iterable[RationalPoint]:
        return itertools.product(*zip(self.lo, self.hi))

    def diam_sq(self) -> Fraction:
        return sum((w * w for w in self.widths()), Fraction(0))

    def contains_point(self, p: RationalPoint) -> bool:
        _check_dims(self.lo, p)
        return all(a < c < b for a, c, b in zip(self.lo, p, self.hi))

    def contains_box(self, other: "RationalBox") -> bool:
        """Open-box inclusion other ⊆ self."""
        _check_dims(self.lo, other.lo)
        return all(
            a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def contains_closure(self, other: "RationalBox") -> bool:
        """closure(other) ⊆ self."""
        _check_dims(self.lo, other.lo)
        return all(
            a < c and d < b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def intersects(self, other: "RationalBox") -> bool:
        _check_dims(self.lo, other.lo)
        return all(
            max(a, c) < min(b, d) for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi)
        )

    def intersection(self, other: "RationalBox") -> "RationalBox | None":
        if not self.intersects(other):
            return None
        return RationalBox(
            tuple(max(a, c) for a, c in zip(self.lo, other.lo)),
            tuple(min(b, d) for b, d in zip(self.hi, other.hi)),
        )

    def expand(self, r: Fraction) -> "RationalBox":
        return RationalBox(tuple(a - r for a in self.lo), tuple(b + r for b in self.hi))

    def hull(self, other: "RationalBox") -> "RationalBox":
        return RationalBox(
            tuple(min(a, c) for a, c in zip(self.lo, other.lo)),
            tuple(max(b, d) for b, d in zip(self.hi, other.hi)),
        )

    def __repr__(self) -> str:
        parts = " x ".join(f"({a}, {b})" for a, b in zip(self.lo, self.hi))
        return f"Box[{parts}]"


def bounding_box(boxes: Iterable[RationalBox]) -> RationalBox:
    boxes = iter(boxes)
    acc = next(boxes)
    lo, hi = list(acc.lo), list(acc.hi)
    for b in boxes:
        for i in range(len(lo)):
            if b.lo[i] < lo[i]:
                lo[i] = b.lo[i]
            if b.hi[i] > hi[i]:
                hi[i] = b.hi[i]
    return RationalBox(tuple(lo), tuple(hi))


@dataclass(frozen=True)
class DilatedRegion:
    """The open Euclidean dilation B_{2^-m}(base)."""

    base: RationalBox
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("dilation exponent must be a natural number")

    @property
    def radius(self) -> Fraction:
        return dyadic(self.m)

    def bbox(self) -> RationalBox:
        """Smallest box containing the region (it is open, so this is exact)."""
        return self.base.expand(self.radius)


# -- metric primitives --------------------------------------------------------


def dist_sq(p: RationalPoint, q: RationalPoint) -> Fraction:
    _check_dims(p, q)
    return sum(((a - b) * (a - b) for a, b in zip(p, q)), Fraction(0))


def point_box_gap_sq(p: RationalPoint, box: RationalBox) -> Fraction:
    """Squared distance from p to the closure of box."""
    _check_dims(p, box.lo)
    total = Fraction(0)
    for c, a, b in zip(p, box.lo, box.hi):
        if c < a:
            total += (a - c) * (a - c)
        elif c > b:
            total += (c - b) * (c - b)
    return total


def box_gap_sq(r: RationalBox, s: RationalBox) -> Fraction:
    """Squared distance between the closures of two boxes."""
    _check_dims(r.lo, s.lo)
    total = Fraction(0)
    for a, b, c, d in zip(r.lo, r.hi, s.lo, s.hi):
        if b < c:
            total += (c - b) * (c - b)
        elif d < a:
            total += (a - d) * (a - d)
    return total


def box_span_sq(r: RationalBox, s: RationalBox) -> Fraction:
    """Squared maximum distance between points of the two closures."""
    _check_dims(r.lo, s.lo)
    total = Fraction(0)
    for a, b, c, d in zip(r.lo, r.hi, s.lo, s.hi):
        w = max(d - a, b - c)
        total += w * w
    return total


def dilations_intersect(v: DilatedRegion, w: DilatedRegion) -> bool:
    reach = v.radius + w.radius
    return box_gap_sq(v.base, w.base) < reach * reach


def closure_dilation_in_box(v: DilatedRegion, q: RationalBox) -> bool:
    """closure(B_r(R)) ⊆ Q, per coordinate on the dilated projections."""
    _check_dims(v.base.lo, q.lo)
    r = v.radius
    return all(
        qa < a - r and b + r < qb
        for a, b, qa, qb in zip(v.base.lo, v.base.hi, q.lo, q.hi)
    )


def closure_dilation_in_dilation(v: DilatedRegion, w: DilatedRegion) -> bool:
    """Sound test for closure(V) ⊆ W.

    A point of closure(V) is c + u with c in closure(V.base) and |u| <= r_V,
    so its distance to closure(W.base) is at most dist(c, W.base) + r_V.  The
    distance to a convex set is convex, hence maximal at a corner of V.base.
    Certification therefore asks every corner to lie strictly closer than
    r_W - r_V to closure(W.base).
    """
    margin = w.radius - v.radius
    if margin <= 0:
        return False
    bound = margin * margin
    return all(point_box_gap_sq(c, w.base) < bound for c in v.base.corners())


class Location(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    UNKNOWN = "unknown"


def locate_point(approx: RationalBox, v: DilatedRegion) -> Location:
    """Where a point known to lie in ``approx`` sits relative to ``v``."""
    r2 = v.radius * v.radius
    if all(point_box_gap_sq(c, v.base) < r2 for c in approx.corners()):
        return Location.INSIDE
    if box_gap_sq(approx, v.base) > r2:
        return Location.OUTSIDE
    return Location.UNKNOWN


def region_diam_lt(v: DilatedRegion, k: int) -> bool:
    """diam(B_e(R)) = diam(R) + 2e < 2^-k, with the guard 2^-k > 2e."""
    slack = dyadic(k) - 2 * v.radius
    if slack <= 0:
        return False
    return v.base.diam_sq() < slack * slack


def union_diam_lt(regions: Sequence[DilatedRegion], k: int) -> bool:
    """Exact decision of diam(⋃ regions) < 2^-k for equal-radius regions.

    The diameter of a union of dilations B_e(R_i) is max_ij span(R_i, R_j) + 2e.
    A bounding-box bound settles most cases before the pairwise scan.
    """
    radii = {v.m for v in regions}
    if len(radii) != 1:
        # mixed radii: use the largest radius, which is still exact per pair
        return all(
            _pair_span_lt(a, b, k) for a, b in itertools.combinations_with_replacement(regions, 2)
        )
    e = regions[0].radius
    slack = dyadic(k) - 2 * e
    if slack <= 0:
        return False
    bound = slack * slack
    hull = bounding_box(v.base for v in regions)
    if hull.diam_sq() < bound:
        return True
    corners = _extreme_corners(regions)
    for a, b in itertools.combinations(corners, 2):
        if dist_sq(a, b) >= bound:
            return False
    return all(v.base.diam_sq() < bound for v in regions)


def _pair_span_lt(a: DilatedRegion, b: DilatedRegion, k: int) -> bool:
    slack = dyadic(k) - a.radius - b.radius
    if slack <= 0:
        return False
    return box_span_sq(a.base, b.base) < slack * slack


def _extreme_corners(regions: Sequence[DilatedRegion]) -> list:
    seen = set()
    out = []
    for v in regions:
        for c in v.base.corners():
            if c not in seen:
                seen.add(c)
                out.append(c)
    return out


def closed_box_in_union(box_lo: Sequence[Fraction], box_hi: Sequence[Fraction],
                        union: Sequence[RationalBox]) -> bool:
    """Exact test: closed box [lo, hi] ⊆ union of open boxes.

    The closed box is cut along every union-box face into atoms (products of
    single points and open intervals).  Each atom is either inside a given
    open box or disjoint from it, so coverage is decided atom by atom.
    """
    for atom in atoms(box_lo, box_hi, union):
        if not any(atom_in_box(atom, u) for u in union):
            return False
    return True


def atoms(box_lo, box_hi, boxes: Sequence[RationalBox]):
    """Partition of the closed box [lo, hi] into cells cut by box faces.

    An atom is a tuple of (a, b) pairs: a == b is a single coordinate value,
    a < b an open interval.
    """
    pieces = []
    for i, (lo, hi) in enumerate(zip(box_lo, box_hi)):
        cuts = {lo, hi}
        for u in boxes:
            for c in (u.lo[i], u.hi[i]):
                if lo < c < hi:
                    cuts.add(c)
        cuts = sorted(cuts)
        axis = [(c, c) for c in cuts]
        axis += [(a, b) for a, b in zip(cuts, cuts[1:])]
        pieces.append(axis)
    return itertools.product(*pieces)


def atom_in_box(atom, box: RationalBox) -> bool:
    for (a, b), lo, hi in zip(atom, box.lo, box.hi):
        if a == b:
            if not lo < a < hi:
                return False
        elif not (lo <= a and b <= hi):
            return False
    return True


class BoxIndex:
    """Uniform-grid bucket index over boxes, for proximity queries."""

    def __init__(self, cell: Fraction):
        self.cell = cell
        self._buckets: dict = {}
        self.items: list = []

    def _keys(self, box: RationalBox):
        ranges = [
            range(int((a / self.cell).__floor__()), int((b / self.cell).__floor__()) + 1)
            for a, b in zip(box.lo, box.hi)
        ]
        return itertools.product(*ranges)

    def add(self, box: RationalBox, payload) -> None:
        idx = len(self.items)
        self.items.append((box, payload))
        for key in self._keys(box):
            self._buckets.setdefault(key, []).append(idx)

    def query(self, box: RationalBox):
        """Payloads of indexed boxes whose closures may meet closure(box)."""
        hits = set()
        for key in self._keys(box):
            hits.update(self._buckets.get(key, ()))
        for idx in sorted(hits):
            yield self.items[idx]
