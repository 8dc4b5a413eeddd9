"""Computable Lebesgue numbers for finite rational-box covers of a compact set."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

from .budget import Budget
from .geometry import RationalBox, dyadic, dyadic_sq
from .names import CompactName, Cover


def dyadic_upper_exp(sq: Fraction) -> int:
    """Largest e (possibly negative) with 4^-e >= sq, so 2^-e >= sqrt(sq)."""
    if sq <= 0:
        raise ValueError("need a positive squared length")
    e = 0
    while _pow2(e) ** 2 < sq:
        e -= 1
    while _pow2(e + 1) ** 2 >= sq:
        e += 1
    return e


def _pow2(e: int) -> Fraction:
    return dyadic(e) if e >= 0 else Fraction(1 << -e)


def fits_with_margin(S: RationalBox, delta_sq: Fraction, R: RationalBox) -> bool:
    """B_delta(S) ⊆ R for open boxes, with delta given by its square.

    The dilation's projections are (lo - delta, hi + delta), so the test is
    per coordinate: each face gap must be at least delta.
    """
    for lo, hi, rl, rh in zip(S.lo, S.hi, R.lo, R.hi):
        a, b = lo - rl, rh - hi
        if a < 0 or b < 0 or a * a < delta_sq or b * b < delta_sq:
            return False
    return True


class _ScaledCover:
    """The cover C on an integer grid, bucketed so a box S only needs the
    bucket of its lower corner: any R containing S contains that corner."""

    def __init__(self, C: Sequence[RationalBox]):
        self.boxes = list(C)
        self.D = math.lcm(*(q.denominator for b in self.boxes for q in b.lo + b.hi))
        self._scaled = {}

    def at_scale(self, M: int):
        """(lo, hi) integer tuples at scale M (a multiple of D) and buckets."""
        if M not in self._scaled:
            ints = [
                (tuple(int(q * M) for q in b.lo), tuple(int(q * M) for q in b.hi))
                for b in self.boxes
            ]
            size = max(max(h - l for l, h in zip(lo, hi)) for lo, hi in ints) or 1
            buckets: dict = {}
            for lo, hi in ints:
                ranges = [range(l // size, h // size + 1) for l, h in zip(lo, hi)]
                for key in itertools.product(*ranges):
                    buckets.setdefault(key, []).append((lo, hi))
            self._scaled[M] = (size, buckets)
        return self._scaled[M]


def _fits_int(slo, shi, d_sq: int, rlo, rhi) -> bool:
    for lo, hi, rl, rh in zip(slo, shi, rlo, rhi):
        a, b = lo - rl, rh - hi
        if a < 0 or b < 0 or a * a < d_sq or b * b < d_sq:
            return False
    return True


def lebesgue_number(X: CompactName, C: Cover | Sequence[RationalBox], budget: Budget) -> int:
    """L such that any two points of X closer than 2^-L share a box of C.

    Covers of X are pulled until every box S of one of them, dilated by its
    own diameter, fits inside some box of C.  The fit is decided exactly on
    squared face gaps, in integers after clearing denominators.
    """
    C = list(C)
    if not C:
        raise ValueError("empty cover")
    scaled = _ScaledCover(C)
    for i in itertools.count():
        budget.spend("a cover refining into the given cover")
        boxes = X[i].boxes
        M = math.lcm(scaled.D, *(q.denominator for b in boxes for q in b.lo + b.hi))
        size, buckets = scaled.at_scale(M)
        min_sq = None
        ok = True
        for S in boxes:
            budget.spend("a cover refining into the given cover")
            slo = tuple(int(q * M) for q in S.lo)
            shi = tuple(int(q * M) for q in S.hi)
            d_sq = sum((h - l) ** 2 for l, h in zip(slo, shi))
            key = tuple(l // size for l in slo)
            if not any(_fits_int(slo, shi, d_sq, rlo, rhi) for rlo, rhi in buckets.get(key, ())):
                ok = False
                break
            if min_sq is None or d_sq < min_sq:
                min_sq = d_sq
        if ok:
            min_sq = Fraction(min_sq, M * M)
            L = 0
            while dyadic_sq(L) >= min_sq:
                L += 1
            return L
    raise AssertionError("unreachable")
