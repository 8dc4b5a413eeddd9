"""LC, ULAC and SULAC data, and arcs between two named points.

An LC function f bounds how far to look for connected neighbourhoods; a ULAC
function g bounds how close two points must be to be joined by a small arc.
From f and a name of X we get g through a Lebesgue number, and from g the
arc between two close points through a box R_0 around both and a tower of
chains inside it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .arcs import ChainTower, tower_to_name
from .budget import Budget, PreconditionViolation
from .catalog import TestContinuum, derive_lc
from .chains import ArcChain, HitOracle
from .construct import chain_between
from .functions import LcFunction, MemoFunction, UlacFunction
from .geometry import (
    DilatedRegion,
    RationalBox,
    box_gap_sq,
    closed_box_in_union,
    closure_dilation_in_box,
    dyadic,
    dyadic_sq,
)
from .lebesgue import lebesgue_number
from .names import CompactName, FunctionName, PointName, point_approx


def monotonize(f: MemoFunction) -> MemoFunction:
    """k ↦ max(f(0), ..., f(k), k): increasing and pointwise >= f, so still
    an LC (or ULAC) function."""

    def g(k: int) -> int:
        return max(max(f(i) for i in range(k + 1)), k)

    return type(f)(g, f"monotone {f.tag}".strip())


def derived_lc(X: TestContinuum, slack: int = 4, sampled: int = 4) -> LcFunction:
    """LC function of a catalog set, estimated on samples of spacing
    2^-(k+slack) for k <= ``sampled`` and made increasing.

    Past ``sampled`` it grows by one per step: sampling cost doubles with k,
    and for sets built from finitely many segments or a circle the LC
    function is eventually k + c anyway.
    """

    def fn(k: int) -> int:
        if k <= sampled:
            return derive_lc(X, k, k + slack)
        return base(sampled) + (k - sampled)

    base = LcFunction(fn, "derived")
    return monotonize(base)


def ulac_from_lc(X: CompactName, f, k: int, budget: Budget) -> int:
    """g(k): the Lebesgue number of a minimal cover with all diameters
    < 2^-f(k+1)."""
    i = X.index_finer_than(f(k + 1), limit=f(k + 1) + 64)
    budget.spend("a cover finer than 2^-f(k+1)")
    return lebesgue_number(X, X[i], budget)


def ulac_function(X: CompactName, f, budget: Budget) -> UlacFunction:
    return monotonize(UlacFunction(lambda k: ulac_from_lc(X, f, k, budget), "lebesgue"))


def lc_from_ulac(g: MemoFunction) -> LcFunction:
    """Every ULAC function is an LC function: same values, new role."""
    return LcFunction(g, f"ulac {g.tag}".strip())


@dataclass(frozen=True)
class SulacConstants:
    n: int
    N1: int
    N0: int


def sulac_constants(n: int) -> SulacConstants:
    """Least N1 with n * 4^-N1 < 1, and N0 = N1 + 3."""
    if n < 1:
        raise ValueError("dimension must be positive")
    N1 = 0
    while n * dyadic_sq(N1) >= 1:
        N1 += 1
    return SulacConstants(n, N1, N1 + 3)


@dataclass(frozen=True)
class OpenRegion:
    """Finite union of open rational boxes."""

    boxes: Sequence[RationalBox]

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("an open region needs at least one box")
        object.__setattr__(self, "boxes", tuple(self.boxes))

    def bbox(self) -> RationalBox:
        from .geometry import bounding_box

        return bounding_box(self.boxes)

    def contains_closure(self, v: DilatedRegion) -> bool:
        """closure(v) ⊆ U: one box holding it, or else the closed bounding
        box of v covered by the union (conservative at the corners)."""
        if any(closure_dilation_in_box(v, q) for q in self.boxes):
            return True
        b = v.bbox()
        return closed_box_in_union(b.lo, b.hi, self.boxes)


@dataclass
class R0Box:
    box: RationalBox
    x_box: RationalBox
    y_box: RationalBox
    margin: Fraction


def sulac_box(x: PointName, y: PointName, k: int, N0: int, f_k: int, budget: Budget) -> R0Box:
    """R_0 around x and y with per-coordinate margins in (2^-(k+N0), 2^-(k+N0-1)).

    Approximations are refined until they are disjoint (certifying x != y);
    a gap of at least 2^-f(k) between them proves the precondition false.
    """
    K = k + N0
    margin = dyadic(K)
    for prec in range(K + 1, K + 1 + 4096):
        budget.spend("separating approximations of the two points")
        bx, by = point_approx(x, prec), point_approx(y, prec)
        if box_gap_sq(bx, by) >= dyadic_sq(f_k):
            raise PreconditionViolation(
                f"the points are at least 2^-{f_k} apart, too far for precision {k}"
            )
        if bx.intersects(by):
            continue
        lo = tuple(min(a, b) - margin for a, b in zip(bx.lo, by.lo))
        hi = tuple(max(a, b) + margin for a, b in zip(bx.hi, by.hi))
        R0 = RationalBox(lo, hi)
        if R0.diam_sq() < dyadic_sq(k):
            return R0Box(R0, bx, by, margin)
    raise AssertionError("unreachable")


def _tower_name(X, f, found, x, y, budget, oracle) -> FunctionName:
    w, xb, yb, depth = found
    tower = ChainTower(X, f, ArcChain((w,)), budget, x=x, y=y, x_cert=xb, y_cert=yb,
                       depth=depth, oracle=oracle)
    return tower_to_name(tower)


def _depths(X: CompactName, start: int, count: int = 24):
    return range(start, start + count)


def sulac_arc(X: CompactName, g, k: int, x: PointName, y: PointName, budget: Budget) -> FunctionName:
    """Arc of diameter < 2^-k from x to y, for d(x, y) < 2^-g(k+N0)."""
    consts = sulac_constants(X.dim)
    f = LcFunction(lambda j: g(j + consts.N0), "sulac")
    R0 = sulac_box(x, y, k, consts.N0, f(k), budget)
    oracle = HitOracle(X)
    inside = lambda v: closure_dilation_in_box(v, R0.box)  # noqa: E731
    start = X.index_finer_than(k + consts.N0)
    found = _chain_search(X, g, x, y, inside, R0.box, budget, oracle, start)
    name = _tower_name(X, g, found, x, y, budget, oracle)
    name.r0 = R0
    return name


def _chain_search(X, f, x, y, inside, region, budget, oracle, start):
    return chain_between(X, f, x, y, inside, region, budget, oracle, _depths(X, start))


def ac_arc(X: CompactName, f, U: OpenRegion, x: PointName, y: PointName, budget: Budget) -> FunctionName:
    """Arc in X ∩ U from x to y, for x, y in one component of X ∩ U."""
    oracle = HitOracle(X)
    found = _chain_search(X, f, x, y, U.contains_closure, U.bbox(), budget, oracle, 0)
    return _tower_name(X, f, found, x, y, budget, oracle)


@dataclass
class SulacWitness:
    """A ULAC function together with the arc builder it certifies."""

    X: CompactName
    g: MemoFunction
    budget: Budget

    def __call__(self, k: int, x: PointName, y: PointName) -> FunctionName:
        return sulac_arc(self.X, self.g, k, x, y, self.budget)
