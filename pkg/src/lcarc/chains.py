"""Witnessing chains, arc chains and the narrowly-goes-straight-through relation.

Nonemptiness facts of the form S ∩ X ≠ ∅ are carried as certificate boxes
inside the chains.  Against a catalog set they are decided directly; against
a compact-set name a certificate is accepted once some box of a pulled
minimal cover sits inside it.
"""

from __future__ import annotations

import bisect
import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .budget import Budget, BudgetExhausted
from .geometry import (
    BoxIndex,
    DilatedRegion,
    RationalBox,
    bounding_box,
    box_gap_sq,
    closure_dilation_in_dilation,
    dilations_intersect,
    dyadic,
    dyadic_sq,
    union_diam_lt,
)
from .names import CompactName

LcFunctionLike = Callable[[int], int]


@dataclass(frozen=True)
class WitnessingChain:
    m: int
    boxes: Tuple[RationalBox, ...]
    link_certs: Tuple[RationalBox, ...] = ()

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("a witnessing chain needs at least one box")
        if self.m < 0:
            raise ValueError("m must be a natural number")
        if self.link_certs and len(self.link_certs) != len(self.boxes) - 1:
            raise ValueError("need one link certificate per consecutive pair")

    @property
    def k(self) -> int:
        return len(self.boxes)

    @property
    def first(self) -> RationalBox:
        return self.boxes[0]

    @property
    def last(self) -> RationalBox:
        return self.boxes[-1]

    def certs(self) -> Tuple[RationalBox, ...]:
        if self.link_certs:
            return self.link_certs
        return tuple(
            a.intersection(b) or a for a, b in zip(self.boxes, self.boxes[1:])
        )

    def regions(self) -> Tuple[DilatedRegion, ...]:
        """V_ω as its list of dilated pieces."""
        return self._regions

    def bbox(self) -> RationalBox:
        """Open box containing V_ω."""
        return self._bbox

    @functools.cached_property
    def _regions(self) -> Tuple[DilatedRegion, ...]:
        return tuple(DilatedRegion(b, self.m) for b in self.boxes)

    @functools.cached_property
    def _bbox(self) -> RationalBox:
        return bounding_box(self.boxes).expand(dyadic(self.m))


@dataclass(frozen=True)
class ArcChain:
    links: Tuple[WitnessingChain, ...]
    join_certs: Tuple[RationalBox, ...] = ()

    def __post_init__(self):
        if not self.links:
            raise ValueError("an arc chain needs at least one link")
        if self.join_certs and len(self.join_certs) != len(self.links) - 1:
            raise ValueError("need one join certificate per consecutive pair")

    @property
    def l(self) -> int:  # noqa: E743
        return len(self.links)

    def V(self, j: int) -> Tuple[DilatedRegion, ...]:
        """V_{p,j} with 1-based j."""
        return self.links[j - 1].regions()

    def certs(self) -> Tuple[RationalBox, ...]:
        if self.join_certs:
            return self.join_certs
        return tuple(
            a.last.intersection(b.first) or a.last for a, b in zip(self.links, self.links[1:])
        )


@dataclass(frozen=True)
class ThroughMap:
    """Block boundaries 0 = t_0 < ... < t_l = k; block i holds fine links
    t_{i-1}+1 .. t_i."""

    t: Tuple[int, ...]

    def __post_init__(self):
        if len(self.t) < 2 or self.t[0] != 0:
            raise ValueError("a through map starts at 0 and has at least one block")
        if any(a >= b for a, b in zip(self.t, self.t[1:])):
            raise ValueError("through map indices must increase")

    def blocks(self) -> List[range]:
        return [range(a + 1, b + 1) for a, b in zip(self.t, self.t[1:])]

    def block_of(self, j: int) -> int:
        """Coarse index (1-based) of fine link j (1-based)."""
        return bisect.bisect_left(self.t, j)


# -- deciding S ∩ X ≠ ∅ -------------------------------------------------------------


class HitOracle:
    """Decides (catalog set) or semi-decides (compact name) S ∩ X ≠ ∅."""

    def __init__(self, source, max_covers: int = 40):
        self.source = source
        self.max_covers = max_covers
        self._cache: Dict[RationalBox, bool] = {}

    @property
    def is_name(self) -> bool:
        return isinstance(self.source, CompactName)

    def certify(self, S: RationalBox, budget: Budget | None = None) -> bool:
        got = self._cache.get(S)
        if got is not None:
            return got
        if not self.is_name:
            from .catalog import box_hits_set

            got = box_hits_set(self.source, S)
        else:
            got = self._search(S, budget)
        self._cache[S] = got
        return got

    def _search(self, S: RationalBox, budget: Budget | None) -> bool:
        for i in range(self.max_covers):
            if budget is not None:
                budget.spend("a cover box inside a certificate")
            if any(S.contains_box(T) for T in self.source.boxes_in(i, S)):
                return True
        raise BudgetExhausted("a cover box inside a certificate", self.max_covers)

    def trust(self, S: RationalBox) -> None:
        """Record S as certified (it contains a box of a pulled cover)."""
        self._cache[S] = True


def as_oracle(X) -> HitOracle:
    return X if isinstance(X, HitOracle) else HitOracle(X)


# -- checkers --------------------------------------------------------------------------


def check_witnessing(w: WitnessingChain, f: LcFunctionLike, X, budget: Budget | None = None) -> bool:
    oracle = as_oracle(X)
    bound = dyadic_sq(f(w.m))
    if any(b.diam_sq() >= bound for b in w.boxes):
        return False
    for a, b in zip(w.boxes, w.boxes[1:]):
        if not a.intersects(b):
            return False
    for S, a, b in zip(w.certs(), w.boxes, w.boxes[1:]):
        if not (a.contains_box(S) and b.contains_box(S)):
            return False
        if not oracle.certify(S, budget):
            return False
    return True


def _link_bboxes(p: ArcChain) -> List[RationalBox]:
    return [w.bbox() for w in p.links]


def links_intersect(a: WitnessingChain, b: WitnessingChain) -> bool:
    """V_a ∩ V_b ≠ ∅, decided piece by piece after bounding-box filters."""
    ba, bb = a.bbox(), b.bbox()
    if box_gap_sq(ba, bb) > 0:
        return False
    ends = (a.regions()[-1], b.regions()[0]), (a.regions()[0], b.regions()[-1])
    if any(dilations_intersect(u, v) for u, v in ends):
        return True
    near_a = [u for u in a.regions() if box_gap_sq(u.bbox(), bb) == 0]
    near_b = [v for v in b.regions() if box_gap_sq(v.bbox(), ba) == 0]
    return any(dilations_intersect(u, v) for u in near_a for v in near_b)


def is_simple_chain(links: Sequence[WitnessingChain]) -> bool:
    """(V_1, ..., V_l) meet exactly when |i - j| <= 1."""
    n = len(links)
    for i in range(n - 1):
        if not links_intersect(links[i], links[i + 1]):
            return False
    if n < 3:
        return True
    boxes = [w.bbox() for w in links]
    size = max(max(b.widths()) for b in boxes)
    index = BoxIndex(size)
    for i, b in enumerate(boxes):
        index.add(b, i)
    for i, b in enumerate(boxes):
        for _, j in index.query(b):
            if j > i + 1 and links_intersect(links[i], links[j]):
                return False
    return True


def check_arc_chain(p: ArcChain, f: LcFunctionLike, X, budget: Budget | None = None) -> bool:
    oracle = as_oracle(X)
    if not all(check_witnessing(w, f, oracle, budget) for w in p.links):
        return False
    for S, a, b in zip(p.certs(), p.links, p.links[1:]):
        if not (a.last.contains_box(S) and b.first.contains_box(S)):
            return False
        if not oracle.certify(S, budget):
            return False
    return is_simple_chain(p.links)


def chain_diam_lt(p: ArcChain, k: int) -> bool:
    return all(union_diam_lt(w.regions(), k) for w in p.links)


# -- narrowly goes straight through ------------------------------------------------------


def containment_sets(p0: ArcChain, p1: ArcChain) -> List[set]:
    """For each fine link j, the coarse links i with closure(V_{p0,j}) ⊆ V_{p1,i}
    certified piece by piece."""
    pieces = [(v, i) for i, w in enumerate(p1.links, 1) for v in w.regions()]
    size = max(max(v.bbox().widths()) for v, _ in pieces)
    index = BoxIndex(size)
    for v, i in pieces:
        index.add(v.bbox(), (v, i))
    out = []
    for w in p0.links:
        allowed = None
        for u in w.regions():
            here = {
                i for _, (v, i) in index.query(u.bbox())
                if (allowed is None or i in allowed) and closure_dilation_in_dilation(u, v)
            }
            allowed = here if allowed is None else allowed & here
            if not allowed:
                break
        out.append(allowed or set())
    return out


def through_map_from_sets(sets: Sequence[set], l: int, min_block: int = 2) -> Optional[ThroughMap]:
    """Monotone block decomposition of fine links 1..k into coarse 1..l."""
    k = len(sets)
    if k < l * min_block:
        return None
    # reach[i] = sorted fine positions j where blocks 1..i can end exactly at j
    reach: List[List[int]] = [[0]] + [[] for _ in range(l)]
    parent: Dict[Tuple[int, int], int] = {}
    run_start: Dict[int, int] = {}
    for j in range(1, k + 1):
        for i in list(run_start):
            if i not in sets[j - 1]:
                del run_start[i]
        for i in sets[j - 1]:
            if 1 <= i <= l:
                run_start.setdefault(i, j)
        for i in sorted(run_start):
            lo, hi = run_start[i] - 1, j - min_block
            ends = reach[i - 1]
            pos = bisect.bisect_right(ends, hi) - 1
            if pos >= 0 and ends[pos] >= lo:
                reach[i].append(j)
                parent[(i, j)] = ends[pos]
    if not reach[l] or reach[l][-1] != k:
        return None
    t = [k]
    i, j = l, k
    while i > 0:
        j = parent[(i, j)]
        i -= 1
        t.append(j)
    return ThroughMap(tuple(reversed(t)))


def goes_straight_through(p0: ArcChain, p1: ArcChain, min_block: int = 2) -> Optional[ThroughMap]:
    """A certified through map of p0 into p1, or None when none is certified."""
    return through_map_from_sets(containment_sets(p0, p1), p1.l, min_block)


# -- fair enumeration ----------------------------------------------------------------------


class _CoverGraphs:
    """Adjacency between boxes of cover d, certified by boxes of covers d+1..s."""

    def __init__(self, X: CompactName):
        self.X = X
        self._edges: Dict[Tuple[int, int], Dict[RationalBox, Dict[RationalBox, RationalBox]]] = {}

    def boxes(self, d: int) -> List[RationalBox]:
        return sorted(self.X[d].boxes, key=_box_key)

    def edges(self, d: int, s: int):
        key = (d, s)
        if key not in self._edges:
            boxes = self.boxes(d)
            nb: Dict[RationalBox, Dict[RationalBox, RationalBox]] = {b: {} for b in boxes}
            for e in range(d + 1, s + 1):
                for T in sorted(self.X[e].boxes, key=_box_key):
                    holders = [b for b in boxes if b.contains_box(T)]
                    for a, b in itertools.permutations(holders, 2):
                        nb[a].setdefault(b, T)
            self._edges[key] = nb
        return self._edges[key]


class _Exhausted:
    """End-of-stream marker for enumerations that ran out of budget."""

    def __repr__(self) -> str:
        return "EXHAUSTED"


EXHAUSTED = _Exhausted()


def marked(stream: Iterator) -> Iterator:
    """Pass ``stream`` through, ending with EXHAUSTED instead of raising when
    its budget runs out."""
    try:
        yield from stream
    except BudgetExhausted:
        yield EXHAUSTED


def _box_key(b: RationalBox):
    return (b.lo, b.hi)


def enum_witnessing(X: CompactName, f: LcFunctionLike, budget: Budget) -> Iterator[WitnessingChain]:
    """Every witnessing chain over cover boxes, dovetailed over stages s:
    m <= s, cover index <= s, length <= s + 1.  Ends by raising BudgetExhausted."""
    graphs = _CoverGraphs(X)
    emitted = set()
    for s in itertools.count():
        for m in range(s + 1):
            bound = dyadic_sq(f(m))
            for d in range(s + 1):
                budget.spend("witnessing chains")
                if X.cover_diam_sq(d) >= bound:
                    continue
                nb = graphs.edges(d, s)
                for start in graphs.boxes(d):
                    for chain in _walks(nb, start, s + 1, budget):
                        boxes = tuple(b for b, _ in chain)
                        certs = tuple(c for _, c in chain[1:])
                        key = (m, boxes)
                        if key in emitted:
                            continue
                        emitted.add(key)
                        yield WitnessingChain(m, boxes, certs)


def _walks(nb, start, max_len: int, budget: Budget):
    stack = [[(start, None)]]
    while stack:
        walk = stack.pop()
        budget.spend("witnessing chains")
        yield walk
        if len(walk) < max_len:
            last = walk[-1][0]
            for b in sorted(nb[last], key=_box_key, reverse=True):
                stack.append(walk + [(b, nb[last][b])])


def enum_arc_chains(X: CompactName, f: LcFunctionLike, budget: Budget) -> Iterator[ArcChain]:
    """Arc chains built from witnessing chains listed so far, dovetailed with
    the witnessing enumeration and with join-certificate search."""
    source = enum_witnessing(X, f, budget)
    pool: List[WitnessingChain] = []
    emitted = set()
    oracle = HitOracle(X)
    for s in itertools.count():
        pool.append(next(source))
        for seq in _arc_sequences(pool, s + 1, oracle, budget, s):
            key = tuple(seq)
            if key in emitted:
                continue
            emitted.add(key)
            certs = tuple(_join_cert(a, b, X, s) for a, b in zip(seq, seq[1:]))
            yield ArcChain(tuple(seq), certs)


def _join_cert(a: WitnessingChain, b: WitnessingChain, X: CompactName, s: int):
    region = a.last.intersection(b.first)
    if region is None:
        return None
    for e in range(s + 1):
        for T in sorted(X.boxes_in(e, region), key=_box_key):
            if region.contains_box(T):
                return T
    return None


def _arc_sequences(pool, max_len, oracle, budget, s):
    X = oracle.source
    stack = [[w] for w in reversed(pool)]
    while stack:
        seq = stack.pop()
        budget.spend("arc chains")
        yield seq
        if len(seq) >= max_len:
            continue
        for w in reversed(pool):
            if w in seq:
                continue
            if _join_cert(seq[-1], w, X, s) is None:
                continue
            if not links_intersect(seq[-1], w):
                continue
            if any(links_intersect(u, w) for u in seq[:-1]):
                continue
            stack.append(seq + [w])
