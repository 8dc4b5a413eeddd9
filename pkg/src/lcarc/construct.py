"""Guided construction of witnessing chains and arc chains.

The fair enumerators in ``chains`` list every chain eventually, but the
chains the arc engine needs have thousands of boxes.  Here candidates are
generated from the cells of a pulled cover: cells become graph nodes, two
cells are adjacent when a box of the next cover sits inside both (that box is
the link certificate), and paths through cells allowed by a containment test
are cut into links.  Every candidate is then certified with the same checks
the enumerators use, so a construction either returns a valid object or
moves on to a finer scale.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .budget import Budget, BudgetExhausted
from .catalog import CatalogName
from .chains import (
    ArcChain,
    HitOracle,
    ThroughMap,
    WitnessingChain,
    chain_diam_lt,
    is_simple_chain,
)
from .geometry import (
    BoxIndex,
    DilatedRegion,
    RationalBox,
    bounding_box,
    closure_dilation_in_dilation,
    dyadic,
    dyadic_sq,
    point_box_gap_sq,
)
from .names import CompactName, PointName, point_approx


def _parents(c: int) -> Tuple[int, ...]:
    """Depth-d indices a with (c, c+2) 2^-(d+1) ⊆ (a, a+2) 2^-d."""
    if c % 2 == 0:
        return (c // 2 - 1, c // 2)
    return ((c - 1) // 2,)


class CellGraph:
    """Boxes of cover ``depth`` meeting a region, with certified adjacency."""

    def __init__(self, X: CompactName, depth: int, region: RationalBox, budget: Budget):
        self.X = X
        self.depth = depth
        if isinstance(X, CatalogName):
            self._from_catalog(X, depth, region)
        else:
            self._from_name(X, depth, region)
        budget.spend("cells of a cover", max(1, len(self.boxes)))
        self._index: BoxIndex | None = None

    def _from_catalog(self, X: CatalogName, depth: int, region: RationalBox) -> None:
        keys = X.cells_in(depth, region)
        self.keys = keys
        self.boxes = [X.cell_box(depth, a) for a in keys]
        pos = {a: i for i, a in enumerate(keys)}
        grow = Fraction(2, 1 << depth)
        adj: List[Dict[int, tuple]] = [dict() for _ in keys]
        for b in X.cells_in(depth + 1, region.expand(grow)):
            holders = [pos[a] for a in itertools.product(*map(_parents, b)) if a in pos]
            for i, j in itertools.permutations(holders, 2):
                adj[i].setdefault(j, b)
        self.adj = [dict(sorted(d.items())) for d in adj]
        self._cert_box = lambda b: X.cell_box(depth + 1, b)

    def _from_name(self, X: CompactName, depth: int, region: RationalBox) -> None:
        boxes = sorted(X.boxes_in(depth, region), key=lambda b: (b.lo, b.hi))
        self.keys = list(range(len(boxes)))
        self.boxes = boxes
        adj: List[Dict[int, RationalBox]] = [dict() for _ in boxes]
        if boxes:
            index = BoxIndex(max(max(b.widths()) for b in boxes))
            for i, b in enumerate(boxes):
                index.add(b, i)
            grow = max(max(b.widths()) for b in boxes)
            for e in range(depth + 1, depth + 4):
                for T in X.boxes_in(e, region.expand(grow)):
                    holders = [i for b, i in index.query(T) if b.contains_box(T)]
                    for i, j in itertools.permutations(holders, 2):
                        adj[i].setdefault(j, T)
        self.adj = [dict(sorted(d.items())) for d in adj]
        self._cert_box = lambda T: T

    def cert(self, i: int, j: int) -> RationalBox:
        return self._cert_box(self.adj[i][j])

    def __len__(self) -> int:
        return len(self.boxes)

    def index(self) -> BoxIndex:
        if self._index is None:
            size = max(max(b.widths()) for b in self.boxes)
            self._index = BoxIndex(size)
            for i, b in enumerate(self.boxes):
                self._index.add(b, i)
        return self._index

    def width(self) -> Fraction:
        return max(max(b.widths()) for b in self.boxes)



def trust_chain(oracle: HitOracle, chain: ArcChain) -> None:
    """Certificates drawn from a cell graph are boxes of pulled minimal
    covers, so they need no further search."""
    for w in chain.links:
        for S in w.link_certs:
            oracle.trust(S)
    for S in chain.join_certs:
        oracle.trust(S)


def bfs(graph: CellGraph, sources: Sequence[int], allowed: Callable[[int], bool]):
    dist = {s: 0 for s in sources}
    parent: Dict[int, int] = {}
    queue = deque(sorted(sources))
    while queue:
        u = queue.popleft()
        for v in graph.adj[u]:
            if v not in dist and allowed(v):
                dist[v] = dist[u] + 1
                parent[v] = u
                queue.append(v)
    return dist, parent


def _trace(parent: Dict[int, int], end: int) -> List[int]:
    out = [end]
    while out[-1] in parent:
        out.append(parent[out[-1]])
    out.reverse()
    return out


def shortest_path(graph: CellGraph, starts, goals, allowed) -> Optional[List[int]]:
    goals = set(goals)
    dist, parent = bfs(graph, starts, allowed)
    reached = [g for g in goals if g in dist]
    if not reached:
        return None
    end = min(reached, key=lambda g: (dist[g], g))
    return _trace(parent, end)


def dilation_exponent(X: CompactName, f, depth: int, cap: int = 64) -> Optional[int]:
    """Largest m <= cap with every box of cover ``depth`` below 2^-f(m) across."""
    d_sq = X.cover_diam_sq(depth)
    best = None
    for m in range(cap + 1):
        if d_sq < dyadic_sq(f(m)):
            best = m
        elif best is not None:
            break
    return best


def endpoint_cell(graph: CellGraph, p: PointName, candidates, prec: int, tries: int = 4):
    """A candidate cell containing the closure of an approximation box of p."""
    for extra in range(tries):
        B = point_approx(p, prec + extra)
        hits = [
            i for _, i in graph.index().query(B)
            if i in candidates and graph.boxes[i].contains_closure(B)
        ]
        if hits:
            return min(hits), B
    return None, None


def precision_for(w: Fraction) -> int:
    """Least p with 2^-p <= w/4: approximation boxes that narrow fit inside
    some cell of width w when cells overlap by half."""
    p = 0
    while dyadic(p) > w / 4:
        p += 1
    return p


# -- cutting paths into links ------------------------------------------------------------


def _split(n: int, q: int) -> List[int]:
    """Sizes of >= 2 consecutive runs covering n cells, each about q long."""
    parts = max(2, n // q)
    if n < parts:
        return []
    base, extra = divmod(n, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def links_from_path(graph: CellGraph, path: Sequence[int], blocks: Sequence[int], q: int, m: int):
    """Arc chain from a cell path cut into blocks (sizes), each block into >= 2 links.

    Returns (chain, through_map) or None when a block is too short.
    """
    links, joins, t = [], [], [0]
    pos = 0
    for size in blocks:
        runs = _split(size, q)
        if not runs:
            return None
        for r in runs:
            cells = path[pos:pos + r]
            boxes = tuple(graph.boxes[i] for i in cells)
            certs = tuple(graph.cert(a, b) for a, b in zip(cells, cells[1:]))
            if links:
                joins.append(graph.cert(path[pos - 1], path[pos]))
            links.append(WitnessingChain(m, boxes, certs))
            pos += r
        t.append(len(links))
    return ArcChain(tuple(links), tuple(joins)), ThroughMap(tuple(t))


def assign_blocks(labels: Sequence[frozenset], l: int) -> Optional[List[int]]:
    """Cut a labelled path into l consecutive blocks, block i labelled i.

    Boundaries sit in the middle of the run where both neighbours' labels
    hold, which keeps blocks long.
    """
    n = len(labels)
    bounds = [0]
    pos = 0
    for i in range(1, l):
        p = pos
        while p < n and not (i in labels[p] and i + 1 in labels[p]):
            if i not in labels[p]:
                return None
            p += 1
        if p >= n:
            return None
        e = p
        while e < n and i in labels[e] and i + 1 in labels[e]:
            e += 1
        cut = (p + e) // 2
        if cut <= pos:
            cut = pos + 1
        bounds.append(cut)
        pos = cut
    bounds.append(n)
    for i in range(1, l + 1):
        if any(i not in labels[p] for p in range(bounds[i - 1], bounds[i])):
            return None
        if bounds[i] <= bounds[i - 1]:
            return None
    return [b - a for a, b in zip(bounds, bounds[1:])]


# -- containment labels --------------------------------------------------------------------


class PieceIndex:
    """Dilated pieces of a chain, searchable by location."""

    def __init__(self, chain: ArcChain):
        self.items = [(v, i) for i, w in enumerate(chain.links, 1) for v in w.regions()]
        size = max(max(v.bbox().widths()) for v, _ in self.items)
        self.index = BoxIndex(size)
        for v, i in self.items:
            self.index.add(v.bbox(), (v, i))

    def labels(self, piece: DilatedRegion) -> frozenset:
        """Links whose V certifiably contains closure(piece)."""
        out = set()
        for _, (v, i) in self.index.query(piece.bbox()):
            if i not in out and closure_dilation_in_dilation(piece, v):
                out.add(i)
        return frozenset(out)


def box_in_dilation(B: RationalBox, v: DilatedRegion) -> bool:
    """closure(B) ⊆ v, by convexity of the dilated box: test the corners."""
    r2 = v.radius * v.radius
    return all(point_box_gap_sq(c, v.base) < r2 for c in B.corners())


def covers_cells(graph: CellGraph, chain: ArcChain, on_path: set) -> bool:
    """Every cell of the graph lies inside some piece of the chain."""
    pieces = [v for w in chain.links for v in w.regions()]
    size = max(max(v.bbox().widths()) for v in pieces)
    index = BoxIndex(size)
    for v in pieces:
        index.add(v.bbox(), v)
    for i, B in enumerate(graph.boxes):
        if i in on_path:
            continue
        if not any(box_in_dilation(B, v) for _, v in index.query(B)):
            return False
    return True


# -- one refinement step -----------------------------------------------------------------


@dataclass
class Level:
    chain: ArcChain
    through: Optional[ThroughMap]
    x_cert: Optional[RationalBox]
    y_cert: Optional[RationalBox]
    depth: int


def _q_ladder(r: Fraction, w: Fraction) -> List[int]:
    """Cells per link: enough that links two apart clear 2r between them."""
    q0 = int(4 * r / w) + 3
    return [q0, (3 * q0) // 2, 2 * q0, 3 * q0]


def _start_depth(X: CompactName, target: int) -> int:
    """First cover whose boxes are well below 2^-(target+3) across."""
    return X.index_finer_than(target + 3)


def refine(
    X: CompactName,
    f,
    coarse: ArcChain,
    target: int,
    budget: Budget,
    oracle: HitOracle,
    x: PointName | None = None,
    y: PointName | None = None,
    min_depth: int = 0,
    tries: int = 5,
) -> Level:
    """An arc chain of diameter < 2^-target narrowly going straight through
    ``coarse``.  With point names x, y its first and last links carry
    endpoint certificates; without them it must cover every cell of X met by
    ``coarse`` (used when the endpoints are not known)."""
    region = bounding_box(w.bbox() for w in coarse.links)
    pieces = PieceIndex(coarse)
    l = coarse.l
    d0 = max(_start_depth(X, target), min_depth)
    for d in range(d0, d0 + tries):
        m = dilation_exponent(X, f, d)
        if m is None:
            continue
        graph = CellGraph(X, d, region, budget)
        if not len(graph):
            continue
        labels = [pieces.labels(DilatedRegion(b, m)) for b in graph.boxes]
        budget.spend("containment tests", len(labels))
        allowed = lambda i: bool(labels[i])  # noqa: E731
        prec = precision_for(graph.width())
        if x is not None:
            s, xb = endpoint_cell(graph, x, {i for i in range(len(graph)) if 1 in labels[i]}, prec)
            e, yb = endpoint_cell(graph, y, {i for i in range(len(graph)) if l in labels[i]}, prec)
            if s is None or e is None:
                continue
            path = shortest_path(graph, [s], [e], allowed)
        else:
            xb = yb = None
            path = _extreme_path(graph, labels, l)
        if path is None:
            continue
        blocks = assign_blocks([labels[i] for i in path], l)
        if blocks is None:
            continue
        for q in _q_ladder(dyadic(m), graph.width()):
            built = links_from_path(graph, path, blocks, q, m)
            if built is None:
                break
            chain, tmap = built
            budget.spend("candidate arc chains")
            if not chain_diam_lt(chain, target):
                break
            if not is_simple_chain(chain.links):
                continue
            if x is None and not covers_cells(graph, chain, set(path)):
                break
            trust_chain(oracle, chain)
            return Level(chain, tmap, xb, yb, d)
    raise BudgetExhausted(f"an arc chain of diameter < 2^-{target} inside the previous one")


def _extreme_path(graph: CellGraph, labels, l: int) -> Optional[List[int]]:
    """Path between the two far ends of the allowed cells, oriented from the
    coarse chain's first link to its last."""
    allowed = lambda i: bool(labels[i])  # noqa: E731
    lasts = [i for i in range(len(graph)) if l in labels[i]]
    if not lasts:
        return None
    dist, _ = bfs(graph, lasts, allowed)
    a = max(dist, key=lambda i: (dist[i], -i))
    if 1 not in labels[a]:
        return None
    dist, parent = bfs(graph, [a], allowed)
    ends = [i for i in dist if l in labels[i]]
    if not ends:
        return None
    b = max(ends, key=lambda i: (dist[i], -i))
    return _trace(parent, b)


# -- starting chains -------------------------------------------------------------------------


def chain_between(
    X: CompactName,
    f,
    x: PointName,
    y: PointName,
    inside: Callable[[DilatedRegion], bool],
    region: RationalBox,
    budget: Budget,
    oracle: HitOracle,
    depths: Sequence[int],
):
    """A witnessing chain from x to y whose dilated pieces pass ``inside``.

    Returns (chain, x_cert, y_cert, depth): closure(x_cert) ⊆ R_1 and
    closure(y_cert) ⊆ R_k, with x in x_cert and y in y_cert.
    """
    for d in depths:
        m = dilation_exponent(X, f, d)
        if m is None:
            continue
        graph = CellGraph(X, d, region, budget)
        if not len(graph):
            continue
        ok = [inside(DilatedRegion(b, m)) for b in graph.boxes]
        budget.spend("containment tests", len(ok))
        good = {i for i in range(len(graph)) if ok[i]}
        prec = precision_for(graph.width())
        s, xb = endpoint_cell(graph, x, good, prec)
        e, yb = endpoint_cell(graph, y, good, prec)
        if s is None or e is None:
            continue
        path = shortest_path(graph, [s], [e], lambda i: ok[i])
        if path is None:
            continue
        boxes = tuple(graph.boxes[i] for i in path)
        certs = tuple(graph.cert(a, b) for a, b in zip(path, path[1:]))
        w = WitnessingChain(m, boxes, certs)
        trust_chain(oracle, ArcChain((w,)))
        return w, xb, yb, d
    raise BudgetExhausted("a witnessing chain between the two points")


def covering_chain(X: CompactName, f, target: int, budget: Budget, oracle: HitOracle,
                   tries: int = 5) -> Tuple[ArcChain, int]:
    """An arc chain of diameter < 2^-target whose V-regions cover every cell
    of a pulled cover (hence all of X), running between the far ends of X."""
    if X.bbox is None:
        raise ValueError("covering chains need a bounded name")
    d0 = _start_depth(X, target)
    for d in range(d0, d0 + tries):
        m = dilation_exponent(X, f, d)
        if m is None:
            continue
        graph = CellGraph(X, d, X.bbox, budget)
        if not len(graph):
            continue
        everything = lambda i: True  # noqa: E731
        dist, _ = bfs(graph, [0], everything)
        a = max(dist, key=lambda i: (dist[i], -i))
        dist, parent = bfs(graph, [a], everything)
        b = max(dist, key=lambda i: (dist[i], -i))
        path = _trace(parent, b)
        for q in _q_ladder(dyadic(m), graph.width()):
            built = links_from_path(graph, path, [len(path)], q, m)
            if built is None:
                break
            chain, _ = built
            budget.spend("candidate arc chains")
            if not chain_diam_lt(chain, target):
                break
            if not is_simple_chain(chain.links):
                continue
            if not covers_cells(graph, chain, set(path)):
                break
            trust_chain(oracle, chain)
            return chain, d
    raise BudgetExhausted(f"a covering arc chain of diameter < 2^-{target}")
