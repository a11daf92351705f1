"""Pseudometric fatgraphs, points of their realizations, and exact distances.

Edge lengths are nonnegative rationals.  A point of the realization |G|
is either a vertex or an interior point of a positive-length edge; the
two oriented descriptions (t, e) ~ (len-t, iota(e)) are normalized to the
lesser half-edge, and offsets 0 and len normalize to vertices.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .fatgraph import Fatgraph, GraphError

ZERO = Fraction(0)


@dataclass(frozen=True)
class MetricFatgraph:
    fatgraph: Fatgraph
    length: tuple[Fraction, ...]  # per half-edge; equal on the two halves

    def __post_init__(self):
        fg = self.fatgraph
        if len(self.length) != fg.n_half:
            raise GraphError("length vector has wrong size")
        for h in range(fg.n_half):
            l = self.length[h]
            if l < 0:
                raise GraphError(f"negative length on edge of half-edge {h}")
            if l != self.length[fg.involution[h]]:
                raise GraphError(f"lengths differ on the two halves at {h}")

    @classmethod
    def from_edge_lengths(cls, fg: Fatgraph, lengths) -> "MetricFatgraph":
        vec = [ZERO] * fg.n_half
        for e, l in lengths.items():
            vec[e] = Fraction(l)
            vec[fg.involution[e]] = Fraction(l)
        return cls(fg, tuple(vec))

    def edge_length(self, h: int) -> Fraction:
        return self.length[h]

    @cached_property
    def total_length(self) -> Fraction:
        return sum((self.length[e] for e in self.fatgraph.graph.edges), ZERO)

    def edge_lengths(self) -> dict[int, Fraction]:
        return {e: self.length[e] for e in self.fatgraph.graph.edges}


@dataclass(frozen=True)
class RPoint:
    """A point of the pseudometric realization, in canonical form."""
    vertex: int | None = None
    half: int | None = None
    t: Fraction | None = None

    @staticmethod
    def at_vertex(v: int) -> "RPoint":
        return RPoint(vertex=v)

    @staticmethod
    def on_edge(mg: MetricFatgraph, h: int, t) -> "RPoint":
        t = Fraction(t)
        l = mg.edge_length(h)
        if t < 0 or t > l:
            raise GraphError(f"offset {t} outside [0, {l}]")
        if t == 0:
            return RPoint(vertex=mg.fatgraph.source[h])
        if t == l:
            return RPoint(vertex=mg.fatgraph.source[mg.fatgraph.involution[h]])
        hb = mg.fatgraph.involution[h]
        if hb < h:
            return RPoint(half=hb, t=l - t)
        return RPoint(half=h, t=t)

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def anchors(self, mg: MetricFatgraph):
        """Pairs (vertex, exact offset) connecting the point to the vertex set."""
        if self.is_vertex:
            return [(self.vertex, ZERO)]
        fg = mg.fatgraph
        return [(fg.source[self.half], self.t),
                (fg.source[fg.involution[self.half]], mg.edge_length(self.half) - self.t)]


def _vertex_distances(mg: MetricFatgraph, sources):
    """Dijkstra from weighted source vertices; exact rational distances."""
    fg = mg.fatgraph
    dist: dict[int, Fraction] = {}
    heap = [(d, v) for v, d in sources]
    heapq.heapify(heap)
    while heap:
        d, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        for h in fg.graph.half_edges_at[v]:
            u = fg.source[fg.involution[h]]
            if u not in dist:
                heapq.heappush(heap, (d + mg.edge_length(h), u))
    return dist


def distance(mg: MetricFatgraph, p: RPoint, q: RPoint) -> Fraction:
    """Infimum path length between two realization points, exactly."""
    best = None
    if not p.is_vertex and not q.is_vertex and p.half == q.half:
        best = abs(p.t - q.t)
    if p.is_vertex and q.is_vertex and p.vertex == q.vertex:
        return ZERO
    dist = _vertex_distances(mg, p.anchors(mg))
    for v, off in q.anchors(mg):
        if v in dist:
            d = dist[v] + off
            if best is None or d < best:
                best = d
    if best is None:
        raise GraphError("points lie in different components")
    return best


def points_coincide(mg: MetricFatgraph, p: RPoint, q: RPoint) -> bool:
    """Whether two points are identified in the quotient metric space."""
    return p == q or distance(mg, p, q) == 0


def cycle_length(mg: MetricFatgraph, cycle) -> Fraction:
    return sum((mg.edge_length(h) for h in cycle), ZERO)


def _marking_index(mg: MetricFatgraph, cycle) -> int:
    """Index in the cycle of the unique marking leaf half-edge."""
    fg = mg.fatgraph
    marks = [i for i, h in enumerate(cycle) if fg.graph.valence(fg.source[h]) == 1]
    if len(marks) != 1:
        raise GraphError(f"cycle has {len(marks)} markings, expected exactly one")
    i = marks[0]
    if mg.edge_length(cycle[i]) != 0:
        raise GraphError("external edge of the marking must have length zero")
    return i


def marked_cycle_point(mg: MetricFatgraph, cycle, t) -> RPoint:
    """The point at arc length t along a marked boundary cycle.

    The cycle is rotated so the marking leaf half-edge comes first; t runs
    in [0, L] where L is the total length of the cycle's oriented edges.
    A length-zero cycle maps every t to the marking leaf.
    """
    t = Fraction(t)
    i = _marking_index(mg, cycle)
    cyc = cycle[i:] + cycle[:i]
    leaf = mg.fatgraph.source[cyc[0]]
    total = cycle_length(mg, cyc)
    if t < 0 or t > total:
        raise GraphError(f"parameter {t} outside [0, {total}]")
    if total == 0 or t == total:
        return RPoint.at_vertex(leaf)
    acc = ZERO
    for h in cyc:
        l = mg.edge_length(h)
        if acc <= t <= acc + l:
            return RPoint.on_edge(mg, h, t - acc)
        acc += l
    return RPoint.at_vertex(leaf)


def marked_cycle_point_reversed(mg: MetricFatgraph, cycle, t) -> RPoint:
    """The reversed parametrization: the point at arc length L - t."""
    total = cycle_length(mg, cycle)
    return marked_cycle_point(mg, cycle, total - Fraction(t))


def vertex_cycle_position(mg: MetricFatgraph, cycle, v: int) -> Fraction:
    """Arc position of a vertex along a marked cycle, measured from the marking.

    Well defined modulo the total length whenever all occurrences of the
    vertex coincide in the realization, which holds for the marked cycle
    of a lollipop; occurrences are checked to agree.
    """
    i = _marking_index(mg, cycle)
    cyc = cycle[i:] + cycle[:i]
    total = cycle_length(mg, cyc)
    fg = mg.fatgraph
    positions = []
    acc = ZERO
    for h in cyc:
        if fg.source[h] == v:
            positions.append(acc)
        acc += mg.edge_length(h)
    if fg.source[fg.involution[cyc[-1]]] == v:
        positions.append(total)
    if not positions:
        raise GraphError(f"vertex {v} does not lie on the cycle")
    if total > 0:
        base = positions[0] % total
        for p in positions:
            if p % total != base:
                raise GraphError(f"vertex {v} occurs at distinct arc positions")
        return base
    return ZERO
