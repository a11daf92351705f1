"""Half-edge graphs and fatgraphs.

A graph is a quadruple (V, H, s, iota): a finite vertex set, a finite
half-edge set, a surjective source map and a fixed-point-free involution
whose orbits are the edges.  A fatgraph adds a cyclic order on the
half-edge set of each vertex, stored as a successor permutation whose
cycles are exactly the vertex half-edge sets.

Identifiers are dense integers.  All structures are immutable values;
operations return new structures together with relabeling maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property


class GraphError(ValueError):
    """Structural invariant of a graph or fatgraph is violated."""


@dataclass(frozen=True)
class Graph:
    source: tuple[int, ...]
    involution: tuple[int, ...]
    n_vertices: int

    def __post_init__(self):
        n = len(self.source)
        if len(self.involution) != n:
            raise GraphError("source and involution must have equal length")
        seen = [False] * self.n_vertices
        for h in range(n):
            v = self.source[h]
            if not 0 <= v < self.n_vertices:
                raise GraphError(f"half-edge {h} has out-of-range source {v}")
            seen[v] = True
            hb = self.involution[h]
            if not 0 <= hb < n:
                raise GraphError(f"involution out of range at {h}")
            if hb == h:
                raise GraphError(f"involution has fixed point at half-edge {h}")
            if self.involution[hb] != h:
                raise GraphError(f"involution not self-inverse at half-edge {h}")
        if not all(seen):
            raise GraphError("source map is not surjective onto vertices")

    @property
    def n_half(self) -> int:
        return len(self.source)

    def edge_rep(self, h: int) -> int:
        """Canonical representative of the edge through h (the lesser half)."""
        return min(h, self.involution[h])

    @cached_property
    def edges(self) -> tuple[int, ...]:
        return tuple(h for h in range(self.n_half) if h < self.involution[h])

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def half_edges_at(self) -> tuple[tuple[int, ...], ...]:
        at: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for h, v in enumerate(self.source):
            at[v].append(h)
        return tuple(tuple(hs) for hs in at)

    def valence(self, v: int) -> int:
        return len(self.half_edges_at[v])

    def is_leaf_vertex(self, v: int) -> bool:
        return self.valence(v) == 1

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_vertices) if self.valence(v) == 1)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges

    @cached_property
    def vertex_component(self) -> tuple[int, ...]:
        """Component index per vertex, numbered by least member vertex."""
        parent = list(range(self.n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            a, b = find(self.source[e]), find(self.source[self.involution[e]])
            if a != b:
                parent[max(a, b)] = min(a, b)
        roots = sorted({find(v) for v in range(self.n_vertices)})
        index = {r: i for i, r in enumerate(roots)}
        return tuple(index[find(v)] for v in range(self.n_vertices))

    @property
    def n_components(self) -> int:
        return max(self.vertex_component, default=-1) + 1

    def is_connected(self) -> bool:
        return self.n_components == 1

    def is_tree(self) -> bool:
        return (self.n_vertices > 0 and self.is_connected()
                and self.euler_characteristic() == 1)

    def is_cycle_graph(self) -> bool:
        return (self.n_vertices > 0 and self.is_connected()
                and all(self.valence(v) == 2 for v in range(self.n_vertices)))


def components(g: Graph) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Partition of (vertices, edges) by component, in deterministic order."""
    out = []
    for c in range(g.n_components):
        vs = tuple(v for v in range(g.n_vertices) if g.vertex_component[v] == c)
        es = tuple(e for e in g.edges if g.vertex_component[g.source[e]] == c)
        out.append((vs, es))
    return out


def euler_characteristic(g: Graph) -> int:
    return g.euler_characteristic()


def _compact_vertices(source, n_old):
    """Renumber vertices to a dense range preserving order; return (new source, map new->old)."""
    used = sorted(set(source))
    index = {v: i for i, v in enumerate(used)}
    return tuple(index[v] for v in source), tuple(used)


@dataclass(frozen=True)
class Fatgraph:
    graph: Graph
    succ: tuple[int, ...]

    def __post_init__(self):
        g = self.graph
        if len(self.succ) != g.n_half:
            raise GraphError("successor map has wrong length")
        for v in range(g.n_vertices):
            hs = g.half_edges_at[v]
            h0 = hs[0]
            orbit = [h0]
            x = self.succ[h0]
            while x != h0:
                if len(orbit) > len(hs):
                    raise GraphError(f"cyclic order at vertex {v} is not a single cycle")
                orbit.append(x)
                x = self.succ[x]
            if sorted(orbit) != sorted(hs):
                raise GraphError(f"cyclic order at vertex {v} does not match its half-edge set")

    @property
    def source(self):
        return self.graph.source

    @property
    def involution(self):
        return self.graph.involution

    @property
    def n_half(self) -> int:
        return self.graph.n_half

    @property
    def n_vertices(self) -> int:
        return self.graph.n_vertices

    def edge_rep(self, h: int) -> int:
        return self.graph.edge_rep(h)

    @classmethod
    def from_cyclic_orders(cls, involution, orders) -> "Fatgraph":
        """Build from the involution and one cyclic list of half-edges per vertex."""
        n = len(involution)
        source = [-1] * n
        succ = [-1] * n
        for v, cyc in enumerate(orders):
            for i, h in enumerate(cyc):
                source[h] = v
                succ[h] = cyc[(i + 1) % len(cyc)]
        if -1 in source:
            raise GraphError("cyclic orders do not cover all half-edges")
        g = Graph(tuple(source), tuple(involution), len(orders))
        return cls(g, tuple(succ))

    @cached_property
    def cyclic_orders(self) -> tuple[tuple[int, ...], ...]:
        """The cyclic order at each vertex, rotated to start at its least half-edge."""
        out = []
        for v in range(self.n_vertices):
            h0 = min(self.graph.half_edges_at[v])
            cyc = [h0]
            x = self.succ[h0]
            while x != h0:
                cyc.append(x)
                x = self.succ[x]
            out.append(tuple(cyc))
        return tuple(out)

    def boundary_next(self, h: int) -> int:
        """Successor of h along its boundary cycle: the half-edge after iota(h)."""
        return self.succ[self.involution[h]]

    @cached_property
    def boundary_cycles(self) -> tuple[tuple[int, ...], ...]:
        """All orbits of boundary_next, each rotated to its least half-edge, sorted."""
        seen = [False] * self.n_half
        cycles = []
        for h0 in range(self.n_half):
            if seen[h0]:
                continue
            cyc = []
            x = h0
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = self.boundary_next(x)
            i = cyc.index(min(cyc))
            cycles.append(tuple(cyc[i:] + cyc[:i]))
        cycles.sort(key=lambda c: c[0])
        return tuple(cycles)

    @cached_property
    def boundary_cycle_of(self) -> tuple[int, ...]:
        """Index of the boundary cycle containing each half-edge."""
        idx = [-1] * self.n_half
        for i, cyc in enumerate(self.boundary_cycles):
            for h in cyc:
                idx[h] = i
        return tuple(idx)

    def restricted_succ(self, halves: frozenset[int]) -> dict[int, int]:
        """Cyclic orders induced on a half-edge subset by skipping non-members."""
        out = {}
        for h in halves:
            x = self.succ[h]
            while x not in halves:
                x = self.succ[x]
            out[h] = x
        return out

    def subfatgraph(self, halves) -> tuple["Fatgraph", tuple[int, ...]]:
        """Fatgraph induced on a half-edge subset (closed under the involution).

        Returns the subfatgraph on local dense identifiers and the map
        local half-edge -> global half-edge.
        """
        halves = frozenset(halves)
        for h in halves:
            if self.involution[h] not in halves:
                raise GraphError("half-edge subset not closed under involution")
        to_g = tuple(sorted(halves))
        loc = {h: i for i, h in enumerate(to_g)}
        rsucc = self.restricted_succ(halves)
        verts = sorted({self.source[h] for h in halves})
        vloc = {v: i for i, v in enumerate(verts)}
        source = tuple(vloc[self.source[h]] for h in to_g)
        inv = tuple(loc[self.involution[h]] for h in to_g)
        succ = tuple(loc[rsucc[h]] for h in to_g)
        return Fatgraph(Graph(source, inv, len(verts)), succ), to_g

    def vertex_explosion(self, vs) -> tuple["Fatgraph", tuple[int, ...]]:
        """Replace each vertex of vs by one vertex per incident half-edge.

        Returns the new fatgraph and the quotient map new vertex -> old vertex.
        """
        vs = frozenset(vs)
        for v in vs:
            if not 0 <= v < self.n_vertices:
                raise GraphError(f"unknown vertex {v}")
        orders = []
        vmap = []
        for v in range(self.n_vertices):
            if v in vs:
                continue
            orders.append(list(self.cyclic_orders[v]))
            vmap.append(v)
        for v in sorted(vs):
            for h in sorted(self.graph.half_edges_at[v]):
                orders.append([h])
                vmap.append(v)
        return Fatgraph.from_cyclic_orders(self.involution, orders), tuple(vmap)

    def prune(self, v: int, S) -> tuple["Fatgraph", tuple[int, ...]]:
        """Detach each half-edge of S from v onto its own new vertex.

        S must be a proper subset of the half-edge set at v.  Returns the
        new fatgraph and the quotient map new vertex -> old vertex.
        """
        S = frozenset(S)
        at_v = set(self.graph.half_edges_at[v])
        if not S <= at_v:
            raise GraphError("pruning set is not contained in the half-edge set of the vertex")
        if S == at_v:
            raise GraphError("pruning set must be a proper subset")
        orders = []
        vmap = []
        for u in range(self.n_vertices):
            cyc = self.cyclic_orders[u]
            if u == v:
                cyc = tuple(h for h in cyc if h not in S)
            orders.append(list(cyc))
            vmap.append(u)
        for h in sorted(S):
            orders.append([h])
            vmap.append(v)
        return Fatgraph.from_cyclic_orders(self.involution, orders), tuple(vmap)

    def contract_edge(self, e: int) -> tuple["Fatgraph", tuple[int, ...], tuple[int, ...]]:
        """Contract the edge containing half-edge e.

        Loops and segment components are rejected.  Returns the contracted
        fatgraph, the half-edge map old -> new (-1 for the removed pair),
        and the vertex map old -> new.
        """
        h, hb = e, self.involution[e]
        v1, v2 = self.source[h], self.source[hb]
        if v1 == v2:
            raise GraphError("refusing to contract a loop")
        if self.graph.valence(v1) == 1 and self.graph.valence(v2) == 1:
            raise GraphError("refusing to contract a segment component")
        hmap = [-1] * self.n_half
        k = 0
        for x in range(self.n_half):
            if x in (h, hb):
                continue
            hmap[x] = k
            k += 1
        vkeep, vdrop = min(v1, v2), max(v1, v2)
        vmap = [0] * self.n_vertices
        k = 0
        for v in range(self.n_vertices):
            if v == vdrop:
                continue
            vmap[v] = k
            k += 1
        vmap[vdrop] = vmap[vkeep]
        new_source = []
        new_inv = []
        new_succ = []
        for x in range(self.n_half):
            if x in (h, hb):
                continue
            new_source.append(vmap[self.source[x]])
            new_inv.append(hmap[self.involution[x]])
            t = self.succ[x]
            while t in (h, hb):
                t = self.succ[self.involution[t]]
            new_succ.append(hmap[t])
        g = Graph(tuple(new_source), tuple(new_inv), self.n_vertices - 1)
        return Fatgraph(g, tuple(new_succ)), tuple(hmap), tuple(vmap)


def _traversal(fg: Fatgraph, start: int):
    """Deterministic rooted traversal; returns half-edges in visit order."""
    num = [-1] * fg.n_half
    order = []
    queue = [start]
    qi = 0
    while qi < len(queue):
        h = queue[qi]
        qi += 1
        if num[h] != -1:
            continue
        x = h
        while num[x] == -1:
            num[x] = len(order)
            order.append(x)
            queue.append(fg.involution[x])
            x = fg.succ[x]
    return order, num


def canonical_code(fg: Fatgraph, colors, start_candidates=None, groups=None,
                   require_unique_root=False, return_relabel=False):
    """Canonical byte string of a connected fatgraph with half-edge labels.

    Two labeled fatgraphs get equal codes iff they are isomorphic by a map
    preserving colors (and the partition given by ``groups``, whose classes
    are renamed by first visit).  Roots are the half-edges of least color
    unless given explicitly; ties are resolved by taking the least code
    over all candidate roots, which is sound because the traversal from a
    fixed root is deterministic.
    """
    if fg.n_half == 0:
        raise GraphError("cannot canonicalize an empty fatgraph")
    colors = tuple(colors)
    if start_candidates is None:
        least = min(colors)
        start_candidates = [h for h in range(fg.n_half) if colors[h] == least]
    start_candidates = list(start_candidates)
    if not start_candidates:
        raise GraphError("no candidate roots supplied for canonical labeling")
    if require_unique_root and len(start_candidates) > 1:
        raise GraphError("labels do not determine a unique root for canonical labeling")
    best = None
    best_order = None
    for start in start_candidates:
        order, num = _traversal(fg, start)
        if len(order) != fg.n_half:
            raise GraphError("fatgraph is not connected; cannot canonicalize")
        if groups is not None:
            gidx: dict = {}
            gnum = []
            for h in order:
                key = groups[h]
                if key not in gidx:
                    gidx[key] = len(gidx)
                gnum.append(gidx[key])
        code = tuple(
            (num[fg.involution[h]], num[fg.succ[h]], colors[h])
            + ((gnum[i],) if groups is not None else ())
            for i, h in enumerate(order)
        )
        if best is None or code < best:
            best = code
            best_order = order
    data = repr(best).encode()
    if return_relabel:
        # best_order[i] is the half-edge given canonical id i
        return data, tuple(best_order)
    return data
