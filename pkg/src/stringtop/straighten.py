"""Straightening short-branched trees into simplices.

The straightening of a tree point is given by barycentric coordinates
built from deviations: for a subspace on one side of a cell point, the
deviation is its leaf count minus its length.  Coordinates multiply
deviation ratios along the unique path of cell points from the query
point to each leaf.  Components of an intersection graph are straightened
tree by tree along an ordered partition, extending linearly.

Everything is exact rational arithmetic; the commuting identities for
edge contraction and branch pruning hold as equalities.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .diagrams import DiagramError, StringDiagram, is_short_branched
from .metric import MetricFatgraph, RPoint

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the simplex spanned by a finite label set."""
    labels: tuple
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.coords):
            raise DiagramError("labels and coordinates differ in length")
        if any(c < 0 for c in self.coords):
            raise DiagramError("negative barycentric coordinate")
        if sum(self.coords, ZERO) != 1:
            raise DiagramError("barycentric coordinates do not sum to one")

    @staticmethod
    def vertex(labels, label) -> "SimplexPoint":
        return SimplexPoint(tuple(labels),
                            tuple(ONE if l == label else ZERO for l in labels))

    @staticmethod
    def from_dict(labels, values) -> "SimplexPoint":
        return SimplexPoint(tuple(labels),
                            tuple(Fraction(values.get(l, 0)) for l in labels))

    def __getitem__(self, label) -> Fraction:
        return self.coords[self.labels.index(label)]

    def as_dict(self) -> dict:
        return dict(zip(self.labels, self.coords))

    def restrict(self, labels) -> "SimplexPoint":
        """Reindex over a label subset; the dropped coordinates must be zero."""
        d = self.as_dict()
        kept = {l: d[l] for l in labels}
        if sum(kept.values(), ZERO) != 1:
            raise DiagramError("restriction drops nonzero coordinates")
        return SimplexPoint(tuple(labels), tuple(kept[l] for l in labels))


@dataclass(frozen=True)
class VCells:
    """The cell decomposition of a tree realization relative to a query point.

    Nodes are the metric identifications of tree vertices (classes under
    zero-length edges) plus the query point itself when it is interior to
    an edge; the one-cells are the positive-length intervals between them.
    """
    n_nodes: int
    node_of_vertex: tuple[int, ...]
    point_node: int
    cells: tuple[tuple[int, int, Fraction], ...]   # (node, node, length > 0)
    leaf_count: tuple[int, ...]
    leaf_node: dict[int, int]                      # tree leaf vertex -> node

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, Fraction], ...], ...]:
        adj: list[list[tuple[int, Fraction]]] = [[] for _ in range(self.n_nodes)]
        for a, b, l in self.cells:
            adj[a].append((b, l))
            adj[b].append((a, l))
        return tuple(tuple(x) for x in adj)

    def side(self, vi: int, vj: int) -> set[int]:
        """Nodes of the component of the complement of vi containing vj."""
        if vi == vj:
            raise DiagramError("deviation requires two distinct cell points")
        seen = {vj}
        stack = [vj]
        while stack:
            x = stack.pop()
            for y, _ in self.adjacency[x]:
                if y != vi and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def deviation(self, vi: int, vj: int) -> Fraction:
        """Leaf count minus length of the subspace on the vj side of vi."""
        side = self.side(vi, vj)
        length = ZERO
        for a, b, l in self.cells:
            if (a in side and b in side) or (a == vi and b in side) or (b == vi and a in side):
                length += l
        leaves = sum(self.leaf_count[n] for n in side)
        return leaves - length

    def path(self, a: int, b: int) -> list[int]:
        """The unique node path from a to b."""
        parent = {a: None}
        stack = [a]
        while stack:
            x = stack.pop()
            if x == b:
                break
            for y, _ in self.adjacency[x]:
                if y not in parent:
                    parent[y] = x
                    stack.append(y)
        if b not in parent:
            raise DiagramError("cell points lie in different components")
        out = [b]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        out.reverse()
        return out


def v_cell_decomposition(mt: MetricFatgraph, point: RPoint) -> VCells:
    """Cell points and intervals of a metric tree relative to a query point."""
    fg = mt.fatgraph
    g = fg.graph
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in g.edges:
        if mt.edge_length(e) == 0:
            a, b = find(g.source[e]), find(g.source[fg.involution[e]])
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = sorted({find(v) for v in range(g.n_vertices)})
    ridx = {r: i for i, r in enumerate(roots)}
    node_of_vertex = tuple(ridx[find(v)] for v in range(g.n_vertices))
    n_nodes = len(roots)

    cells = []
    point_node = None
    if point.is_vertex:
        point_node = node_of_vertex[point.vertex]
    else:
        point_node = n_nodes
        n_nodes += 1
    for e in g.edges:
        l = mt.edge_length(e)
        if l == 0:
            continue
        a = node_of_vertex[g.source[e]]
        b = node_of_vertex[g.source[fg.involution[e]]]
        if not point.is_vertex and point.half == e:
            cells.append((a, point_node, point.t))
            cells.append((point_node, b, l - point.t))
        else:
            cells.append((a, b, l))
    leaf_count = [0] * n_nodes
    leaf_node = {}
    for v in g.leaves:
        leaf_count[node_of_vertex[v]] += 1
        leaf_node[v] = node_of_vertex[v]
    return VCells(n_nodes, node_of_vertex, point_node, tuple(cells),
                  tuple(leaf_count), leaf_node)


def deviation(mt: MetricFatgraph, point: RPoint, vi: int, vj: int) -> Fraction:
    """Deviation between two cell points of the decomposition at ``point``."""
    return v_cell_decomposition(mt, point).deviation(vi, vj)


def barycentric(mt: MetricFatgraph, point: RPoint) -> dict[int, Fraction]:
    """Barycentric coordinate of the point at each leaf vertex of the tree."""
    sb, _ = is_short_branched(mt)
    if not sb:
        raise DiagramError("straightening requires a short-branched tree")
    vc = v_cell_decomposition(mt, point)
    dev: dict[tuple[int, int], Fraction] = {}

    def d(a, b):
        if (a, b) not in dev:
            dev[(a, b)] = vc.deviation(a, b)
        return dev[(a, b)]

    out = {}
    for w, node_w in vc.leaf_node.items():
        path = vc.path(vc.point_node, node_w)
        a = ONE
        for x, y in zip(path, path[1:]):
            a *= d(x, y) / (ONE - d(y, x))
        out[w] = a
    return out


def straighten_tree(mt: MetricFatgraph, point: RPoint, labels=None) -> SimplexPoint:
    """The straightening map: a tree point as a point of the leaf simplex."""
    coords = barycentric(mt, point)
    if labels is None:
        labels = tuple(sorted(coords))
        return SimplexPoint(labels, tuple(coords[l] for l in labels))
    return SimplexPoint(tuple(labels), tuple(coords[l] for l in labels))


# ---------------------------------------------------------------------------
# component straightening


def ordered_partition(sd: StringDiagram, comp: int) -> list[list[int]]:
    """The ordered partition of the trees of an intersection-graph component.

    A tree enters the earliest part once all its leaf attachments lie on
    lollipops or on trees of strictly earlier parts.
    """
    csd = sd.csd
    ig = csd.igraph
    todo = set(ig.components[comp])
    vertex_trees: dict[int, set[int]] = {}
    for j in todo:
        for h in csd.t_halves[j]:
            vertex_trees.setdefault(csd.fatgraph.source[h], set()).add(j)
    placed: set[int] = set()
    parts: list[list[int]] = []
    while todo:
        part = []
        for j in sorted(todo):
            ok = True
            for gh in csd.trees[j].leaf_names:
                gv = csd.fatgraph.source[gh]
                if gv in csd.q_vertices:
                    continue
                if not (vertex_trees.get(gv, set()) & placed):
                    ok = False
                    break
            if ok:
                part.append(j)
        if not part:
            raise DiagramError("ordered partition does not exhaust the trees")
        parts.append(part)
        placed.update(part)
        todo.difference_update(part)
    return parts


class ComponentStraightening:
    """Straightening of one component of the intersection graph.

    Precomputes, for every tree of the component, the linear inclusion of
    its leaf simplex into the component's leaf simplex; points are then
    straightened within their tree and pushed through the inclusion.
    """

    def __init__(self, sd: StringDiagram, comp: int):
        self.sd = sd
        self.comp = comp
        csd = sd.csd
        self.basis = csd.igraph.component_leaves(comp)
        self.partition = ordered_partition(sd, comp)
        n = len(self.basis)
        bidx = {gh: i for i, gh in enumerate(self.basis)}
        self.leaf_image: dict[tuple[int, int], tuple[Fraction, ...]] = {}
        fund_tree = {}
        for j in (t for part in self.partition for t in part):
            for gv in csd.fundamental[j]:
                fund_tree[gv] = j
        for part in self.partition:
            for j in part:
                td = csd.trees[j]
                for gh in td.leaf_names:
                    gv = csd.fatgraph.source[gh]
                    if gv in csd.q_vertices:
                        vec = [ZERO] * n
                        vec[bidx[gh]] = ONE
                        self.leaf_image[(j, gh)] = tuple(vec)
                    else:
                        j2 = fund_tree[gv]
                        pt = RPoint.at_vertex(csd.trees[j2].internal_vertex[gv])
                        self.leaf_image[(j, gh)] = self._push(j2, pt)

    def _push(self, j: int, local_point: RPoint) -> tuple[Fraction, ...]:
        td = self.sd.csd.trees[j]
        mt = self.sd.metric_tree(j)
        coords = barycentric(mt, local_point)
        out = [ZERO] * len(self.basis)
        for lv, c in coords.items():
            if c == 0:
                continue
            gh = td.vertex_tag[lv][1]
            img = self.leaf_image[(j, gh)]
            for i, x in enumerate(img):
                out[i] += c * x
        return tuple(out)

    def of_tree_point(self, j: int, local_point: RPoint) -> SimplexPoint:
        return SimplexPoint(self.basis, self._push(j, local_point))

    def of_ig_point(self, point: RPoint) -> SimplexPoint:
        """Straighten a point of the component, given in the intersection graph."""
        ig = self.sd.csd.igraph
        if point.is_vertex:
            tag = ig.vertex_tag[point.vertex]
            if tag[0] == 'x':
                return SimplexPoint.vertex(self.basis, tag[2])
            gv = tag[1]
            for j in (t for part in self.partition for t in part):
                if gv in self.sd.csd.fundamental[j]:
                    pt = RPoint.at_vertex(self.sd.csd.trees[j].internal_vertex[gv])
                    return self.of_tree_point(j, pt)
            raise DiagramError(f"vertex {gv} is in no tree of the component")
        gh = ig.to_g[point.half]
        j = self.sd.csd.he_label[gh][1]
        td = self.sd.csd.trees[j]
        mt = self.sd.metric_tree(j)
        local = RPoint.on_edge(mt, td.local_of[gh], point.t)
        return self.of_tree_point(j, local)


def straighten_component(sd: StringDiagram, comp: int, point: RPoint) -> SimplexPoint:
    """Straighten a realization point of one intersection-graph component."""
    return ComponentStraightening(sd, comp).of_ig_point(point)
