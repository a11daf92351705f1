"""Combinatorial and metric string diagrams.

A combinatorial string diagram is a connected marked fatgraph without
bivalent vertices whose edges are partitioned into lollipops Q_i, marking
segments L_i and tree subgraphs, each tree carrying a set of fundamental
vertices.  The exploded trees, the intersection graph, orderings and
orientations, and the validation of every defining condition live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .fatgraph import Fatgraph, Graph, GraphError, canonical_code
from .metric import MetricFatgraph, RPoint, cycle_length, vertex_cycle_position

ZERO = Fraction(0)
ONE = Fraction(1)


class DiagramError(ValueError):
    """A string diagram operation received invalid data."""


# ---------------------------------------------------------------------------
# trees: branches, pollards, short-branched condition


def leaf_length(g: Graph) -> int:
    """One less than the number of leaves of a tree."""
    if not g.is_tree():
        raise DiagramError("leaf length is defined for trees only")
    return len(g.leaves) - 1


def branch_halves(fg: Fatgraph, h: int) -> frozenset[int]:
    """Half-edges of the branch at h: the maximal subtree in which s(h) is a leaf."""
    g = fg.graph
    if g.valence(g.source[h]) < 3:
        raise DiagramError("branches exist only at half-edges with at least trivalent source")
    root = g.source[h]
    halves = {h, fg.involution[h]}
    stack = [g.source[fg.involution[h]]]
    seen = {root}
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        for x in g.half_edges_at[v]:
            halves.add(x)
            halves.add(fg.involution[x])
            u = g.source[fg.involution[x]]
            if u not in seen:
                stack.append(u)
    return frozenset(halves)


def branch(fg: Fatgraph, h: int):
    """The branch at h as its own fatgraph, with the map to the ambient tree."""
    return fg.subfatgraph(branch_halves(fg, h))


def pollard(fg: Fatgraph, h: int):
    """The pollard at h: the maximal subtree containing no edge of the branch."""
    rest = frozenset(range(fg.n_half)) - branch_halves(fg, h)
    return fg.subfatgraph(rest)


def _halves_length(mt: MetricFatgraph, halves) -> Fraction:
    return sum((mt.edge_length(h) for h in halves if h < mt.fatgraph.involution[h]), ZERO)


def branch_leaf_length(fg: Fatgraph, halves) -> int:
    """Leaf length of a branch or pollard given by its half-edge set."""
    verts = {fg.source[h] for h in halves}
    n_leaves = sum(1 for v in verts
                   if sum(1 for x in fg.graph.half_edges_at[v] if x in halves) == 1)
    return n_leaves - 1


def is_prunable(mt: MetricFatgraph, h: int) -> bool:
    """Whether the branch at h has length equal to its leaf length."""
    halves = branch_halves(mt.fatgraph, h)
    return _halves_length(mt, halves) == branch_leaf_length(mt.fatgraph, halves)


def branch_half_edges(fg: Fatgraph):
    """All half-edges of a tree whose source is at least trivalent."""
    g = fg.graph
    return [h for h in range(fg.n_half) if g.valence(g.source[h]) >= 3]


def is_short_branched(mt: MetricFatgraph) -> tuple[bool, bool]:
    """(short branched?, degenerate?) for a pseudometric tree.

    Short branched: total length equals leaf length and every branch has
    length at most its leaf length.  Degenerate: some edge has length zero
    or some branch is prunable.
    """
    fg = mt.fatgraph
    if not fg.graph.is_tree():
        raise DiagramError("short-branched condition is defined for trees only")
    if mt.total_length != leaf_length(fg.graph):
        return False, False
    degenerate = any(mt.edge_length(e) == 0 for e in fg.graph.edges)
    for h in branch_half_edges(fg):
        halves = branch_halves(fg, h)
        length = _halves_length(mt, halves)
        ll = branch_leaf_length(fg, halves)
        if length > ll:
            return False, False
        if length == ll:
            degenerate = True
    return True, degenerate


# ---------------------------------------------------------------------------
# combinatorial string diagrams


@dataclass(frozen=True)
class TreeData:
    """One tree of a diagram: its image in the ambient graph and the exploded tree."""
    index: int
    halves: tuple[int, ...]              # global half-edges, sorted
    fundamental: frozenset[int]          # global vertices, internal in the tree
    fg: Fatgraph                         # the exploded tree, local identifiers
    to_g: tuple[int, ...]                # local half-edge -> global half-edge
    vertex_tag: tuple[tuple, ...]        # local vertex -> ('f', gv) | ('x', gh)

    @cached_property
    def local_of(self) -> dict[int, int]:
        return {gh: i for i, gh in enumerate(self.to_g)}

    @cached_property
    def leaf_names(self) -> tuple[int, ...]:
        """Global half-edges naming the leaves of the exploded tree, sorted."""
        return tuple(sorted(tag[1] for tag in self.vertex_tag if tag[0] == 'x'))

    @cached_property
    def leaf_vertex(self) -> dict[int, int]:
        """Leaf name (global half-edge) -> local leaf vertex."""
        return {tag[1]: v for v, tag in enumerate(self.vertex_tag) if tag[0] == 'x'}

    @cached_property
    def internal_vertex(self) -> dict[int, int]:
        """Global fundamental vertex -> local vertex."""
        return {tag[1]: v for v, tag in enumerate(self.vertex_tag) if tag[0] == 'f'}

    def metric(self, length) -> MetricFatgraph:
        """The exploded tree with lengths pulled back from the ambient diagram."""
        return MetricFatgraph(self.fg, tuple(length[gh] for gh in self.to_g))


def _build_tree_data(fg: Fatgraph, j: int, halves, fundamental) -> TreeData:
    to_g = tuple(sorted(halves))
    hs = frozenset(to_g)
    tags = []
    for gh in to_g:
        gv = fg.source[gh]
        tags.append(('f', gv) if gv in fundamental else ('x', gh))
    verts = sorted(set(tags))
    vidx = {t: i for i, t in enumerate(verts)}
    loc = {gh: i for i, gh in enumerate(to_g)}
    source = tuple(vidx[t] for t in tags)
    inv = tuple(loc[fg.involution[gh]] for gh in to_g)
    rsucc = fg.restricted_succ(hs)
    succ = []
    for i, gh in enumerate(to_g):
        if tags[i][0] == 'x':
            succ.append(i)
        else:
            # restrict the ambient cyclic order to this tree's halves
            x = rsucc[gh]
            succ.append(loc[x])
    tfg = Fatgraph(Graph(source, inv, len(verts)), tuple(succ))
    return TreeData(j, to_g, frozenset(fundamental), tfg, to_g, tuple(verts))


@dataclass(frozen=True)
class IGraph:
    """The intersection graph: the trees, exploded at all lollipop vertices."""
    fg: Fatgraph
    to_g: tuple[int, ...]                # local half-edge -> global half-edge
    vertex_tag: tuple[tuple, ...]        # ('v', gv) | ('x', gv, gh)
    components: tuple[tuple[int, ...], ...]  # per component: sorted tree indices
    comp_of_tree: dict[int, int]
    comp_of_vertex: tuple[int, ...]

    @cached_property
    def local_of(self) -> dict[int, int]:
        return {gh: i for i, gh in enumerate(self.to_g)}

    @cached_property
    def leaf_names(self) -> tuple[int, ...]:
        return tuple(sorted(t[2] for t in self.vertex_tag if t[0] == 'x'))

    @cached_property
    def leaf_vertex(self) -> dict[int, int]:
        return {t[2]: v for v, t in enumerate(self.vertex_tag) if t[0] == 'x'}

    @cached_property
    def inner_vertex(self) -> dict[int, int]:
        """Global non-lollipop vertex -> local vertex."""
        return {t[1]: v for v, t in enumerate(self.vertex_tag) if t[0] == 'v'}

    def component_leaves(self, c: int) -> tuple[int, ...]:
        return tuple(gh for gh in self.leaf_names
                     if self.comp_of_vertex[self.leaf_vertex[gh]] == c)

    def metric(self, length) -> MetricFatgraph:
        return MetricFatgraph(self.fg, tuple(length[gh] for gh in self.to_g))


@dataclass(frozen=True)
class CombinatorialStringDiagram:
    fatgraph: Fatgraph
    he_label: tuple[tuple[str, int], ...]   # ('Q', i) | ('L', i) | ('T', j) per half-edge
    fundamental: tuple[frozenset[int], ...]  # per tree

    @cached_property
    def n_inputs(self) -> int:
        return 1 + max((l[1] for l in self.he_label if l[0] == 'Q'), default=-1)

    @cached_property
    def n_outputs(self) -> int:
        return 1 + max((l[1] for l in self.he_label if l[0] == 'L'), default=-1)

    @property
    def n_trees(self) -> int:
        return len(self.fundamental)

    def _halves_with(self, kind, idx):
        return tuple(h for h, l in enumerate(self.he_label) if l == (kind, idx))

    @cached_property
    def q_halves(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self._halves_with('Q', i) for i in range(self.n_inputs))

    @cached_property
    def l_halves(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self._halves_with('L', i) for i in range(self.n_outputs))

    @cached_property
    def t_halves(self) -> tuple[tuple[int, ...], ...]:
        return tuple(self._halves_with('T', j) for j in range(self.n_trees))

    @cached_property
    def q_vertices(self) -> frozenset[int]:
        return frozenset(self.fatgraph.source[h]
                         for i in range(self.n_inputs) for h in self.q_halves[i])

    @cached_property
    def q_leaf_half(self) -> tuple[int, ...]:
        """The marking leaf half-edge of each lollipop."""
        out = []
        for i in range(self.n_inputs):
            leaf_halves = [h for h in self.q_halves[i]
                           if self.fatgraph.graph.valence(self.fatgraph.source[h]) == 1]
            if len(leaf_halves) != 1:
                raise DiagramError(f"lollipop {i} has {len(leaf_halves)} leaves, expected 1")
            out.append(leaf_halves[0])
        return tuple(out)

    @cached_property
    def l_leaf_half(self) -> tuple[int, ...]:
        out = []
        for i in range(self.n_outputs):
            leaf_halves = [h for h in self.l_halves[i]
                           if self.fatgraph.graph.valence(self.fatgraph.source[h]) == 1]
            if len(leaf_halves) != 1:
                raise DiagramError(f"marking segment {i} has {len(leaf_halves)} leaves, expected 1")
            out.append(leaf_halves[0])
        return tuple(out)

    def l_host_vertex(self, i: int) -> int:
        """The internal endpoint of marking segment i."""
        return self.fatgraph.source[self.fatgraph.involution[self.l_leaf_half[i]]]

    @cached_property
    def trees(self) -> tuple[TreeData, ...]:
        return tuple(_build_tree_data(self.fatgraph, j, self.t_halves[j], self.fundamental[j])
                     for j in range(self.n_trees))

    @cached_property
    def leaves(self) -> tuple[tuple[int, int], ...]:
        """All tree leaves as (tree index, global half-edge name), sorted."""
        return tuple(sorted((t.index, gh) for t in self.trees for gh in t.leaf_names))

    def leaf_host(self, leaf) -> int:
        """The ambient vertex at which a tree leaf is attached."""
        return self.fatgraph.source[leaf[1]]

    @cached_property
    def external_edges(self) -> frozenset[int]:
        g = self.fatgraph
        return frozenset(e for e in g.graph.edges
                         if g.graph.valence(g.source[e]) == 1
                         or g.graph.valence(g.source[g.involution[e]]) == 1)

    @cached_property
    def internal_edges(self) -> tuple[int, ...]:
        return tuple(e for e in self.fatgraph.graph.edges if e not in self.external_edges)

    @cached_property
    def igraph(self) -> IGraph:
        fg = self.fatgraph
        all_halves = sorted(h for hs in self.t_halves for h in hs)
        to_g = tuple(all_halves)
        hs = frozenset(all_halves)
        loc = {gh: i for i, gh in enumerate(to_g)}
        tags = []
        for gh in to_g:
            gv = fg.source[gh]
            tags.append(('x', gv, gh) if gv in self.q_vertices else ('v', gv))
        verts = sorted(set(tags))
        vidx = {t: i for i, t in enumerate(verts)}
        source = tuple(vidx[t] for t in tags)
        inv = tuple(loc[fg.involution[gh]] for gh in to_g)
        rsucc = fg.restricted_succ(hs) if hs else {}
        succ = tuple(i if tags[i][0] == 'x' else loc[rsucc[gh]]
                     for i, gh in enumerate(to_g))
        ifg = Fatgraph(Graph(source, inv, len(verts)), succ) if to_g else \
            Fatgraph(Graph((), (), 0), ())
        comp_of_vertex = ifg.graph.vertex_component if to_g else ()
        comp_of_tree = {}
        for t in self.trees:
            lv = vidx[tags[loc[t.halves[0]]]]
            comp_of_tree[t.index] = comp_of_vertex[source[loc[t.halves[0]]]]
        n_comp = ifg.graph.n_components if to_g else 0
        comps = tuple(tuple(sorted(j for j, c in comp_of_tree.items() if c == ci))
                      for ci in range(n_comp))
        return IGraph(ifg, to_g, tuple(verts), comps, comp_of_tree, comp_of_vertex)

    # -- validation -------------------------------------------------------

    def _check_lollipop(self, i: int):
        sub, to_g = self.fatgraph.subfatgraph(frozenset(self.q_halves[i]))
        g = sub.graph
        if not g.is_connected():
            return False, "not connected"
        leaves = [v for v in range(g.n_vertices) if g.valence(v) == 1]
        if len(leaves) != 1:
            return False, f"{len(leaves)} leaves"
        leaf_half = g.half_edges_at[leaves[0]][0]
        stem = g.source[g.involution[leaf_half]]
        if g.valence(stem) != 3:
            return False, "stem vertex is not trivalent in the lollipop"
        for v in range(g.n_vertices):
            if v in (leaves[0], stem):
                continue
            if g.valence(v) != 2:
                return False, f"vertex {to_g and v} not bivalent in the lollipop"
        # marked cycle preserved: the ambient cycle through the marking,
        # restricted to this lollipop's half-edges, is the lollipop's own
        # marked cycle.
        own = None
        for cyc in sub.boundary_cycles:
            if leaf_half in cyc:
                own = tuple(to_g[h] for h in cyc)
        gm = to_g[leaf_half]
        amb = self.fatgraph.boundary_cycles[self.fatgraph.boundary_cycle_of[gm]]
        qset = set(self.q_halves[i])
        restr = tuple(h for h in amb if h in qset)
        if len(restr) != len(own) or set(restr) != set(own):
            return False, "ambient marked cycle meets the lollipop in the wrong half-edges"
        k = restr.index(own[0])
        if restr[k:] + restr[:k] != own:
            return False, "marked boundary cycle not preserved"
        return True, ""

    def validate(self) -> dict[str, tuple[bool, str]]:
        """Check every defining condition; failures are reported, not raised."""
        fg = self.fatgraph
        g = fg.graph
        report: dict[str, tuple[bool, str]] = {}

        report['connected'] = (g.is_connected(), "")
        biv = [v for v in range(g.n_vertices) if g.valence(v) == 2]
        report['no_bivalent'] = (not biv, f"bivalent vertices {biv}" if biv else "")

        ok, why = True, ""
        for h in range(fg.n_half):
            lab = self.he_label[h]
            if lab != self.he_label[fg.involution[h]]:
                ok, why = False, f"labels differ across edge at half-edge {h}"
                break
        for i in range(self.n_inputs):
            if not self.q_halves[i]:
                ok, why = False, f"lollipop {i} empty"
        for i in range(self.n_outputs):
            if not self.l_halves[i]:
                ok, why = False, f"marking segment {i} empty"
        for j in range(self.n_trees):
            if not self.t_halves[j]:
                ok, why = False, f"tree {j} empty"
        report['edge_partition'] = (ok, why)
        if not (report['connected'][0] and report['edge_partition'][0]):
            return report

        ok, why = True, ""
        for i in range(self.n_inputs):
            try:
                good, detail = self._check_lollipop(i)
            except (GraphError, DiagramError) as exc:
                good, detail = False, str(exc)
            if not good:
                ok, why = False, f"Q_{i}: {detail}"
                break
        report['q_lollipop'] = (ok, why)

        ok, why = True, ""
        for i in range(self.n_outputs):
            hs = self.l_halves[i]
            if len(hs) != 2:
                ok, why = False, f"L_{i} is not a single edge"
                break
            n_leaf = sum(1 for h in hs if g.valence(g.source[h]) == 1)
            if n_leaf != 1:
                ok, why = False, f"L_{i} has {n_leaf} ambient leaves, expected 1"
                break
        report['l_segment'] = (ok, why)

        bad = [(j, fg.source[h]) for j in range(self.n_trees) for h in self.t_halves[j]
               if g.valence(fg.source[h]) == 1]
        report['t_no_leaf'] = (not bad, f"tree leaf of the ambient graph at {bad}" if bad else "")

        ok, why = True, ""
        for v in range(g.n_vertices):
            if g.valence(v) == 1:
                continue
            qc = sum(1 for i in range(self.n_inputs)
                     if any(fg.source[h] == v for h in self.q_halves[i]))
            fc = sum(1 for j in range(self.n_trees) if v in self.fundamental[j])
            if not ((qc == 1 and fc == 0) or (qc == 0 and fc == 1)):
                ok, why = False, f"vertex {v}: in {qc} lollipops, fundamental in {fc} trees"
                break
        report['vertex_membership'] = (ok, why)

        ok, why = True, ""
        for j in range(self.n_trees):
            tverts = {fg.source[h] for h in self.t_halves[j]}
            if not self.fundamental[j] <= tverts:
                ok, why = False, f"tree {j}: fundamental vertices outside the tree"
                break
            for v in self.fundamental[j]:
                if sum(1 for h in self.t_halves[j] if fg.source[h] == v) < 2:
                    ok, why = False, f"tree {j}: fundamental vertex {v} not internal"
            if not ok:
                break
        report['fundamental_internal'] = (ok, why)

        ok, why = True, ""
        if report['fundamental_internal'][0]:
            for j in range(self.n_trees):
                try:
                    td = _build_tree_data(fg, j, self.t_halves[j], self.fundamental[j])
                except GraphError as exc:
                    ok, why = False, f"tree {j}: {exc}"
                    break
                if not td.fg.graph.is_tree():
                    ok, why = False, f"tree {j} does not explode to a tree"
                    break
        report['t_tree'] = (ok, why)

        # no cycle of fundamental / non-fundamental coincidences
        edges = set()
        for a in range(self.n_trees):
            for b in range(self.n_trees):
                if a == b:
                    continue
                nonfund_b = {fg.source[h] for h in self.t_halves[b]} - self.fundamental[b]
                if self.fundamental[a] & nonfund_b:
                    edges.add((a, b))
        color = [0] * self.n_trees
        acyclic = True

        def dfs(x):
            nonlocal acyclic
            color[x] = 1
            for (a, b) in edges:
                if a == x:
                    if color[b] == 1:
                        acyclic = False
                    elif color[b] == 0:
                        dfs(b)
            color[x] = 2

        for x in range(self.n_trees):
            if color[x] == 0:
                dfs(x)
        report['t_no_cycle'] = (acyclic, "" if acyclic else "cycle of tree coincidences")

        ok, why = True, ""
        for v in g.leaves:
            lab = self.he_label[g.half_edges_at[v][0]]
            if lab[0] == 'T':
                ok, why = False, f"leaf {v} belongs to a tree"
                break
        if ok:
            for cyc in fg.boundary_cycles:
                marks = [h for h in cyc if g.valence(fg.source[h]) == 1]
                if len(marks) != 1:
                    ok, why = False, f"boundary cycle with {len(marks)} markings"
                    break
        report['marked'] = (ok, why)
        return report

    @cached_property
    def is_valid(self) -> bool:
        return all(ok for ok, _ in self.validate().values())

    # -- canonical form -----------------------------------------------------

    @cached_property
    def canonical(self) -> tuple[bytes, tuple[int, ...]]:
        """Canonical code and relabeling, rooted at the first lollipop's marking.

        The root is unique, so a single deterministic traversal canonicalizes;
        tree indices are renamed by first visit (the trees are an unordered
        collection), lollipop and marking indices are preserved.
        """
        colors = []
        groups = []
        for h in range(self.fatgraph.n_half):
            lab = self.he_label[h]
            if lab[0] == 'T':
                v = self.fatgraph.source[h]
                fund = v in self.fundamental[lab[1]]
                colors.append(('T', -1, fund))
                groups.append(('T', lab[1]))
            else:
                colors.append((lab[0], lab[1], False))
                groups.append(lab)
        root = self.q_leaf_half[0]
        return canonical_code(self.fatgraph, colors, start_candidates=[root],
                              groups=groups, return_relabel=True)

    @property
    def code(self) -> bytes:
        return self.canonical[0]

    @cached_property
    def reference_ordering(self) -> "Ordering":
        """Trees and leaves ordered by the canonical relabeling; orientation anchor."""
        _, order = self.canonical
        rank = {gh: i for i, gh in enumerate(order)}
        tree_key = {t.index: min(rank[gh] for gh in t.halves) for t in self.trees}
        trees = tuple(sorted(range(self.n_trees), key=lambda j: tree_key[j]))
        leaves = tuple(sorted(self.leaves, key=lambda jl: rank[jl[1]]))
        return Ordering(trees, leaves)


def validate_combinatorial(csd: CombinatorialStringDiagram) -> dict[str, tuple[bool, str]]:
    return csd.validate()


def intersection_graph(csd: CombinatorialStringDiagram) -> IGraph:
    return csd.igraph


# ---------------------------------------------------------------------------
# orderings and orientations


@dataclass(frozen=True)
class Ordering:
    trees: tuple[int, ...]
    leaves: tuple[tuple[int, int], ...]


def perm_sign(perm) -> int:
    """Sign of a permutation given as a sequence of distinct comparables."""
    idx = {x: i for i, x in enumerate(sorted(perm))}
    p = [idx[x] for x in perm]
    sign = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        n = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            n += 1
        if n % 2 == 0:
            sign = -sign
    return sign


def _relative_sign(a, b) -> int:
    if sorted(a) != sorted(b):
        raise DiagramError("orderings are over different sets")
    pos = {x: i for i, x in enumerate(a)}
    return perm_sign([pos[x] for x in b])


def orientation_sign(o1: Ordering, o2: Ordering) -> int:
    """+1 iff the two orderings give the same orientation."""
    return _relative_sign(o1.trees, o2.trees) * _relative_sign(o1.leaves, o2.leaves)


def same_orientation(o1: Ordering, o2: Ordering) -> bool:
    return orientation_sign(o1, o2) == 1


# ---------------------------------------------------------------------------
# metric string diagrams


@dataclass(frozen=True)
class StringDiagram:
    csd: CombinatorialStringDiagram
    length: tuple[Fraction, ...]   # per half-edge

    @cached_property
    def mg(self) -> MetricFatgraph:
        return MetricFatgraph(self.csd.fatgraph, self.length)

    def validate_metric(self) -> dict[str, tuple[bool, str]]:
        report: dict[str, tuple[bool, str]] = {}
        bad = [e for e in self.csd.external_edges if self.length[e] != 0]
        report['external_zero'] = (not bad, f"external edges with nonzero length {bad}" if bad else "")
        ok, why = True, ""
        for i in range(self.csd.n_inputs):
            tot = sum((self.length[h] for h in self.csd.q_halves[i]
                       if h < self.csd.fatgraph.involution[h]), ZERO)
            if tot != 1:
                ok, why = False, f"Q_{i} has total length {tot}"
                break
        report['q_unit'] = (ok, why)
        ok, why = True, ""
        for t in self.csd.trees:
            sb, _ = is_short_branched(t.metric(self.length))
            if not sb:
                ok, why = False, f"tree {t.index} is not short branched"
                break
        report['t_short_branched'] = (ok, why)
        return report

    @cached_property
    def is_valid(self) -> bool:
        return self.csd.is_valid and all(ok for ok, _ in self.validate_metric().values())

    @cached_property
    def is_degenerate(self) -> bool:
        """Whether some internal edge has length zero or some branch is prunable."""
        if any(self.length[e] == 0 for e in self.csd.internal_edges):
            return True
        for t in self.csd.trees:
            mt = t.metric(self.length)
            if any(is_prunable(mt, h) for h in branch_half_edges(mt.fatgraph)):
                return True
        return False

    def metric_tree(self, j: int) -> MetricFatgraph:
        return self.csd.trees[j].metric(self.length)

    @cached_property
    def ig_metric(self) -> MetricFatgraph:
        return self.csd.igraph.metric(self.length)

    def q_cycle(self, i: int):
        """Lollipop i as its own marked metric fatgraph: (metric, cycle, to_g)."""
        sub, to_g = self.csd.fatgraph.subfatgraph(frozenset(self.csd.q_halves[i]))
        mg = MetricFatgraph(sub, tuple(self.length[gh] for gh in to_g))
        loc = {gh: k for k, gh in enumerate(to_g)}
        leaf_local = loc[self.csd.q_leaf_half[i]]
        for cyc in sub.boundary_cycles:
            if leaf_local in cyc:
                return mg, cyc, to_g
        raise DiagramError("lollipop marking not found on any cycle")

    @cached_property
    def q_position(self) -> dict[int, Fraction]:
        """Arc position of every lollipop vertex along its input circle."""
        out = {}
        for i in range(self.csd.n_inputs):
            mg, cyc, to_g = self.q_cycle(i)
            for lv in range(mg.fatgraph.n_vertices):
                lh = mg.fatgraph.graph.half_edges_at[lv][0]
                gv = self.csd.fatgraph.source[to_g[lh]]
                out[gv] = vertex_cycle_position(mg, cyc, lv)
        return out

    def leaf_site(self, leaf):
        """Where a tree leaf is attached: ('q', i, position) or ('t', j, vertex)."""
        gv = self.csd.leaf_host(leaf)
        if gv in self.csd.q_vertices:
            for i in range(self.csd.n_inputs):
                if any(self.csd.fatgraph.source[h] == gv for h in self.csd.q_halves[i]):
                    return ('q', i, self.q_position[gv])
            raise DiagramError("unreachable: lollipop vertex without a lollipop")
        for j in range(self.csd.n_trees):
            if gv in self.csd.fundamental[j]:
                return ('t', j, gv)
        raise DiagramError(f"tree leaf attached at unclassifiable vertex {gv}")


def inputs_outputs(sd: StringDiagram):
    """Input and output boundary cycles of the ambient graph, with lengths.

    Returns (inputs, outputs): lists of (index, cycle, total length) where
    inputs are the cycles marked by lollipop leaves and outputs the cycles
    marked by marking-segment leaves.
    """
    csd = sd.csd
    fg = csd.fatgraph
    inputs = []
    for i in range(csd.n_inputs):
        c = fg.boundary_cycle_of[csd.q_leaf_half[i]]
        cyc = fg.boundary_cycles[c]
        inputs.append((i, cyc, cycle_length(sd.mg, cyc)))
    outputs = []
    for i in range(csd.n_outputs):
        c = fg.boundary_cycle_of[csd.l_leaf_half[i]]
        cyc = fg.boundary_cycles[c]
        outputs.append((i, cyc, cycle_length(sd.mg, cyc)))
    return inputs, outputs


def is_marked_metric_chord_diagram(sd: StringDiagram) -> bool:
    """Recognize the manageable chord-diagram form.

    True iff each marking segment is disjoint from all trees, every tree is
    a length-one segment and the attachment points of all segments are
    distinct, and every lollipop has total length one.
    """
    csd = sd.csd
    if not sd.is_valid:
        return False
    fg = csd.fatgraph
    tree_vertices = {fg.source[h] for hs in csd.t_halves for h in hs}
    for i in range(csd.n_outputs):
        if csd.l_host_vertex(i) in tree_vertices:
            return False
    ends = []
    for j in range(csd.n_trees):
        hs = csd.t_halves[j]
        if len(hs) != 2:
            return False
        if sd.length[hs[0]] != 1:
            return False
        ends.extend(fg.source[h] for h in hs)
    if len(ends) != len(set(ends)):
        return False
    return True
