"""The cell complex of string diagrams of fixed type (chi, k, l).

Cells are oriented combinatorial string diagram types; each carries the
polytope of its metric structures.  Facets of a polytope correspond to a
zero-length internal edge or a prunable branch; the attaching map reduces
a facet diagram fully (contracting and pruning with induced orientations)
and lands in the interior of a lower cell.

Enumeration is exhaustive over assembly data: tree shapes, attachment
hosts, site structures and cyclic orders, described along the direction
in which each input cycle traverses its circle (every type admits such a
description, and the direction fixes provably safe local cuts on cyclic
orders).  A lean boundary-cycle screen filters candidates before full
validation, and the attaching-map closure doubles as a completeness
check: a facet target outside the enumerated type set raises.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .diagrams import (CombinatorialStringDiagram, DiagramError, Ordering,
                       StringDiagram, branch_half_edges, branch_halves,
                       branch_leaf_length, is_prunable, leaf_length,
                       orientation_sign)
from .fatgraph import Fatgraph, Graph, GraphError
from .linalg import Polytope, det, dot, solve_in_basis

ZERO = Fraction(0)
ONE = Fraction(1)


class BudgetError(RuntimeError):
    """Enumeration parameters exceed the configured resource budget."""


# ---------------------------------------------------------------------------
# the metric polytope of a diagram type


def diagram_polytope(csd: CombinatorialStringDiagram):
    """H-representation of the metric structures on a diagram type.

    Variables are the internal edge lengths in canonical order.  Each
    lollipop sums to one, each tree to its leaf length; lengths are
    nonnegative and each branch is at most its leaf length.  Returns
    (polytope, variable edge order).
    """
    evars = tuple(csd.internal_edges)
    idx = {e: i for i, e in enumerate(evars)}
    n = len(evars)
    fg = csd.fatgraph
    eqs = []
    for i in range(csd.n_inputs):
        row = [ZERO] * n
        for h in csd.q_halves[i]:
            if h < fg.involution[h] and h in idx:
                row[idx[h]] = ONE
        eqs.append((tuple(row), ONE))
    for t in csd.trees:
        row = [ZERO] * n
        for h in t.halves:
            if h < fg.involution[h]:
                row[idx[h]] = ONE
        eqs.append((tuple(row), Fraction(leaf_length(t.fg.graph))))
    ineqs = []
    for i, e in enumerate(evars):
        row = [ZERO] * n
        row[i] = -ONE
        ineqs.append((tuple(row), ZERO, ('zero', e)))
    for t in csd.trees:
        for lh in branch_half_edges(t.fg):
            halves = branch_halves(t.fg, lh)
            row = [ZERO] * n
            for x in halves:
                if x < t.fg.involution[x]:
                    row[idx[fg.edge_rep(t.to_g[x])]] = ONE
            ll = Fraction(branch_leaf_length(t.fg, halves))
            ineqs.append((tuple(row), ll, ('branch', t.index, t.to_g[lh])))
    return Polytope(n, eqs, ineqs), evars


def cell_polytope(csd: CombinatorialStringDiagram) -> Polytope:
    return diagram_polytope(csd)[0]


def interior_diagram(csd: CombinatorialStringDiagram, poly: Polytope, evars) -> StringDiagram:
    """The string diagram at the polytope barycenter."""
    return metric_from_coords(csd, evars, poly.barycenter)


def metric_from_coords(csd, evars, coords) -> StringDiagram:
    vec = [ZERO] * csd.fatgraph.n_half
    for e, x in zip(evars, coords):
        vec[e] = x
        vec[csd.fatgraph.involution[e]] = x
    return StringDiagram(csd, tuple(vec))


# ---------------------------------------------------------------------------
# assembling diagrams from site and vertex orders


def assemble(k: int, circles, trees, n_marks: int) -> CombinatorialStringDiagram:
    """Build a combinatorial string diagram from explicit cyclic orders.

    circles: one list of sites per lollipop; each site is a token list in
    cyclic order.  Site 0 is the marked site and must contain 'E'; every
    site contains 'P' (the half-edge of the arc from the previous site)
    and 'N' (toward the next site).  trees: (edges, orders) pairs with
    edges over local vertices and orders a token list per internal vertex
    over ('th', edge, end) and attachment tokens.  Attachment tokens
    ('tl', tree, leaf) and ('ls', mark) must each occur exactly once.
    """
    half = 0
    q_ext = []
    arcs = []
    for sites in circles:
        q_ext.append((half, half + 1))
        half += 2
        arcs.append([(half + 2 * s, half + 2 * s + 1) for s in range(len(sites))])
        half += 2 * len(sites)
    tree_halves = []
    for edges, _orders in trees:
        tree_halves.append([(half + 2 * e, half + 2 * e + 1) for e in range(len(edges))])
        half += 2 * len(edges)
    l_halves = [(half + 2 * i, half + 2 * i + 1) for i in range(n_marks)]
    half += 2 * n_marks

    involution = [0] * half
    label: list = [None] * half
    for i, (he, hu) in enumerate(q_ext):
        involution[he], involution[hu] = hu, he
        label[he] = label[hu] = ('Q', i)
        for a, b in arcs[i]:
            involution[a], involution[b] = b, a
            label[a] = label[b] = ('Q', i)
    for t, pairs in enumerate(tree_halves):
        for a, b in pairs:
            involution[a], involution[b] = b, a
            label[a] = label[b] = ('T', t)
    for i, (a, b) in enumerate(l_halves):
        involution[a], involution[b] = b, a
        label[a] = label[b] = ('L', i)

    def leaf_half(t, v):
        edges = trees[t][0]
        for e, (x, y) in enumerate(edges):
            if x == v:
                return tree_halves[t][e][0]
            if y == v:
                return tree_halves[t][e][1]
        raise DiagramError(f"tree {t} has no vertex {v}")

    used = []
    orders = []
    for i, sites in enumerate(circles):
        orders.append([q_ext[i][1]])  # the marking leaf
        for s, tokens in enumerate(sites):
            cyc = []
            for tok in tokens:
                if tok == 'E':
                    if s != 0:
                        raise DiagramError("external edge token outside the marked site")
                    cyc.append(q_ext[i][0])
                elif tok == 'P':
                    cyc.append(arcs[i][(s - 1) % len(sites)][1])
                elif tok == 'N':
                    cyc.append(arcs[i][s][0])
                elif tok[0] == 'tl':
                    cyc.append(leaf_half(tok[1], tok[2]))
                    used.append(tok)
                elif tok[0] == 'ls':
                    cyc.append(l_halves[tok[1]][0])
                    used.append(tok)
                else:
                    raise DiagramError(f"bad site token {tok}")
            orders.append(cyc)
    fundamental: list[set[int]] = [set() for _ in trees]
    for t, (edges, vorders) in enumerate(trees):
        n_local = 1 + max(max(x, y) for x, y in edges)
        deg = [0] * n_local
        for x, y in edges:
            deg[x] += 1
            deg[y] += 1
        for v in range(n_local):
            if deg[v] == 1:
                continue
            if v not in vorders:
                raise DiagramError(f"tree {t}: internal vertex {v} has no cyclic order")
            cyc = []
            for tok in vorders[v]:
                if tok[0] == 'th':
                    _, e, end = tok
                    if edges[e][end] != v:
                        raise DiagramError(f"tree {t}: half ({e},{end}) not at vertex {v}")
                    cyc.append(tree_halves[t][e][end])
                elif tok[0] == 'tl':
                    cyc.append(leaf_half(tok[1], tok[2]))
                    used.append(tok)
                elif tok[0] == 'ls':
                    cyc.append(l_halves[tok[1]][0])
                    used.append(tok)
                else:
                    raise DiagramError(f"bad vertex token {tok}")
            fundamental[t].add(len(orders))
            orders.append(cyc)
    for i in range(n_marks):
        orders.append([l_halves[i][1]])

    expected = sorted([('tl', t, v) for t, (edges, _o) in enumerate(trees)
                       for v in range(1 + max(max(x, y) for x, y in edges))
                       if sum(1 for x, y in edges if v in (x, y)) == 1]
                      + [('ls', i) for i in range(n_marks)])
    if sorted(used) != expected:
        raise DiagramError("attachment tokens must each occur exactly once")

    fg = Fatgraph.from_cyclic_orders(tuple(involution), orders)
    return CombinatorialStringDiagram(fg, tuple(label),
                                      tuple(frozenset(f) for f in fundamental))


# ---------------------------------------------------------------------------
# tree shapes


def _prufer_decode(seq, V):
    degree = [1] * V
    for x in seq:
        degree[x] += 1
    edges = []
    seq = list(seq)
    leaves = sorted(v for v in range(V) if degree[v] == 1)
    import heapq
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def _tree_canonical(edges, V):
    """Isomorphism-invariant form of an unrooted tree (rooted at its center)."""
    adj = [[] for _ in range(V)]
    for x, y in edges:
        adj[x].append(y)
        adj[y].append(x)
    if V == 1:
        return ('*',)
    deg = [len(a) for a in adj]
    alive = set(range(V))
    layer = [v for v in alive if deg[v] <= 1]
    while len(alive) > 2:
        nxt = []
        for v in layer:
            alive.discard(v)
            for u in adj[v]:
                if u in alive:
                    deg[u] -= 1
                    if deg[u] == 1:
                        nxt.append(u)
        layer = nxt
    centers = sorted(alive)

    def rooted(v, parent):
        return tuple(sorted(rooted(u, v) for u in adj[v] if u != parent))

    return tuple(sorted(rooted(c, None) for c in centers))


def tree_shapes(n_leaves: int, max_bivalent: int):
    """All tree shapes with the given leaf count and a bivalent-vertex budget.

    Returned as edge lists over dense local vertices; one representative
    per isomorphism class.
    """
    out = []
    seen = set()
    vmax = 2 * n_leaves - 2 + max_bivalent
    for V in range(2, vmax + 1):
        if V == 2:
            candidates = [[(0, 1)]]
        else:
            candidates = (_prufer_decode(seq, V)
                          for seq in itertools.product(range(V), repeat=V - 2))
        for edges in candidates:
            deg = [0] * V
            for x, y in edges:
                deg[x] += 1
                deg[y] += 1
            if sum(1 for d in deg if d == 1) != n_leaves:
                continue
            if sum(1 for d in deg if d == 2) > max_bivalent:
                continue
            key = _tree_canonical(edges, V)
            if key in seen:
                continue
            seen.add(key)
            out.append(tuple(sorted(tuple(sorted(e)) for e in edges)))
    return out


# ---------------------------------------------------------------------------
# oriented diagrams and reductions


@dataclass(frozen=True)
class OrientedSD:
    sd: StringDiagram
    ordering: Ordering


@dataclass
class StepResult:
    osd: OrientedSD
    kind: str
    xi: dict                       # old leaf -> new leaf (partial map)
    new_leaves: tuple              # target leaves not in the image of xi
    edge_map: dict                 # new internal edge -> old internal edge
    hmap: tuple | None = None      # old half -> new half, None for prunings


def _tree_first(ordering: Ordering, j: int) -> Ordering:
    """A representative of the same orientation with tree j first."""
    i = ordering.trees.index(j)
    trees = (j,) + ordering.trees[:i] + ordering.trees[i + 1:]
    leaves = ordering.leaves
    if i % 2 == 1:
        if len(leaves) < 2:
            raise DiagramError("cannot compensate the tree move on fewer than two leaves")
        leaves = (leaves[1], leaves[0]) + leaves[2:]
    return Ordering(trees, leaves)


def _contract_edge_map(csd, hmap, e):
    out = {}
    fg = csd.fatgraph
    for e2 in csd.internal_edges:
        if e2 == e:
            continue
        out[min(hmap[e2], hmap[fg.involution[e2]])] = e2
    return out


def contract_in_diagram(osd: OrientedSD, e: int) -> StepResult:
    """Contract a zero-length internal edge, inducing all diagram data.

    Lollipop arcs and tree edges with a bivalent or fully internal profile
    contract directly; an external tree edge at an at-least-trivalent
    fundamental vertex splits its tree into the branches at that vertex.
    """
    sd, ordering = osd.sd, osd.ordering
    csd = sd.csd
    fg = csd.fatgraph
    if e != fg.edge_rep(e):
        e = fg.edge_rep(e)
    if e not in csd.internal_edges:
        raise DiagramError("only internal edges are contracted")
    if sd.length[e] != 0:
        raise DiagramError("only edges of length zero are contracted")
    lab = csd.he_label[e]
    u, w = fg.source[e], fg.source[fg.involution[e]]

    fg2, hmap, vmap = fg.contract_edge(e)
    n2 = fg2.n_half
    label2: list = [None] * n2
    length2 = [ZERO] * n2
    for h in range(fg.n_half):
        if hmap[h] >= 0:
            label2[hmap[h]] = csd.he_label[h]
            length2[hmap[h]] = sd.length[h]
    edge_map = _contract_edge_map(csd, hmap, e)

    if lab[0] == 'Q':
        fund2 = tuple(frozenset(vmap[v] for v in F) for F in csd.fundamental)
        csd2 = CombinatorialStringDiagram(fg2, tuple(label2), fund2)
        xi = {(j2, gh): (j2, hmap[gh]) for (j2, gh) in csd.leaves}
        ordering2 = Ordering(ordering.trees, tuple(xi[x] for x in ordering.leaves))
        sd2 = StringDiagram(csd2, tuple(length2))
        return StepResult(OrientedSD(sd2, ordering2), 'contract-q', xi, (), edge_map, hmap)

    j = lab[1]
    fu, fw = u in csd.fundamental[j], w in csd.fundamental[j]
    if not fu and not fw:
        raise DiagramError("a segment tree edge has length one and cannot be contracted")
    if fu and fw:
        fund2 = tuple(frozenset(vmap[v] for v in F) for F in csd.fundamental)
        csd2 = CombinatorialStringDiagram(fg2, tuple(label2), fund2)
        xi = {(j2, gh): (j2, hmap[gh]) for (j2, gh) in csd.leaves}
        ordering2 = Ordering(ordering.trees, tuple(xi[x] for x in ordering.leaves))
        sd2 = StringDiagram(csd2, tuple(length2))
        return StepResult(OrientedSD(sd2, ordering2), 'contract-t-internal', xi, (), edge_map, hmap)

    vf, vx = (u, w) if fu else (w, u)
    at_vf = [h for h in csd.t_halves[j] if fg.source[h] == vf]
    ghl = e if fg.source[e] == vx else fg.involution[e]

    if len(at_vf) == 2:
        g = next(h for h in at_vf if h not in (e, fg.involution[e]))
        fund2 = tuple(frozenset(vmap[v] for v in F if not (jj == j and v == vf))
                      for jj, F in enumerate(csd.fundamental))
        csd2 = CombinatorialStringDiagram(fg2, tuple(label2), fund2)
        xi = {}
        for (j2, gh) in csd.leaves:
            if (j2, gh) == (j, ghl):
                xi[(j2, gh)] = (j, hmap[g])
            else:
                xi[(j2, gh)] = (j2, hmap[gh])
        ordering2 = Ordering(ordering.trees, tuple(xi[x] for x in ordering.leaves))
        sd2 = StringDiagram(csd2, tuple(length2))
        return StepResult(OrientedSD(sd2, ordering2), 'contract-t-bivalent', xi, (), edge_map, hmap)

    # split: the tree falls apart into its branches at vf
    td = csd.trees[j]
    pair = (e, fg.involution[e])
    gs = sorted(h for h in at_vf if h not in pair)
    branches = []
    for g in gs:
        bl = branch_halves(td.fg, td.local_of[g])
        bg = frozenset(td.to_g[x] for x in bl)
        branches.append((g, bg))
    branches.sort(key=lambda p: min(p[1]))
    nb = len(branches)
    tmap = {}
    for j2 in range(csd.n_trees):
        if j2 < j:
            tmap[j2] = j2
        elif j2 > j:
            tmap[j2] = j2 + nb - 1
    branch_of_half = {}
    for a, (g, bg) in enumerate(branches):
        for gh in bg:
            branch_of_half[gh] = a
    for h in range(fg.n_half):
        if hmap[h] < 0:
            continue
        l = csd.he_label[h]
        if l[0] == 'T':
            if l[1] == j:
                label2[hmap[h]] = ('T', j + branch_of_half[h])
            else:
                label2[hmap[h]] = ('T', tmap[l[1]])
    fund2: list[frozenset] = [frozenset()] * (csd.n_trees + nb - 1)
    for j2, F in enumerate(csd.fundamental):
        if j2 != j:
            fund2[tmap[j2]] = frozenset(vmap[v] for v in F)
    for a, (g, bg) in enumerate(branches):
        verts = {fg.source[gh] for gh in bg}
        fund2[j + a] = frozenset(vmap[v] for v in csd.fundamental[j]
                                 if v in verts and v != vf)
    csd2 = CombinatorialStringDiagram(fg2, tuple(label2), tuple(fund2))
    xi = {}
    for (j2, gh) in csd.leaves:
        if j2 != j:
            xi[(j2, gh)] = (tmap[j2], hmap[gh])
        elif gh == ghl:
            xi[(j2, gh)] = (j, hmap[branches[0][0]])
        else:
            xi[(j2, gh)] = (j + branch_of_half[gh], hmap[gh])
    new_leaves = tuple((j + a, hmap[g]) for a, (g, bg) in enumerate(branches))
    rep = _tree_first(ordering, j)
    trees2 = tuple(range(j, j + nb)) + tuple(tmap[x] for x in rep.trees[1:])
    leaves2 = new_leaves[1:] + tuple(xi[x] for x in rep.leaves)
    sd2 = StringDiagram(csd2, tuple(length2))
    return StepResult(OrientedSD(sd2, Ordering(trees2, leaves2)), 'contract-t-split',
                      xi, new_leaves[1:], edge_map, hmap)


def prune_in_diagram(osd: OrientedSD, j: int, gh: int) -> StepResult:
    """Split tree j along the prunable branch at half-edge gh.

    The underlying pseudometric fatgraph is unchanged; the tree is
    replaced by its pollard and branch, the pollard first, with the new
    branch leaf added at the front of the leaf ordering.
    """
    sd, ordering = osd.sd, osd.ordering
    csd = sd.csd
    fg = csd.fatgraph
    td = csd.trees[j]
    lh = td.local_of[gh]
    mt = sd.metric_tree(j)
    if not is_prunable(mt, lh):
        raise DiagramError("branch is not prunable")
    bl = branch_halves(td.fg, lh)
    bg = frozenset(td.to_g[x] for x in bl)
    vf = fg.source[gh]

    tmap = {}
    for j2 in range(csd.n_trees):
        tmap[j2] = j2 if j2 <= j else j2 + 1
    label2 = list(csd.he_label)
    for h in range(fg.n_half):
        l = csd.he_label[h]
        if l[0] == 'T':
            if l[1] == j:
                label2[h] = ('T', j + 1) if h in bg else ('T', j)
            else:
                label2[h] = ('T', tmap[l[1]])
    fund2: list[frozenset] = [frozenset()] * (csd.n_trees + 1)
    bverts = {fg.source[h] for h in bg}
    for j2, F in enumerate(csd.fundamental):
        if j2 == j:
            fund2[j] = frozenset(v for v in F if v not in bverts or v == vf)
            fund2[j + 1] = frozenset(v for v in F if v in bverts and v != vf)
        else:
            fund2[tmap[j2]] = F
    csd2 = CombinatorialStringDiagram(fg, tuple(label2), tuple(fund2))
    xi = {}
    for (j2, x) in csd.leaves:
        if j2 == j:
            xi[(j2, x)] = (j + 1, x) if x in bg else (j, x)
        else:
            xi[(j2, x)] = (tmap[j2], x)
    new_leaf = (j + 1, gh)
    rep = _tree_first(ordering, j)
    trees2 = (j, j + 1) + tuple(tmap[x] for x in rep.trees[1:])
    leaves2 = (new_leaf,) + tuple(xi[x] for x in rep.leaves)
    edge_map = {e: e for e in csd.internal_edges}
    sd2 = StringDiagram(csd2, sd.length)
    return StepResult(OrientedSD(sd2, Ordering(trees2, leaves2)), 'prune',
                      xi, (new_leaf,), edge_map, None)


def _find_contractible_zero(sd: StringDiagram):
    csd = sd.csd
    fg = csd.fatgraph
    for e in csd.internal_edges:
        if sd.length[e] != 0:
            continue
        lab = csd.he_label[e]
        if lab[0] == 'Q':
            return e
        j = lab[1]
        u, w = fg.source[e], fg.source[fg.involution[e]]
        fu, fw = u in csd.fundamental[j], w in csd.fundamental[j]
        if fu and fw:
            return e
        vf = u if fu else w
        if sum(1 for h in csd.t_halves[j] if fg.source[h] == vf) == 2:
            return e
    return None


def _find_prunable(sd: StringDiagram):
    for t in sd.csd.trees:
        mt = sd.metric_tree(t.index)
        for lh in branch_half_edges(t.fg):
            if is_prunable(mt, lh):
                return t.index, t.to_g[lh]
    return None


def reduce_fully(osd: OrientedSD):
    """Contract and prune until the diagram is nondegenerate.

    Returns (reduced oriented diagram, edge map reduced -> original,
    list of steps).  Splitting contractions are never needed: a zero
    external tree edge at a trivalent-or-more vertex always makes every
    branch there prunable, so prunings resolve it first.
    """
    edge_map = {e: e for e in osd.sd.csd.internal_edges}
    steps = []
    cur = osd
    while True:
        e = _find_contractible_zero(cur.sd)
        if e is not None:
            st = contract_in_diagram(cur, e)
        else:
            p = _find_prunable(cur.sd)
            if p is None:
                break
            st = prune_in_diagram(cur, *p)
        edge_map = {e2: edge_map[st.edge_map[e2]] for e2 in st.edge_map}
        steps.append(st)
        cur = st.osd
    if any(cur.sd.length[e] == 0 for e in cur.sd.csd.internal_edges):
        raise DiagramError("reduction left a zero-length internal edge")
    return cur, edge_map, steps


# ---------------------------------------------------------------------------
# canonical instances, cells and the complex


def canonical_instance(csd: CombinatorialStringDiagram):
    """Relabel a diagram to its canonical form.

    Returns (code, canonical diagram, half map old -> new, tree map
    old -> new).
    """
    code, order = csd.canonical
    old_to_new = {old: i for i, old in enumerate(order)}
    fg = csd.fatgraph
    vseq = []
    seen = set()
    tmap: dict[int, int] = {}
    for h in order:
        v = fg.source[h]
        if v not in seen:
            seen.add(v)
            vseq.append(v)
        lab = csd.he_label[h]
        if lab[0] == 'T' and lab[1] not in tmap:
            tmap[lab[1]] = len(tmap)
    v_old_new = {v: i for i, v in enumerate(vseq)}
    n = fg.n_half
    source = [0] * n
    inv = [0] * n
    succ = [0] * n
    label = [None] * n
    for i, old in enumerate(order):
        source[i] = v_old_new[fg.source[old]]
        inv[i] = old_to_new[fg.involution[old]]
        succ[i] = old_to_new[fg.succ[old]]
        lab = csd.he_label[old]
        label[i] = ('T', tmap[lab[1]]) if lab[0] == 'T' else lab
    fund = [frozenset()] * csd.n_trees
    for j, F in enumerate(csd.fundamental):
        fund[tmap[j]] = frozenset(v_old_new[v] for v in F)
    csd2 = CombinatorialStringDiagram(
        Fatgraph(Graph(tuple(source), tuple(inv), len(vseq)), tuple(succ)),
        tuple(label), tuple(fund))
    return code, csd2, old_to_new, tmap


def orientation_of(csd_canon: CombinatorialStringDiagram, ordering: Ordering,
                   half_map: dict, tree_map: dict) -> int:
    """Sign of an ordering (in pre-canonical names) against the canonical reference."""
    mapped = Ordering(tuple(tree_map[j] for j in ordering.trees),
                      tuple((tree_map[j], half_map[gh]) for j, gh in ordering.leaves))
    return orientation_sign(mapped, csd_canon.reference_ordering)


@dataclass
class Cell:
    index: int
    code: bytes
    orient: int
    csd: CombinatorialStringDiagram
    dim: int


@dataclass
class Face:
    cell: int
    tags: tuple
    target: int
    sign: int
    edge_map: dict   # target canonical internal edge -> source canonical internal edge


@dataclass
class TypeInfo:
    code: bytes
    csd: CombinatorialStringDiagram
    polytope: Polytope
    evars: tuple
    cells: dict      # orient -> cell index


class SDComplex:
    """An enumerated finite cell complex of oriented string diagrams."""

    def __init__(self, chi: int, k: int, l: int):
        self.chi = chi
        self.k = k
        self.l = l
        self.cells: list[Cell] = []
        self.faces: list[Face] = []
        self.types: dict[bytes, TypeInfo] = {}
        self._codim2_report = None

    @property
    def max_dim(self) -> int:
        return max((c.dim for c in self.cells), default=-1)

    def cells_of_dim(self, n: int) -> list[int]:
        return [c.index for c in self.cells if c.dim == n]

    def boundary_matrix(self, n: int):
        """Integer matrix of the cellular boundary from n-cells to (n-1)-cells."""
        rows = self.cells_of_dim(n - 1)
        cols = self.cells_of_dim(n)
        ri = {c: i for i, c in enumerate(rows)}
        ci = {c: i for i, c in enumerate(cols)}
        m = [[0] * len(cols) for _ in rows]
        for f in self.faces:
            if f.cell in ci and f.target in ri:
                m[ri[f.target]][ci[f.cell]] += f.sign
        return m

    def euler_characteristic_of_complex(self) -> int:
        return sum((-1) ** c.dim for c in self.cells)

    def verify_codim2(self) -> dict:
        if self._codim2_report is None:
            self._codim2_report = verify_codim2(self)
        return self._codim2_report

    @property
    def is_consistent(self) -> bool:
        rep = self.verify_codim2()
        return rep['ok']


def _facet_metric(ti: TypeInfo, facet) -> StringDiagram:
    coords = ti.polytope.face_barycenter(facet['vertices'])
    return metric_from_coords(ti.csd, ti.evars, coords)


def _face_sign(src: TypeInfo, facet, tgt: TypeInfo, edge_map: dict) -> int:
    """Geometric incidence sign of a facet attaching map.

    The source polytope is oriented by its equality-nullspace basis, the
    facet by outward-normal-first, and the sign compares the pushforward
    of the facet orientation with the target's own basis.
    """
    n = src.polytope.dim
    B = src.polytope.orientation_basis
    tag = facet['tags'][0]
    row = next(c for c, _r, t in src.polytope.ineqs if t == tag)
    c = [dot(row, bv) for bv in B]
    p = next(i for i, x in enumerate(c) if x != 0)
    fs = []
    for idx in range(n):
        if idx == p:
            continue
        fc = [ZERO] * n
        fc[idx] = ONE
        fc[p] = -c[idx] / c[p]
        fs.append(fc)
    m0 = [[c[i]] + [f[i] for f in fs] for i in range(n)]
    d0 = det(m0)
    if d0 == 0:
        raise DiagramError("degenerate facet frame")
    s0 = 1 if d0 > 0 else -1
    if n == 1:
        return s0
    if s0 < 0:
        fs[0] = [-x for x in fs[0]]
    src_pos = {e: i for i, e in enumerate(src.evars)}
    pushed = []
    for f in fs:
        xvec = [sum((f[bi] * B[bi][i] for bi in range(n)), ZERO)
                for i in range(len(src.evars))]
        yvec = [xvec[src_pos[edge_map[e]]] for e in tgt.evars]
        pushed.append(tuple(yvec))
    M = solve_in_basis(tgt.polytope.orientation_basis, pushed)
    dM = det(M)
    if dM == 0:
        raise DiagramError("facet map is not an isomorphism onto the target")
    return 1 if dM > 0 else -1


def _attach(ti: TypeInfo, facet, register):
    """Reduce a facet diagram fully; returns (target info, rel orient, edge map, sign)."""
    sd = _facet_metric(ti, facet)
    osd = OrientedSD(sd, ti.csd.reference_ordering)
    red, emap, _steps = reduce_fully(osd)
    code, csd2, half_map, tree_map = canonical_instance(red.sd.csd)
    tgt = register(code, csd2)
    rel = orientation_of(csd2, red.ordering, half_map, tree_map)
    # map: target canonical edge -> reduced-instance edge -> source edge
    red_fg = red.sd.csd.fatgraph
    red_of_new = {new: old for old, new in half_map.items()}
    full_map = {}
    for e_c in csd2.internal_edges:
        e_red = red_fg.edge_rep(red_of_new[e_c])
        full_map[e_c] = emap[e_red]
    sign = _face_sign(ti, facet, tgt, full_map)
    # sanity: the facet must map onto the target polytope bijectively
    src_pos = {e: i for i, e in enumerate(ti.evars)}
    imgs = set()
    for vi in facet['vertices']:
        v = ti.polytope.vertices[vi]
        imgs.add(tuple(v[src_pos[full_map[e]]] for e in tgt.evars))
    if imgs != set(tgt.polytope.vertices):
        raise DiagramError("attaching map does not send the facet onto the target cell")
    return tgt, rel, full_map, sign


def verify_codim2(cx: SDComplex) -> dict:
    """Check path independence on every codimension-two face of every cell.

    For each codimension-two face, the two facet-then-reduce routes must
    land on the same oriented cell with the same edge identification.
    """
    failures = []
    checked = 0
    for code, ti in cx.types.items():
        poly = ti.polytope
        for c2 in poly.codim2_faces:
            routes = []
            for fi in c2['facets']:
                facet = poly.facets[fi]
                coords = poly.face_barycenter(c2['vertices'])
                sd = metric_from_coords(ti.csd, ti.evars, coords)
                osd = OrientedSD(sd, ti.csd.reference_ordering)
                tag = facet['tags'][0]
                if tag[0] == 'zero':
                    st = contract_in_diagram(osd, tag[1])
                else:
                    st = prune_in_diagram(osd, tag[1], tag[2])
                emap0 = st.edge_map
                red, emap, _ = reduce_fully(st.osd)
                emap = {e2: emap0[e] for e2, e in emap.items()}
                tcode, csd2, half_map, tree_map = canonical_instance(red.sd.csd)
                rel = orientation_of(csd2, red.ordering, half_map, tree_map)
                red_of_new = {new: old for old, new in half_map.items()}
                full = {}
                for e_c in csd2.internal_edges:
                    e_red = red.sd.csd.fatgraph.edge_rep(red_of_new[e_c])
                    full[e_c] = emap[e_red]
                routes.append((tcode, rel, full))
            checked += 1
            if not (routes[0][0] == routes[1][0] and routes[0][1] == routes[1][1]
                    and routes[0][2] == routes[1][2]):
                failures.append({'type': code, 'face': sorted(c2['vertices']),
                                 'routes': [(r[0], r[1]) for r in routes]})
    return {'ok': not failures, 'checked': checked, 'failures': failures}


# ---------------------------------------------------------------------------
# seed enumeration


def _partitions(n: int):
    """Partitions of n into nonincreasing positive parts."""
    if n == 0:
        yield ()
        return
    def rec(rest, maxpart):
        if rest == 0:
            yield ()
            return
        for p in range(min(rest, maxpart), 0, -1):
            for tail in rec(rest - p, p):
                yield (p,) + tail
    yield from rec(n, n)


def _connected_hosts(k, n_trees, leaf_hosts):
    parent = list(range(k + n_trees))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for (t, _v), host in leaf_hosts.items():
        a = k + t
        b = host[1] if host[0] == 'c' else k + host[1]
        union(a, b)
    return len({find(x) for x in range(k + n_trees)}) == 1


def _host_acyclic(n_trees, leaf_hosts):
    edges = {(host[1], t) for (t, _v), host in leaf_hosts.items() if host[0] == 'tv'}
    color = [0] * n_trees
    ok = True

    def dfs(x):
        nonlocal ok
        color[x] = 1
        for a, b in edges:
            if a == x:
                if color[b] == 1:
                    ok = False
                elif color[b] == 0:
                    dfs(b)
        color[x] = 2

    for x in range(n_trees):
        if color[x] == 0:
            dfs(x)
    return ok


def _is_tree_token(tok):
    return tok != 'N' and tok[0] == 'tl'


def _ordered_set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for tail in _ordered_set_partitions(rest):
        for i in range(len(tail)):
            yield tail[:i] + [[first] + tail[i]] + tail[i + 1:]
        for i in range(len(tail) + 1):
            yield tail[:i] + [[first]] + tail[i:]


def _circle_structures(items):
    """All circle site structures hosting the items, input-forward.

    Describing the circle along the direction its input cycle traverses
    the arcs, the element after the external edge in the marked cyclic
    order must be the forward arc or a tree detour, and the element after
    a backward arc half must close the corner (the external edge at the
    marked site, wrapping) or detour into a tree; a marking segment or the
    wrong arc half there would break the marked boundary cycle.  Every
    valid type has an input-forward description, so these cuts lose
    nothing.
    """
    out = []
    for r in range(len(items) + 1):
        for i0 in itertools.combinations(items, r):
            rest = [x for x in items if x not in i0]
            marked_tails = []
            for tail in itertools.permutations(['P', 'N'] + list(i0)):
                if not (tail[0] == 'N' or _is_tree_token(tail[0])):
                    continue
                p = tail.index('P')
                if p != len(tail) - 1 and not _is_tree_token(tail[p + 1]):
                    continue
                marked_tails.append(['E'] + list(tail))
            if not marked_tails:
                continue
            for blocks in _ordered_set_partitions(rest):
                block_opts = []
                for blk in blocks:
                    opts = [['P'] + list(t)
                            for t in itertools.permutations(['N'] + blk)
                            if t[0] == 'N' or _is_tree_token(t[0])]
                    block_opts.append(opts)
                if any(not o for o in block_opts):
                    continue
                for marked in marked_tails:
                    for chosen in itertools.product(*block_opts):
                        out.append([marked] + [list(c) for c in chosen])
    return out


def _candidate_types(chi: int, k: int, l: int):
    """Exhaustively generate valid combinatorial string diagram types.

    Trees, hosts and cyclic orders are enumerated outright; candidates
    pass a lean boundary-cycle check before full assembly and validation.
    """
    for parts in _partitions(-chi):
        n_trees = len(parts)
        total_leaves = sum(p + 1 for p in parts)
        shape_lists = [tree_shapes(p + 1, l + (total_leaves - (p + 1)))
                       for p in parts]
        for shape_idx in itertools.product(*(range(len(s)) for s in shape_lists)):
            if any(parts[a] == parts[a + 1] and shape_idx[a] > shape_idx[a + 1]
                   for a in range(n_trees - 1)):
                continue
            shapes = [shape_lists[i][shape_idx[i]] for i in range(n_trees)]
            yield from _shape_candidates(k, l, shapes)


def _shape_candidates(k, l, shapes):
    n_trees = len(shapes)
    degs, leaf_vs, internal_vs = [], [], []
    for edges in shapes:
        V = 1 + max(max(e) for e in edges)
        deg = [0] * V
        for x, y in edges:
            deg[x] += 1
            deg[y] += 1
        degs.append(deg)
        leaf_vs.append([v for v in range(V) if deg[v] == 1])
        internal_vs.append([v for v in range(V) if deg[v] > 1])
    leaf_items = [(t, v) for t in range(n_trees) for v in leaf_vs[t]]
    leaf_choices = [[('c', i) for i in range(k)]
                    + [('tv', t2, v2) for t2 in range(n_trees) if t2 != t
                       for v2 in internal_vs[t2]]
                    for (t, v) in leaf_items]
    mark_choices = [[('c', i) for i in range(k)]
                    + [('tv', t2, v2) for t2 in range(n_trees)
                       for v2 in internal_vs[t2]]
                    for _ in range(l)]

    for leaf_pick in itertools.product(*leaf_choices):
        leaf_hosts = dict(zip(leaf_items, leaf_pick))
        if not _connected_hosts(k, n_trees, leaf_hosts):
            continue
        if not _host_acyclic(n_trees, leaf_hosts):
            continue
        for mark_pick in itertools.product(*mark_choices):
            circle_items: list[list] = [[] for _ in range(k)]
            vertex_items: dict = {}
            for (t, v), host in leaf_hosts.items():
                tok = ('tl', t, v)
                if host[0] == 'c':
                    circle_items[host[1]].append(tok)
                else:
                    vertex_items.setdefault((host[1], host[2]), []).append(tok)
            for i, host in enumerate(mark_pick):
                tok = ('ls', i)
                if host[0] == 'c':
                    circle_items[host[1]].append(tok)
                else:
                    vertex_items.setdefault((host[1], host[2]), []).append(tok)
            if any(not items for items in circle_items):
                continue
            if any(degs[t][v] == 2 and not vertex_items.get((t, v))
                   for t in range(n_trees) for v in internal_vs[t]):
                continue
            yield from _arrangements(k, shapes, circle_items, vertex_items, l)


def _arrangements(k, shapes, circle_items, vertex_items, l):
    circle_options = [_circle_structures(circle_items[i]) for i in range(k)]
    if any(not o for o in circle_options):
        return
    vertex_keys, vertex_opts = [], []
    for t, edges in enumerate(shapes):
        th_at: dict[int, list] = {}
        for e, (x, y) in enumerate(edges):
            th_at.setdefault(x, []).append(('th', e, 0))
            th_at.setdefault(y, []).append(('th', e, 1))
        for v, base in sorted(th_at.items()):
            if len(base) == 1:
                continue
            rest = base[1:] + vertex_items.get((t, v), [])
            vertex_keys.append((t, v))
            vertex_opts.append([[base[0]] + list(p)
                                for p in itertools.permutations(rest)])
    tree_edges = [list(s) for s in shapes]
    for circle_pick in itertools.product(*circle_options):
        lean = _LeanLayout(k, circle_pick, tree_edges, l)
        for vertex_pick in itertools.product(*vertex_opts):
            orders = [dict() for _ in shapes]
            for (t, v), order in zip(vertex_keys, vertex_pick):
                orders[t][v] = order
            if not lean.check(orders):
                continue
            trees = [(tree_edges[t], orders[t]) for t in range(len(shapes))]
            try:
                yield assemble(k, [list(c) for c in circle_pick], trees, l)
            except (DiagramError, GraphError):
                continue


class _LeanLayout:
    """Array-level candidate screen: markedness and lollipop traversal.

    Mirrors the assembler's half-edge layout; checks that every boundary
    cycle carries exactly one marking and that each input cycle meets its
    lollipop exactly in the expected forward traversal.
    """

    def __init__(self, k, circles, trees, n_marks):
        half = 0
        self.k = k
        self.circles = circles
        self.trees = trees
        self.n_marks = n_marks
        q_ext, arcs = [], []
        for sites in circles:
            q_ext.append((half, half + 1))
            half += 2
            arcs.append([(half + 2 * s, half + 2 * s + 1) for s in range(len(sites))])
            half += 2 * len(sites)
        tree_halves = []
        for edges in trees:
            tree_halves.append([(half + 2 * e, half + 2 * e + 1)
                                for e in range(len(edges))])
            half += 2 * len(edges)
        l_halves = [(half + 2 * i, half + 2 * i + 1) for i in range(n_marks)]
        half += 2 * n_marks
        self.n_half = half
        inv = [0] * half
        for he, hu in q_ext:
            inv[he], inv[hu] = hu, he
        for pairs in (arcs + tree_halves + [l_halves]):
            for a, b in pairs:
                inv[a], inv[b] = b, a
        self.inv = inv
        self.q_ext = q_ext
        self.arcs = arcs
        self.tree_halves = tree_halves
        self.l_halves = l_halves
        self.marks = frozenset([hu for _he, hu in q_ext]
                               + [b for _a, b in l_halves])
        leaf_half = {}
        for t, edges in enumerate(trees):
            for e, (x, y) in enumerate(edges):
                for end, v in ((0, x), (1, y)):
                    if sum(1 for ex, ey in edges if v in (ex, ey)) == 1:
                        leaf_half[(t, v)] = tree_halves[t][e][end]
        self.leaf_half = leaf_half
        # partially filled successor map: circle sites are fixed per layout
        succ = [0] * half
        qinfo = []
        for i, sites in enumerate(circles):
            succ[q_ext[i][1]] = q_ext[i][1]
            fwd = []
            m = len(sites)
            for s, tokens in enumerate(sites):
                fwd.append(arcs[i][s][0])
                resolved = [self._resolve(tok, i, s) for tok in tokens]
                for a, b in zip(resolved, resolved[1:] + resolved[:1]):
                    succ[a] = b
            qset = frozenset([q_ext[i][0], q_ext[i][1]]
                             + [h for pair in arcs[i] for h in pair])
            qinfo.append((q_ext[i][1], q_ext[i][0], tuple(fwd), qset))
        for a, b in l_halves:
            succ[b] = b
        self.base_succ = succ
        self.qinfo = qinfo

    def _resolve(self, tok, circle, site):
        if tok == 'E':
            return self.q_ext[circle][0]
        if tok == 'P':
            m = len(self.circles[circle])
            return self.arcs[circle][(site - 1) % m][1]
        if tok == 'N':
            return self.arcs[circle][site][0]
        if tok[0] == 'tl':
            return self.leaf_half[(tok[1], tok[2])]
        return self.l_halves[tok[1]][0]

    def check(self, orders) -> bool:
        succ = list(self.base_succ)
        for t, vorders in enumerate(orders):
            for v, tokens in vorders.items():
                resolved = []
                for tok in tokens:
                    if tok[0] == 'th':
                        resolved.append(self.tree_halves[t][tok[1]][tok[2]])
                    elif tok[0] == 'tl':
                        resolved.append(self.leaf_half[(tok[1], tok[2])])
                    else:
                        resolved.append(self.l_halves[tok[1]][0])
                for a, b in zip(resolved, resolved[1:] + resolved[:1]):
                    succ[a] = b
        inv = self.inv
        marks = self.marks
        seen = bytearray(self.n_half)
        for h0 in range(self.n_half):
            if seen[h0]:
                continue
            m = 0
            x = h0
            while not seen[x]:
                seen[x] = 1
                if x in marks:
                    m += 1
                x = succ[inv[x]]
            if m != 1:
                return False
        for h_u, h_e, fwd, qset in self.qinfo:
            expected = (h_u,) + fwd + (h_e,)
            got = []
            x = h_u
            while True:
                if x in qset:
                    got.append(x)
                    if len(got) > len(expected):
                        return False
                x = succ[inv[x]]
                if x == h_u:
                    break
            if tuple(got) != expected:
                return False
        return True


def enumerate_cells(chi: int, k: int, l: int, budget: int = 2) -> SDComplex:
    """Enumerate the cell complex of string diagrams of type (chi, k, l).

    Seeds the separated diagram types and closes under attaching maps,
    recording faces, signs and coordinate identifications.  Deterministic.
    """
    if chi > 0:
        raise DiagramError("the Euler characteristic of a string diagram is nonpositive")
    if k < 1 or l < 1:
        raise DiagramError("a diagram needs at least one input and one output")
    if -chi > budget:
        raise BudgetError(f"|chi| = {-chi} exceeds the enumeration budget {budget}")
    cx = SDComplex(chi, k, l)
    if (k + l + chi) % 2 != 0 or k == 0 or l == 0:
        return cx

    queue: list[bytes] = []

    def register(code, csd_canon):
        if code in cx.types:
            return cx.types[code]
        poly, evars = diagram_polytope(csd_canon)
        ti = TypeInfo(code, csd_canon, poly, evars, {})
        cx.types[code] = ti
        if not poly.is_empty and poly.strict_interior:
            orients = (1,) if csd_canon.n_trees == 0 else (1, -1)
            for o in orients:
                cell = Cell(len(cx.cells), code, o, csd_canon, poly.dim)
                cx.cells.append(cell)
                ti.cells[o] = cell.index
            queue.append(code)
        return ti

    seen: set[bytes] = set()
    for csd in _candidate_types(chi, k, l):
        code, csd2, _hm, _tm = canonical_instance(csd)
        if code in seen:
            continue
        seen.add(code)
        if not csd2.is_valid:
            continue
        register(code, csd2)

    def register_target(code, csd_canon):
        if code not in cx.types:
            raise DiagramError("attaching map left the enumerated type set; "
                               "enumeration is incomplete")
        return cx.types[code]

    qi = 0
    while qi < len(queue):
        code = queue[qi]
        qi += 1
        ti = cx.types[code]
        for facet in ti.polytope.facets:
            tgt, rel, emap, sign = _attach(ti, facet, register_target)
            if tgt.polytope.dim != ti.polytope.dim - 1:
                raise DiagramError("attaching map changed dimension by more than one")
            for o, cell_idx in ti.cells.items():
                target_orient = 1 if tgt.csd.n_trees == 0 else o * rel
                cx.faces.append(Face(cell_idx, facet['tags'],
                                     tgt.cells[target_orient], sign, emap))
    return cx


# ---------------------------------------------------------------------------
# components and the orientation double cover


def _component_count(nodes, edges):
    parent = {x: x for x in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict = {}
    for x in nodes:
        comps.setdefault(find(x), []).append(x)
    return list(comps.values())


def orientation_cover_components(cx: SDComplex) -> dict:
    """Component counts of the oriented complex over the unoriented one."""
    cell_nodes = [c.index for c in cx.cells]
    cell_edges = [(f.cell, f.target) for f in cx.faces]
    oriented = _component_count(cell_nodes, cell_edges)
    type_nodes = [code for code, ti in cx.types.items() if ti.cells]
    type_edges = [(cx.cells[f.cell].code, cx.cells[f.target].code) for f in cx.faces]
    unoriented = _component_count(type_nodes, type_edges)
    comp_of_cell = {}
    for ci, comp in enumerate(oriented):
        for x in comp:
            comp_of_cell[x] = ci
    per_component = []
    split = True
    for comp in unoriented:
        above = set()
        has_trees = False
        for code in comp:
            ti = cx.types[code]
            if ti.csd.n_trees > 0:
                has_trees = True
            for cell in ti.cells.values():
                above.add(comp_of_cell[cell])
        per_component.append({'types': len(comp), 'sheets': len(above),
                              'has_trees': has_trees})
        if has_trees and len(above) != 2:
            split = False
    return {
        'oriented_components': len(oriented),
        'unoriented_components': len(unoriented),
        'per_component': per_component,
        'cover_splits': split,
    }
