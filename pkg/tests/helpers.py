"""Shared builders and generators for the test suite."""

from fractions import Fraction
import random

from stringtop.diagrams import CombinatorialStringDiagram, StringDiagram
from stringtop.fatgraph import Fatgraph
from stringtop.linalg import Polytope
from stringtop.metric import MetricFatgraph
from stringtop.moduli import assemble, metric_from_coords, tree_shapes
from stringtop.torus import TorusLoop, TorusPoint

F = Fraction


def segment_graph(length=F(1)):
    fg = Fatgraph.from_cyclic_orders((1, 0), [[0], [1]])
    return MetricFatgraph.from_edge_lengths(fg, {0: length})


def path_graph(lengths):
    """A path with the given edge lengths: vertices 0..n, edge i joins i, i+1."""
    n = len(lengths)
    inv = []
    orders = [[] for _ in range(n + 1)]
    for i in range(n):
        a, b = 2 * i, 2 * i + 1
        inv += [b, a]
        orders[i].append(a)
        orders[i + 1].append(b)
    fg = Fatgraph.from_cyclic_orders(tuple(inv), orders)
    return MetricFatgraph.from_edge_lengths(fg, {2 * i: F(l) for i, l in enumerate(lengths)})


def star_tree(leg_lengths):
    """A star: center vertex 0, one leg per length, leaf vertices 1.."""
    n = len(leg_lengths)
    inv = []
    center = []
    orders = [center] + [[] for _ in range(n)]
    for i in range(n):
        a, b = 2 * i, 2 * i + 1
        inv += [b, a]
        center.append(a)
        orders[i + 1].append(b)
    fg = Fatgraph.from_cyclic_orders(tuple(inv), orders)
    return MetricFatgraph.from_edge_lengths(fg, {2 * i: F(l) for i, l in enumerate(leg_lengths)})


def caterpillar(a, b, m, c, d):
    """Two trivalent vertices joined by an edge of length m, legs a, b and c, d."""
    # vertices: 0, 1 internal; 2,3,4,5 leaves; edges: 0:(0-2) 1:(0-3) 2:(0-1) 3:(1-4) 4:(1-5)
    inv = (1, 0, 3, 2, 5, 4, 7, 6, 9, 8)
    orders = [[0, 2, 4], [5, 6, 8], [1], [3], [7], [9]]
    fg = Fatgraph.from_cyclic_orders(inv, orders)
    return MetricFatgraph.from_edge_lengths(
        fg, {0: F(a), 2: F(b), 4: F(m), 6: F(c), 8: F(d)})


def tree_polytope(mt_or_fg):
    """The balanced short-branched polytope of a standalone tree."""
    from stringtop.diagrams import branch_half_edges, branch_halves, branch_leaf_length, leaf_length
    fg = mt_or_fg.fatgraph if isinstance(mt_or_fg, MetricFatgraph) else mt_or_fg
    evars = tuple(fg.graph.edges)
    idx = {e: i for i, e in enumerate(evars)}
    n = len(evars)
    row = [F(0)] * n
    for e in evars:
        row[idx[e]] = F(1)
    eqs = [(tuple(row), F(leaf_length(fg.graph)))]
    ineqs = []
    for i, e in enumerate(evars):
        r = [F(0)] * n
        r[i] = F(-1)
        ineqs.append((tuple(r), F(0), ('zero', e)))
    for h in branch_half_edges(fg):
        halves = branch_halves(fg, h)
        r = [F(0)] * n
        for x in halves:
            if x < fg.involution[x]:
                r[idx[x]] = F(1)
        ineqs.append((tuple(r), F(branch_leaf_length(fg, halves)), ('branch', h)))
    return Polytope(n, eqs, ineqs), evars


def random_rational(rng, den=60):
    return F(rng.randrange(den + 1), den)


def random_convex_point(poly, rng, den=16):
    """A random rational point of the polytope, biased toward the interior."""
    vs = poly.vertices
    weights = [F(1 + rng.randrange(den)) for _ in vs]
    total = sum(weights)
    weights = [w / total for w in weights]
    return tuple(sum((w * v[i] for w, v in zip(weights, vs)), F(0))
                 for i in range(poly.n))


def random_tree_edges(rng, max_leaves=8):
    """A uniform random labeled tree with between 2 and max_leaves leaves."""
    while True:
        n_v = rng.randrange(2, 2 * max_leaves - 1)
        if n_v == 2:
            edges = [(0, 1)]
        else:
            seq = [rng.randrange(n_v) for _ in range(n_v - 2)]
            from stringtop.moduli import _prufer_decode
            edges = _prufer_decode(seq, n_v)
        deg = [0] * n_v
        for x, y in edges:
            deg[x] += 1
            deg[y] += 1
        if 2 <= sum(1 for d in deg if d == 1) <= max_leaves:
            return edges, n_v


def random_short_branched_tree(rng, max_leaves=8):
    """A random tree shape with a random nondegenerate short-branched metric."""
    edges, n_v = random_tree_edges(rng, max_leaves)
    inv = []
    orders = [[] for _ in range(n_v)]
    for i, (x, y) in enumerate(edges):
        a, b = 2 * i, 2 * i + 1
        inv += [b, a]
        orders[x].append(a)
        orders[y].append(b)
    fg = Fatgraph.from_cyclic_orders(tuple(inv), orders)
    poly, evars = tree_polytope(fg)
    coords = random_convex_point(poly, rng)
    lengths = dict(zip(evars, coords))
    return MetricFatgraph.from_edge_lengths(fg, lengths)


def random_tree_point(mt, rng):
    from stringtop.metric import RPoint
    fg = mt.fatgraph
    edges = [e for e in fg.graph.edges]
    e = edges[rng.randrange(len(edges))]
    l = mt.edge_length(e)
    if l == 0 or rng.random() < 0.15:
        return RPoint.at_vertex(rng.randrange(fg.n_vertices))
    t = l * F(rng.randrange(0, 13), 12)
    return RPoint.on_edge(mt, e, t)


# -- standard diagrams -------------------------------------------------------

def sd_011_cell(position=None):
    """The (0,1,1) diagram with the marking at arc position s (the 1-cell) or
    at the lollipop vertex (the 0-cell)."""
    if position is None:
        csd = assemble(1, [[['E', 'N', 'P', ('ls', 0)]]], [], 1)
        return StringDiagram(csd, _lengths(csd, {}))
    s = F(position)
    csd = assemble(1, [[['E', 'N', 'P'], ['P', 'N', ('ls', 0)]]], [], 1)
    arcs = csd.internal_edges
    return StringDiagram(csd, _lengths(csd, {arcs[0]: s, arcs[1]: 1 - s}))


def _lengths(csd, edge_lengths):
    vec = [F(0)] * csd.fatgraph.n_half
    for e, l in edge_lengths.items():
        vec[e] = F(l)
        vec[csd.fatgraph.involution[e]] = F(l)
    return tuple(vec)


def two_circles_one_segment(arc1=F(1, 2), arc2=F(1, 3)):
    """Two lollipops joined by a unit segment tree, marking segments on each
    circle's free cycle; the (-2,2,2)-style chord shape restricted to one tree.

    Wait: one segment gives chi = -1, so this is the (-1,2,1) shape: the
    second output cycle is shared.
    """
    circles = [
        [['E', 'N', 'P'], ['P', 'N', ('tl', 0, 0)], ['P', 'N', ('ls', 0)]],
        [['E', 'N', 'P'], ['P', 'N', ('tl', 0, 1)]],
    ]
    trees = [([(0, 1)], {})]
    csd = assemble(2, circles, trees, 1)
    seg = [e for e in csd.fatgraph.graph.edges if csd.he_label[e] == ('T', 0)][0]
    arcs1 = [e for e in csd.internal_edges if csd.he_label[e] == ('Q', 0)]
    arcs2 = [e for e in csd.internal_edges if csd.he_label[e] == ('Q', 1)]
    lengths = {seg: F(1)}
    lengths[arcs1[0]] = arc1
    lengths[arcs1[1]] = F(1, 4)
    lengths[arcs1[2]] = 1 - arc1 - F(1, 4)
    lengths[arcs2[0]] = arc2
    lengths[arcs2[1]] = 1 - arc2
    return StringDiagram(csd, _lengths(csd, lengths))


def diagram_from_cell(cx, cell_index, coords=None):
    """A metric diagram in the (relative interior of the) given cell."""
    cell = cx.cells[cell_index]
    ti = cx.types[cell.code]
    if coords is None:
        coords = ti.polytope.barycenter
    return metric_from_coords(ti.csd, ti.evars, coords)


def find_valid_assembly(k, items_per_circle, trees_spec, n_marks):
    """Search cyclic-order arrangements until a valid diagram appears.

    items_per_circle: one token list per circle (tokens placed one per
    site, in the given rotational order); trees_spec: (edges, vertex item
    lists) per tree.  Tries side placements and vertex orders.
    """
    import itertools
    from stringtop.diagrams import DiagramError
    from stringtop.fatgraph import GraphError

    def site_opts(tok):
        return [['P', 'N', tok], ['P', tok, 'N']]

    circle_opts = []
    for items in items_per_circle:
        per_site = [site_opts(t) for t in items]
        circle_opts.append([[['E', 'N', 'P']] + [list(s) for s in sides]
                            for sides in itertools.product(*per_site)])
    vertex_keys = []
    vertex_opts = []
    for t, (edges, vitems) in enumerate(trees_spec):
        th_at = {}
        for e, (x, y) in enumerate(edges):
            th_at.setdefault(x, []).append(('th', e, 0))
            th_at.setdefault(y, []).append(('th', e, 1))
        for v, base in sorted(th_at.items()):
            if len(base) == 1:
                continue
            rest = base[1:] + list(vitems.get(v, []))
            vertex_keys.append((t, v))
            vertex_opts.append([[base[0]] + list(p)
                                for p in itertools.permutations(rest)])
    for circles in itertools.product(*circle_opts):
        for vpick in itertools.product(*vertex_opts):
            orders = [dict() for _ in trees_spec]
            for (t, v), order in zip(vertex_keys, vpick):
                orders[t][v] = order
            trees = [(list(trees_spec[t][0]), orders[t])
                     for t in range(len(trees_spec))]
            try:
                csd = assemble(k, [list(c) for c in circles], trees, n_marks)
            except (DiagramError, GraphError):
                continue
            if csd.is_valid:
                return csd
    raise AssertionError("no valid arrangement found for the fixture")


# -- loops --------------------------------------------------------------------

def constant_loop(point):
    return TorusLoop.constant(point)


def loop_through(values_at, d=2, fill=None):
    """A loop hitting given (time, point) pairs, linearly interpolated."""
    items = sorted(values_at.items())
    times = [t for t, _ in items]
    pts = [p for _, p in items]
    if times[0] != 0:
        times = [F(0)] + times
        pts = [pts[0]] + pts
    if times[-1] != 1:
        times = times + [F(1)]
        pts = pts + [pts[0]]
    else:
        pts[-1] = pts[0]
    return TorusLoop(tuple(times), tuple(pts))


def random_point_near(rng, center, radius, d=2, den=720):
    """A random rational torus point strictly within radius of the center."""
    while True:
        offs = [F(rng.randrange(-den, den + 1), den) * radius for _ in range(d)]
        if sum(o * o for o in offs) < radius * radius:
            return TorusPoint(tuple(c + o for c, o in zip(center.coords, offs)))


def loops_in_small_locus(sd, rng, shrink=F(1, 4), d=2):
    """Random loops whose leaf values are clustered tightly per component.

    The per-component value spread is bounded by shrink times the small
    Lipschitz threshold times the least leaf distance, which puts the pair
    (diagram, loops) well inside the small locus.
    """
    from stringtop.metric import RPoint, distance
    from stringtop.torus import R_CONVEXITY, chi_of
    csd = sd.csd
    ig = csd.igraph
    chi = -chi_of(sd)
    base = TorusPoint(tuple(F(rng.randrange(720), 720) for _ in range(d)))
    centers = {}
    for comp in range(len(ig.components)):
        centers[comp] = random_point_near(rng, base, F(1, 20), d=d)
    eps_small = R_CONVEXITY / (2 * chi) if chi else F(1)
    values = {}
    for comp in range(len(ig.components)):
        leaves = ig.component_leaves(comp)
        mind = None
        mg = sd.ig_metric
        for i in range(len(leaves)):
            for k in range(i + 1, len(leaves)):
                dd = distance(mg, RPoint.at_vertex(ig.leaf_vertex[leaves[i]]),
                              RPoint.at_vertex(ig.leaf_vertex[leaves[k]]))
                mind = dd if mind is None else min(mind, dd)
        radius = (eps_small * (mind if mind is not None else F(1)) * shrink) / 2
        if radius <= 0:
            radius = F(1, 1000)
        for gh in leaves:
            values[gh] = random_point_near(rng, centers[comp], radius, d=d)
    loops = []
    for i in range(csd.n_inputs):
        at = {}
        for (j, gh) in csd.leaves:
            site = sd.leaf_site((j, gh))
            if site[0] == 'q' and site[1] == i:
                at[site[2] % 1] = values[gh]
        if not at:
            at[F(0)] = random_point_near(rng, base, F(1, 20), d=d)
        loops.append(loop_through(at, d=d))
    return loops, values
