"""The flat torus R^d/Z^d: loops, interpolation, and the heart map.

The pre-convexity radius of the unit flat torus is exactly 1/4 (half the
injectivity radius; the curvature term is vacuous).  Geodesic
interpolation lifts a configuration to a single chart and takes the
barycentric affine average, so every identity tested here is exact
rational arithmetic.  Ball-containment predicates are decided by the
exact minimal enclosing ball of the lifted configuration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .diagrams import DiagramError, StringDiagram
from .metric import MetricFatgraph, RPoint, cycle_length, distance, vertex_cycle_position
from .straighten import ComponentStraightening, SimplexPoint, barycentric

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)
R_CONVEXITY = Fraction(1, 4)


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'coords',
                           tuple(Fraction(c) % 1 for c in self.coords))

    @property
    def d(self) -> int:
        return len(self.coords)

    @staticmethod
    def of(*coords) -> "TorusPoint":
        return TorusPoint(tuple(Fraction(c) for c in coords))

    def shift(self, vec) -> "TorusPoint":
        return TorusPoint(tuple(c + v for c, v in zip(self.coords, vec)))


def _wrap_delta(a: Fraction, b: Fraction) -> Fraction:
    """The representative of b - a in [-1/2, 1/2)."""
    return (b - a + HALF) % 1 - HALF


def torus_dist2(p: TorusPoint, q: TorusPoint) -> Fraction:
    """Squared distance on the flat torus, exactly."""
    if p.d != q.d:
        raise DiagramError("dimension mismatch")
    return sum((_wrap_delta(a, b) ** 2 for a, b in zip(p.coords, q.coords)), ZERO)


def dist_lt(p: TorusPoint, q: TorusPoint, threshold: Fraction) -> bool:
    """Whether d(p, q) < threshold, decided on squared quantities."""
    threshold = Fraction(threshold)
    if threshold <= 0:
        return False
    return torus_dist2(p, q) < threshold * threshold


def lift_chart(points, base: int = 0):
    """Lift torus points to the chart around the base point's representative.

    Every point maps to the representative whose coordinates lie within
    [-1/2, 1/2) of the base representative.
    """
    b = points[base].coords
    out = []
    for p in points:
        out.append(tuple(bc + _wrap_delta(bc, pc)
                         for bc, pc in zip(b, p.coords)))
    return out


def _circumball(pts):
    """Smallest ball with the given affinely independent points on its boundary."""
    base = pts[0]
    diffs = [[p[i] - base[i] for i in range(len(base))] for p in pts[1:]]
    if not diffs:
        return base, ZERO
    # solve for center c = base + sum x_j diffs_j with |c-p_k| equal for all k
    k = len(diffs)
    A = [[2 * sum((diffs[j][i] * diffs[m][i] for i in range(len(base))), ZERO)
          for j in range(k)] for m in range(k)]
    b = [sum((diffs[m][i] ** 2 for i in range(len(base))), ZERO) for m in range(k)]
    from .linalg import solve_square
    x = solve_square(A, b)
    if x is None:
        return None
    c = tuple(base[i] + sum((x[j] * diffs[j][i] for j in range(k)), ZERO)
              for i in range(len(base)))
    r2 = sum(((c[i] - base[i]) ** 2 for i in range(len(base))), ZERO)
    return c, r2


def min_enclosing_ball2(pts):
    """(center, squared radius) of the exact minimal enclosing ball."""
    if not pts:
        raise DiagramError("empty point set has no enclosing ball")
    d = len(pts[0])
    best = None
    for size in range(1, min(len(pts), d + 1) + 1):
        for sub in itertools.combinations(range(len(pts)), size):
            cb = _circumball([pts[i] for i in sub])
            if cb is None:
                continue
            c, r2 = cb
            if all(sum(((c[i] - p[i]) ** 2 for i in range(d)), ZERO) <= r2
                   for p in pts):
                if best is None or r2 < best[1]:
                    best = (c, r2)
    return best


def in_open_ball(points, radius: Fraction) -> bool:
    """Whether the torus points fit in an open ball of the given radius <= 1/4."""
    radius = Fraction(radius)
    if radius <= 0:
        return False
    if radius > R_CONVEXITY:
        raise DiagramError("ball test is only sound up to the pre-convexity radius")
    lifted = lift_chart(list(points))
    _c, r2 = min_enclosing_ball2(lifted)
    return r2 < radius * radius


def geodesic_interpolation(values, weights: SimplexPoint) -> TorusPoint:
    """Affine average of a chart lift, weighted by a simplex point.

    values: mapping label -> TorusPoint over the weight labels.  The
    configuration must lie in an open ball of the pre-convexity radius.
    """
    pts = [values[l] for l in weights.labels]
    lifted = lift_chart(pts)
    _c, r2 = min_enclosing_ball2(lifted)
    if r2 >= R_CONVEXITY * R_CONVEXITY:
        raise DiagramError("configuration does not lie in a pre-convexity ball")
    d = len(lifted[0])
    avg = tuple(sum((w * p[i] for w, p in zip(weights.coords, lifted)), ZERO)
                for i in range(d))
    return TorusPoint(avg)


@dataclass(frozen=True)
class TorusLoop:
    """A piecewise-geodesic loop with rational breakpoints on [0, 1]."""
    times: tuple[Fraction, ...]
    points: tuple[TorusPoint, ...]

    def __post_init__(self):
        if len(self.times) != len(self.points) or len(self.times) < 2:
            raise DiagramError("a loop needs matching times and points")
        if self.times[0] != 0 or self.times[-1] != 1:
            raise DiagramError("loop breakpoints must start at 0 and end at 1")
        for a, b in zip(self.times, self.times[1:]):
            if not a < b:
                raise DiagramError("loop breakpoints must strictly increase")
        if self.points[0] != self.points[-1]:
            raise DiagramError("loops are closed")
        for p, q in zip(self.points, self.points[1:]):
            if torus_dist2(p, q) >= HALF * HALF:
                raise DiagramError("consecutive breakpoints must be closer than 1/2")

    @staticmethod
    def constant(point: TorusPoint) -> "TorusLoop":
        return TorusLoop((ZERO, ONE), (point, point))

    @property
    def d(self) -> int:
        return self.points[0].d

    def at(self, t) -> TorusPoint:
        """Exact evaluation at a rational time (taken modulo 1)."""
        t = Fraction(t) % 1
        for i in range(len(self.times) - 1):
            if self.times[i] <= t <= self.times[i + 1]:
                a, b = self.points[i], self.points[i + 1]
                s = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
                delta = tuple(_wrap_delta(x, y) for x, y in zip(a.coords, b.coords))
                return TorusPoint(tuple(x + s * dx for x, dx in zip(a.coords, delta)))
        raise DiagramError("time outside the loop domain")

    def rotated(self, s) -> "TorusLoop":
        """The loop t -> loop(t + s)."""
        s = Fraction(s) % 1
        if s == 0:
            return self
        cuts = sorted({(t - s) % 1 for t in self.times} | {ZERO, ONE})
        times = tuple(cuts)
        pts = tuple(self.at(t + s) for t in times)
        return TorusLoop(times, pts)


# ---------------------------------------------------------------------------
# the Lipschitz locus and the heart map


def _component_leaf_data(sd: StringDiagram, loops, comp: int):
    """Leaf names of a component with their loop values and graph positions."""
    ig = sd.csd.igraph
    values = {}
    for gh in ig.component_leaves(comp):
        kind, i, pos = sd.leaf_site((sd.csd.he_label[gh][1], gh))
        if kind != 'q':
            raise DiagramError("intersection-graph leaf not on a lollipop")
        values[gh] = loops[i].at(pos)
    return values


def _leaf_graph_distances(sd: StringDiagram, comp: int):
    ig = sd.csd.igraph
    mg = sd.ig_metric
    leaves = ig.component_leaves(comp)
    out = {}
    for a, b in itertools.combinations(leaves, 2):
        pa = RPoint.at_vertex(ig.leaf_vertex[a])
        pb = RPoint.at_vertex(ig.leaf_vertex[b])
        out[(a, b)] = distance(mg, pa, pb)
    return out


def lipschitz_ok(sd: StringDiagram, loops, eps) -> bool:
    """Whether the loops are eps-Lipschitz with respect to the diagram.

    For every pair of leaves in one component of the intersection graph,
    the torus distance of their loop values must be strictly less than
    eps times their distance in the metric intersection graph.
    """
    eps = Fraction(eps)
    for comp in range(len(sd.csd.igraph.components)):
        values = _component_leaf_data(sd, loops, comp)
        dists = _leaf_graph_distances(sd, comp)
        for (a, b), dg in dists.items():
            bound = eps * dg
            if bound <= 0:
                return False
            if torus_dist2(values[a], values[b]) >= bound * bound:
                return False
    return True


def chi_of(sd: StringDiagram) -> int:
    return sd.csd.fatgraph.graph.euler_characteristic()


def in_S(sd: StringDiagram, loops) -> bool:
    """Membership in the diffuse intersection locus: (r/|chi|)-Lipschitz."""
    chi = chi_of(sd)
    if chi == 0:
        return True
    return lipschitz_ok(sd, loops, R_CONVEXITY / (-chi))


def in_s(sd: StringDiagram, loops) -> bool:
    """The smaller locus: (r/2|chi|)-Lipschitz."""
    chi = chi_of(sd)
    if chi == 0:
        return True
    return lipschitz_ok(sd, loops, R_CONVEXITY / (2 * (-chi)))


class Heart:
    """The extension of input loops over the whole diagram realization.

    On the lollipops the extension is the loops themselves; on each
    component of the intersection graph it is the geodesic interpolation
    of the attachment values at the straightened coordinates.
    """

    def __init__(self, sd: StringDiagram, loops, check: bool = True):
        if len(loops) != sd.csd.n_inputs:
            raise DiagramError("one loop per input is required")
        d = {loop.d for loop in loops}
        if len(d) > 1:
            raise DiagramError("loops live in different dimensions")
        if check and not in_S(sd, loops):
            raise DiagramError("loops are not in the diffuse intersection locus")
        self.sd = sd
        self.loops = list(loops)
        self._straighteners: dict[int, ComponentStraightening] = {}
        self._leaf_values: dict[int, dict] = {}

    def _component(self, comp: int):
        if comp not in self._straighteners:
            self._straighteners[comp] = ComponentStraightening(self.sd, comp)
            self._leaf_values[comp] = _component_leaf_data(self.sd, self.loops, comp)
        return self._straighteners[comp], self._leaf_values[comp]

    def at_vertex(self, gv: int) -> TorusPoint:
        sd = self.sd
        csd = sd.csd
        g = csd.fatgraph.graph
        if gv in csd.q_vertices:
            for i in range(csd.n_inputs):
                if any(csd.fatgraph.source[h] == gv for h in csd.q_halves[i]):
                    return self.loops[i].at(sd.q_position[gv])
        if g.valence(gv) == 1:
            # a marking leaf: its external edge has length zero
            h = g.half_edges_at[gv][0]
            return self.at_vertex(csd.fatgraph.source[csd.fatgraph.involution[h]])
        for j in range(csd.n_trees):
            if gv in csd.fundamental[j]:
                comp = csd.igraph.comp_of_tree[j]
                st, values = self._component(comp)
                pt = RPoint.at_vertex(csd.trees[j].internal_vertex[gv])
                sp = st.of_tree_point(j, pt)
                return geodesic_interpolation(values, sp)
        raise DiagramError(f"vertex {gv} is neither on a lollipop nor fundamental")

    def at(self, point: RPoint) -> TorusPoint:
        """Evaluate the extension at a realization point of the diagram."""
        sd = self.sd
        csd = sd.csd
        if point.is_vertex:
            return self.at_vertex(point.vertex)
        lab = csd.he_label[point.half]
        if lab[0] == 'Q':
            i = lab[1]
            mgq, cyc, to_g = sd.q_cycle(i)
            loc = {gh: kk for kk, gh in enumerate(to_g)}
            lh = loc[point.half]
            # the marked cycle traverses each arc once, by one of its halves
            if lh in cyc:
                pos = vertex_cycle_position(mgq, cyc, mgq.fatgraph.source[lh]) + point.t
            else:
                lhb = mgq.fatgraph.involution[lh]
                pos = vertex_cycle_position(mgq, cyc, mgq.fatgraph.source[lhb]) \
                    + (mgq.edge_length(lh) - point.t)
            return self.loops[i].at(pos % 1)
        if lab[0] == 'L':
            raise DiagramError("marking segments have length zero; use their endpoints")
        j = lab[1]
        comp = csd.igraph.comp_of_tree[j]
        st, values = self._component(comp)
        td = csd.trees[j]
        local = RPoint.on_edge(sd.metric_tree(j), td.local_of[point.half], point.t)
        sp = st.of_tree_point(j, local)
        return geodesic_interpolation(values, sp)


def theta(sd: StringDiagram, loops, point: RPoint) -> TorusPoint:
    """The extension of the loops, evaluated at one realization point."""
    return Heart(sd, loops).at(point)


def heart(sd: StringDiagram, loops) -> Heart:
    """Package the diagram with its extension map."""
    return Heart(sd, loops)


def evaluate_leaves(sd: StringDiagram, loops) -> dict:
    """The configuration sending each tree leaf to the extension at its image."""
    hm = Heart(sd, loops)
    return {leaf: hm.at_vertex(sd.csd.leaf_host(leaf)) for leaf in sd.csd.leaves}


# ---------------------------------------------------------------------------
# outputs


def outputs(sd: StringDiagram, loops) -> list[TorusLoop]:
    """The output loops: the extension pulled back along reversed output cycles.

    Each output boundary cycle is traversed in reverse and rescaled to the
    unit circle.  Q segments follow the input loops; tree segments are
    single geodesic pieces because straightening is affine on edges and
    interpolation is affine in the chart.
    """
    hm = Heart(sd, loops)
    csd = sd.csd
    fg = csd.fatgraph
    out = []
    for i in range(csd.n_outputs):
        cyc = fg.boundary_cycles[fg.boundary_cycle_of[csd.l_leaf_half[i]]]
        total = cycle_length(sd.mg, cyc)
        if total == 0:
            out.append(TorusLoop.constant(hm.at_vertex(fg.source[csd.l_leaf_half[i]])))
            continue
        # rotate so the marking comes first, then traverse in reverse
        marks = [k for k, h in enumerate(cyc) if fg.graph.valence(fg.source[h]) == 1]
        k0 = marks[0]
        cyc = cyc[k0:] + cyc[:k0]
        rev = [fg.involution[h] for h in reversed(cyc)]
        times = [ZERO]
        points = [hm.at_vertex(fg.source[rev[0]])]
        acc = ZERO
        for g in rev:
            l = sd.mg.edge_length(g)
            if l == 0:
                continue
            lab = csd.he_label[g]
            seg_end = acc + l
            if lab[0] == 'Q':
                qi = lab[1]
                mgq, qcyc, to_g = sd.q_cycle(qi)
                loc = {gh: kk for kk, gh in enumerate(to_g)}
                lg = loc[g]
                if lg not in qcyc:
                    raise DiagramError("output cycle runs along an input-cycle arc")
                pos0 = vertex_cycle_position(mgq, qcyc, mgq.fatgraph.source[lg])
                # interior breakpoints of the loop within the swept positions
                inner = sorted((bt - pos0) % 1 for bt in loops[qi].times)
                for u in inner:
                    if ZERO < u < l:
                        times.append(acc + u)
                        points.append(loops[qi].at((pos0 + u) % 1))
                times.append(seg_end)
                points.append(loops[qi].at((pos0 + l) % 1))
            else:
                times.append(seg_end)
                points.append(hm.at_vertex(fg.source[fg.involution[g]]))
            acc = seg_end
        times = [t / total for t in times]
        times[-1] = ONE
        out.append(TorusLoop(tuple(times), tuple(points)))
    return out


def bv_rotation_check(sd: StringDiagram, loop: TorusLoop, sample_times) -> tuple[bool, Fraction]:
    """Verify the circle-of-diagrams rotation identity on a tree-free diagram.

    The single output equals the input rotated by the arc position p of
    the marking vertex; returns (all samples agree exactly, p).
    """
    csd = sd.csd
    if csd.n_trees != 0 or csd.n_inputs != 1 or csd.n_outputs != 1:
        raise DiagramError("the rotation identity lives on tree-free (0,1,1) diagrams")
    host = csd.l_host_vertex(0)
    p = sd.q_position[host]
    out = outputs(sd, [loop])[0]
    ok = all(out.at(t) == loop.at(Fraction(t) + p) for t in sample_times)
    return ok, p


# ---------------------------------------------------------------------------
# configuration spaces over a cell


def _tree_ball_radius(sd: StringDiagram, j: int) -> Fraction:
    chi = -chi_of(sd)
    tlen = sd.metric_tree(j).total_length
    return (tlen / (chi * chi)) * (R_CONVEXITY / 4)


def in_N(sd: StringDiagram, config) -> bool:
    """Whether each tree's leaf values fit in an open pre-convexity ball."""
    for t in sd.csd.trees:
        pts = [config[(t.index, gh)] for gh in t.leaf_names]
        if not in_open_ball(pts, R_CONVEXITY):
            return False
    return True


def in_n(sd: StringDiagram, config) -> bool:
    """The small tubular neighborhood: per-tree radius scaled by tree length."""
    for t in sd.csd.trees:
        pts = [config[(t.index, gh)] for gh in t.leaf_names]
        if not in_open_ball(pts, _tree_ball_radius(sd, t.index)):
            return False
    return True


def nabla(sd: StringDiagram, step, config) -> dict:
    """Push a leaf configuration across a codimension-one degeneration.

    step is the reduction step (contraction or pruning) produced on the
    facet diagram sd.  Contractions relabel; a pruning extends the
    configuration to the new leaf by straightening and interpolation in
    the tree that was split.
    """
    out = {}
    for old, new in step.xi.items():
        out[new] = config[old]
    if step.kind == 'prune':
        (jb, gh) = step.new_leaves[0]
        # the tree that was split, in the source diagram
        j = next(t.index for t in sd.csd.trees if gh in t.halves)
        td = sd.csd.trees[j]
        mt = sd.metric_tree(j)
        values = {x: config[(j, x)] for x in td.leaf_names}
        lv = td.fg.source[td.local_of[gh]]
        coords = barycentric(mt, RPoint.at_vertex(lv))
        named = {td.vertex_tag[v][1]: c for v, c in coords.items()}
        weights = SimplexPoint(tuple(td.leaf_names),
                               tuple(named[x] for x in td.leaf_names))
        out[(jb, gh)] = geodesic_interpolation(values, weights)
    elif step.new_leaves:
        raise DiagramError("only contraction and pruning degenerations carry configurations")
    return out


def chained_balls_bound(point_sets, radii):
    """A common center within the summed radii of chained ball-covered sets.

    Each set must fit in an open ball of its radius; consecutive reordering
    is found so that each new set shares a point with the union so far.
    Returns (center, total radius) with every point strictly within the
    total radius of the center, all verified exactly.
    """
    sets = [list(s) for s in point_sets]
    radii = [Fraction(r) for r in radii]
    if len(sets) != len(radii) or not sets:
        raise DiagramError("point sets and radii must match and be nonempty")
    order = [0]
    remaining = set(range(1, len(sets)))
    covered = set(sets[0])
    while remaining:
        nxt = next((i for i in sorted(remaining) if set(sets[i]) & covered), None)
        if nxt is None:
            raise DiagramError("point sets are not chained by shared points")
        order.append(nxt)
        covered |= set(sets[nxt])
        remaining.discard(nxt)
    # lift everything into the chart of the first point
    allpts = [p for i in order for p in sets[i]]
    lifted = lift_chart(allpts)
    lift_of = dict(zip(allpts, lifted))
    centers = []
    for i in order:
        pts = [lift_of[p] for p in sets[i]]
        for a, b in itertools.combinations(range(len(pts)), 2):
            flat = sum(((x - y) ** 2 for x, y in zip(pts[a], pts[b])), ZERO)
            if flat != torus_dist2(sets[i][a], sets[i][b]):
                raise DiagramError("point sets do not fit in one convex chart")
        c, r2 = min_enclosing_ball2(pts)
        if r2 >= radii[i] ** 2:
            raise DiagramError(f"set {i} does not fit in its stated ball")
        centers.append(c)
    cur_center = centers[0]
    cur_radius = radii[order[0]]
    for step in range(1, len(order)):
        c2 = centers[step]
        r2 = radii[order[step]]
        diff = tuple(b - a for a, b in zip(cur_center, c2))
        len2 = sum((x * x for x in diff), ZERO)
        if len2 == 0:
            cur_radius = cur_radius + r2
            continue
        # binary search a rational t with |t L| < r2 and |(1-t) L| < cur_radius
        lo, hi = ZERO, ONE
        t = HALF
        for _ in range(200):
            if t * t * len2 >= r2 * r2:
                hi = t
            elif (1 - t) * (1 - t) * len2 >= cur_radius * cur_radius:
                lo = t
            else:
                break
            t = (lo + hi) / 2
        else:
            raise DiagramError("could not split the connecting segment")
        cur_center = tuple(a + t * dx for a, dx in zip(cur_center, diff))
        cur_radius = cur_radius + r2
    total = sum(radii, ZERO)
    for p in lifted:
        if sum(((a - b) ** 2 for a, b in zip(p, cur_center)), ZERO) >= total * total:
            raise DiagramError("constructed center does not cover all points")
    return TorusPoint(cur_center), total
