"""Straightening: deviations, barycentric coordinates, commuting squares."""

import random
from fractions import Fraction as F

import pytest

from stringtop.diagrams import (DiagramError, branch_half_edges, branch_halves,
                                is_prunable, is_short_branched)
from stringtop.fatgraph import Fatgraph
from stringtop.metric import MetricFatgraph, RPoint, distance
from stringtop.straighten import (ComponentStraightening, SimplexPoint,
                                  barycentric, deviation, ordered_partition,
                                  straighten_component, straighten_tree,
                                  v_cell_decomposition)

from helpers import (caterpillar, path_graph, random_short_branched_tree,
                     random_tree_point, segment_graph, star_tree,
                     two_circles_one_segment)


class TestDeviation:
    def test_unit_segment(self):
        # query at distance t from one end: the far side has leaf count 1
        # and length 1 - t, so its deviation is t
        mt = segment_graph(F(1))
        t = F(2, 7)
        v = RPoint.on_edge(mt, 0, t)
        vc = v_cell_decomposition(mt, v)
        far = vc.node_of_vertex[1]
        assert vc.deviation(vc.point_node, far) == t
        near = vc.node_of_vertex[0]
        assert vc.deviation(vc.point_node, near) == 1 - t

    def test_tripod_center(self):
        # legs summing to the leaf length 2: deviation toward leg i is 1 - l_i
        legs = [F(1, 2), F(3, 4), F(3, 4)]
        mt = star_tree(legs)
        c = RPoint.at_vertex(0)
        vc = v_cell_decomposition(mt, c)
        for i, l in enumerate(legs):
            leaf_node = vc.node_of_vertex[i + 1]
            assert vc.deviation(vc.point_node, leaf_node) == 1 - l

    def test_leaf_sum_is_zero(self):
        mt = star_tree([F(1, 2), F(1, 2), F(1)])
        v = RPoint.at_vertex(1)  # a leaf image
        vc = v_cell_decomposition(mt, v)
        node = vc.node_of_vertex[1]
        total = sum(vc.deviation(node, other)
                    for other in range(vc.n_nodes)
                    if other != node and other in
                    [x for x, _ in ((a, b) for a, b, _l in vc.cells) if True] +
                    [x for _, x in ((a, b) for a, b, _l in vc.cells)]
                    and any((a == node and b == other) or (b == node and a == other)
                            for a, b, _l in vc.cells))
        assert total == 0

    def test_same_cell_rejected(self):
        mt = segment_graph(F(1))
        vc = v_cell_decomposition(mt, RPoint.at_vertex(0))
        with pytest.raises(DiagramError):
            vc.deviation(0, 0)


class TestBarycentric:
    def test_leaf_maps_to_itself(self):
        mt = star_tree([F(1, 2), F(1, 2), F(1)])
        coords = barycentric(mt, RPoint.at_vertex(2))
        assert coords[2] == 1
        assert sum(coords.values()) == 1

    def test_unit_segment_linear(self):
        mt = segment_graph(F(1))
        t = F(3, 11)
        coords = barycentric(mt, RPoint.on_edge(mt, 0, t))
        assert coords[0] == 1 - t and coords[1] == t

    def test_degenerate_tripod_center(self):
        mt = star_tree([F(1, 2), F(1, 2), F(1)])
        coords = barycentric(mt, RPoint.at_vertex(0))
        assert coords[1] == F(1, 2)
        assert coords[2] == F(1, 2)
        assert coords[3] == 0

    def test_not_short_branched_rejected(self):
        mt = star_tree([F(1, 3), F(1, 3), F(1, 3)])
        with pytest.raises(DiagramError):
            barycentric(mt, RPoint.at_vertex(0))

    def test_affine_on_edges(self):
        rng = random.Random(7)
        for _ in range(25):
            mt = random_short_branched_tree(rng, max_leaves=6)
            edges = [e for e in mt.fatgraph.graph.edges if mt.edge_length(e) > 0]
            if not edges:
                continue
            e = edges[rng.randrange(len(edges))]
            l = mt.edge_length(e)
            a = straighten_tree(mt, RPoint.on_edge(mt, e, l * F(1, 4)))
            b = straighten_tree(mt, RPoint.on_edge(mt, e, l * F(3, 4)))
            mid = straighten_tree(mt, RPoint.on_edge(mt, e, l * F(1, 2)))
            for la, ca, cb, cm in zip(a.labels, a.coords, b.coords, mid.coords):
                assert cm == (ca + cb) / 2


class TestAppendixProperties:
    """The exact identities behind the straightening formula."""

    def _trees(self, n, seed=11):
        rng = random.Random(seed)
        return [random_short_branched_tree(rng, max_leaves=8) for _ in range(n)], rng

    def test_coordinates_sum_to_one(self):
        trees, rng = self._trees(120)
        for mt in trees:
            v = random_tree_point(mt, rng)
            assert sum(barycentric(mt, v).values()) == 1

    def test_deviation_bounds(self):
        trees, rng = self._trees(80)
        for mt in trees:
            v = random_tree_point(mt, rng)
            vc = v_cell_decomposition(mt, v)
            for a, b, _l in vc.cells:
                assert 0 <= vc.deviation(a, b) < 1
                assert 0 <= vc.deviation(b, a) < 1

    def test_deviation_pair_sum(self):
        trees, rng = self._trees(80)
        for mt in trees:
            v = random_tree_point(mt, rng)
            vc = v_cell_decomposition(mt, v)
            for a, b, l in vc.cells:
                assert vc.deviation(a, b) + vc.deviation(b, a) == 1 - l

    def test_leaf_sum_dichotomy(self):
        trees, rng = self._trees(80)
        for mt in trees:
            v = random_tree_point(mt, rng)
            vc = v_cell_decomposition(mt, v)
            for node in range(vc.n_nodes):
                neighbors = set()
                for a, b, _l in vc.cells:
                    if a == node:
                        neighbors.add(b)
                    if b == node:
                        neighbors.add(a)
                if not neighbors:
                    continue
                total = sum(vc.deviation(node, nb) for nb in neighbors)
                if vc.leaf_count[node] > 0:
                    assert total == 0
                else:
                    assert total == 1


def contract_zero_edge(mt, e):
    """Contract a zero-length edge of a metric tree, tracking vertices."""
    fg2, hmap, vmap = mt.fatgraph.contract_edge(e)
    lengths = {}
    for x in mt.fatgraph.graph.edges:
        if x != e:
            lengths[min(hmap[x], hmap[mt.fatgraph.involution[x]])] = mt.edge_length(x)
    return MetricFatgraph.from_edge_lengths(fg2, lengths), hmap, vmap


class TestContractionSquare:
    def test_zero_edge_contraction_commutes(self):
        rng = random.Random(23)
        checked = 0
        while checked < 40:
            mt = random_short_branched_tree(rng, max_leaves=6)
            fg = mt.fatgraph
            # plant a zero edge by splitting an existing positive edge
            edges = [e for e in fg.graph.edges if mt.edge_length(e) > 0]
            e = edges[rng.randrange(len(edges))]
            mt2 = _subdivide(mt, e, rng)
            zeros = [x for x in mt2.fatgraph.graph.edges if mt2.edge_length(x) == 0]
            if not zeros:
                continue
            z = zeros[0]
            mt3, hmap, vmap = contract_zero_edge(mt2, z)
            assert is_short_branched(mt3)[0]
            for _ in range(4):
                p = random_tree_point(mt3, rng)
                # the same point in the uncontracted tree
                if p.is_vertex:
                    pre = [v for v in range(mt2.fatgraph.n_vertices)
                           if vmap[v] == p.vertex]
                    q = RPoint.at_vertex(pre[0])
                else:
                    old = next(x for x in mt2.fatgraph.graph.edges
                               if x != z and min(hmap[x], hmap[mt2.fatgraph.involution[x]]) == p.half)
                    q = RPoint.on_edge(mt2, old, p.t if hmap[old] == p.half
                                       else mt2.edge_length(old) - p.t)
                a = barycentric(mt2, q)
                b = barycentric(mt3, p)
                bl = {min(hmap[x], hmap[mt2.fatgraph.involution[x]]): c
                      for x, c in (("unused", 0),)} if False else b
                # leaf vertices correspond through vmap
                for w, c in a.items():
                    assert b[vmap[w]] == c
            checked += 1


def _subdivide(mt, e, rng):
    """Split edge e at an interior combinatorial point with a zero edge."""
    fg = mt.fatgraph
    n = fg.n_half
    inv = list(fg.involution)
    eb = inv[e]
    # new vertex w, new halves n (at w) and n+1 (at old target)
    inv[e] = n
    inv += [e, n + 1, eb]
    inv[eb] = n + 1
    orders = [list(fg.cyclic_orders[v]) for v in range(fg.n_vertices)]
    for o in orders:
        if eb in o:
            o[o.index(eb)] = n + 1
    orders.append([n, eb])
    fg2 = Fatgraph.from_cyclic_orders(tuple(inv), orders)
    lengths = {}
    for x in fg.graph.edges:
        if x == e:
            continue
        lengths[fg2.graph.edge_rep(x)] = mt.edge_length(x)
    lengths[fg2.graph.edge_rep(e)] = mt.edge_length(e)
    lengths[fg2.graph.edge_rep(n + 1)] = F(0)
    return MetricFatgraph.from_edge_lengths(fg2, lengths)


class TestGraftSquare:
    def test_pruning_composition_matches(self):
        """Straightening a tree equals straightening its pollard and branch
        and including, exercising points and leaves on both sides."""
        rng = random.Random(41)
        checked = 0
        while checked < 40:
            mt = random_short_branched_tree(rng, max_leaves=7)
            fg = mt.fatgraph
            prunable = [h for h in branch_half_edges(fg) if is_prunable(mt, h)]
            if not prunable:
                # push the metric to a prunable face: scale a branch up
                mt = _make_prunable(mt, rng)
                if mt is None:
                    continue
                fg = mt.fatgraph
                prunable = [h for h in branch_half_edges(fg) if is_prunable(mt, h)]
                if not prunable:
                    continue
            h = prunable[0]
            bh = branch_halves(fg, h)
            br, br_map = fg.subfatgraph(bh)
            po, po_map = fg.subfatgraph(frozenset(range(fg.n_half)) - bh)
            mbr = MetricFatgraph(br, tuple(mt.length[g] for g in br_map))
            mpo = MetricFatgraph(po, tuple(mt.length[g] for g in po_map))
            assert is_short_branched(mbr)[0] and is_short_branched(mpo)[0]
            # the junction vertex in each piece
            s_h = fg.source[h]
            br_junction = next(v for v in range(br.n_vertices)
                               if fg.source[br_map[br.graph.half_edges_at[v][0]]] == s_h
                               and br.graph.valence(v) == 1)
            po_junction = next(v for v in range(po.n_vertices)
                               if any(fg.source[po_map[x]] == s_h
                                      for x in po.graph.half_edges_at[v]))
            graft = barycentric(mpo, RPoint.at_vertex(po_junction))

            def composed(point_in, piece):
                """Straighten in a piece, then include into the whole tree."""
                if piece == 'pollard':
                    local = barycentric(mpo, point_in)
                    out = {}
                    for w, c in local.items():
                        out[fg.source[po_map[po.graph.half_edges_at[w][0]]]] = c
                    return out
                local = barycentric(mbr, point_in)
                out = {}
                for w, c in local.items():
                    gv = fg.source[br_map[br.graph.half_edges_at[w][0]]]
                    if w == br_junction:
                        for gw, gc in graft.items():
                            tgt = fg.source[po_map[po.graph.half_edges_at[gw][0]]]
                            out[tgt] = out.get(tgt, F(0)) + c * gc
                    else:
                        out[gv] = out.get(gv, F(0)) + c
                return out

            for _ in range(4):
                p = random_tree_point(mt, rng)
                direct = barycentric(mt, p)
                if p.is_vertex:
                    gv = p.vertex
                    on_branch = any(fg.source[g] == gv for g in bh) and gv != s_h
                else:
                    on_branch = p.half in bh
                if on_branch or (p.is_vertex and p.vertex == s_h):
                    # locate in the branch piece
                    if p.is_vertex:
                        lv = next(v for v in range(br.n_vertices)
                                  if fg.source[br_map[br.graph.half_edges_at[v][0]]] == p.vertex
                                  and (p.vertex != s_h or br.graph.valence(v) == 1))
                        q = RPoint.at_vertex(lv)
                    else:
                        lh = br_map.index(p.half)
                        q = RPoint.on_edge(mbr, lh, p.t)
                    got = composed(q, 'branch')
                else:
                    if p.is_vertex:
                        lv = next(v for v in range(po.n_vertices)
                                  if fg.source[po_map[po.graph.half_edges_at[v][0]]] == p.vertex)
                        q = RPoint.at_vertex(lv)
                    else:
                        lh = po_map.index(p.half)
                        q = RPoint.on_edge(mpo, lh, p.t)
                    got = composed(q, 'pollard')
                want = {w: c for w, c in direct.items()}
                got_full = {w: got.get(w, F(0)) for w in want}
                assert got_full == want
            checked += 1


def _make_prunable(mt, rng):
    """Move the metric onto a prunable facet of the tree polytope."""
    from helpers import tree_polytope
    poly, evars = tree_polytope(mt.fatgraph)
    for facet in poly.facets:
        tags = facet['tags']
        if any(t[0] == 'branch' for t in tags):
            coords = poly.face_barycenter(facet['vertices'])
            lengths = dict(zip(evars, coords))
            return MetricFatgraph.from_edge_lengths(mt.fatgraph, lengths)
    return None


class TestComponentStraightening:
    def test_single_segment_matches_tree_straightening(self):
        sd = two_circles_one_segment()
        ig = sd.csd.igraph
        mt = sd.metric_tree(0)
        cs = ComponentStraightening(sd, 0)
        e_local = 0
        t = F(2, 5)
        p_ig = RPoint.on_edge(sd.ig_metric, e_local, t)
        sp = cs.of_ig_point(p_ig)
        direct = straighten_tree(mt, RPoint.on_edge(mt, 0, t))
        named = {sd.csd.trees[0].vertex_tag[v][1]: c
                 for v, c in direct.as_dict().items()}
        assert sp.as_dict() == {l: named[l] for l in sp.labels}

    def test_component_leaf_is_simplex_vertex(self):
        sd = two_circles_one_segment()
        ig = sd.csd.igraph
        cs = ComponentStraightening(sd, 0)
        leaf = ig.leaf_names[0]
        sp = cs.of_ig_point(RPoint.at_vertex(ig.leaf_vertex[leaf]))
        assert sp[leaf] == 1

    def test_ordered_partition_examples(self):
        sd = two_circles_one_segment()
        assert ordered_partition(sd, 0) == [[0]]

    def test_stacked_trees_compose_linearly(self):
        # path tree 0 with a segment tree 1 hanging from its middle vertex
        from helpers import find_valid_assembly, _lengths
        csd = find_valid_assembly(
            1, [[('tl', 0, 0), ('tl', 1, 1), ('tl', 0, 2), ('ls', 0)]],
            [([(0, 1), (1, 2)], {1: [('tl', 1, 0)]}), ([(0, 1)], {})], 1)
        from stringtop.moduli import diagram_polytope, interior_diagram
        poly, ev = diagram_polytope(csd)
        from stringtop.moduli import metric_from_coords
        sd = metric_from_coords(csd, ev, poly.barycenter)
        assert ordered_partition(sd, 0) == [[0], [1]]
        cs = ComponentStraightening(sd, 0)
        # the hanging tree's far leaf straightens through the carrier's middle
        td1 = sd.csd.trees[1]
        mt1 = sd.metric_tree(1)
        leaf_on_tree = next(gh for gh in td1.leaf_names
                            if sd.leaf_site((1, gh))[0] == 't')
        leaf_on_circle = next(gh for gh in td1.leaf_names
                              if sd.leaf_site((1, gh))[0] == 'q')
        lv = td1.leaf_vertex[leaf_on_circle]
        sp = cs.of_tree_point(1, RPoint.at_vertex(lv))
        assert sp[leaf_on_circle] == 1
        # a point in the middle of the hanging segment mixes the carrier image
        e1 = td1.local_of[leaf_on_tree] // 1
        sp_mid = cs.of_tree_point(1, RPoint.on_edge(mt1, 0, mt1.edge_length(0) / 2))
        carrier = ComponentStraightening(sd, 0)
        mid_vertex = next(gv for gv in sd.csd.fundamental[0])
        through = carrier.of_tree_point(
            0, RPoint.at_vertex(sd.csd.trees[0].internal_vertex[mid_vertex]))
        for l in sp_mid.labels:
            expect = F(1, 2) * (1 if l == leaf_on_circle else 0) \
                + F(1, 2) * through[l]
            assert sp_mid[l] == expect
