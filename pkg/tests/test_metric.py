"""Realization points, exact distances, and circle parametrizations."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from stringtop.fatgraph import Fatgraph, GraphError
from stringtop.metric import (MetricFatgraph, RPoint, cycle_length, distance,
                              marked_cycle_point, marked_cycle_point_reversed,
                              points_coincide, vertex_cycle_position)

from helpers import path_graph, segment_graph


def circle(lengths):
    """A cycle graph with the given arc lengths."""
    n = len(lengths)
    inv = []
    orders = [[] for _ in range(n)]
    for i in range(n):
        a, b = 2 * i, 2 * i + 1
        inv += [b, a]
        orders[i].append(a)
        orders[(i + 1) % n].append(b)
    fg = Fatgraph.from_cyclic_orders(tuple(inv), [o[::-1] for o in orders])
    return MetricFatgraph.from_edge_lengths(fg, {2 * i: F(l) for i, l in enumerate(lengths)})


def marked_lollipop(arcs):
    """A lollipop whose circle part has the given arc lengths."""
    n = len(arcs)
    inv = [1, 0]
    site_orders = [[] for _ in range(n)]
    for i in range(n):
        a, b = 2 + 2 * i, 3 + 2 * i
        inv += [b, a]
        site_orders[i].append(a)
        site_orders[(i + 1) % n].append(b)
    orders = [[1], [0] + site_orders[0][::-1]] + [o[::-1] for o in site_orders[1:]]
    fg = Fatgraph.from_cyclic_orders(tuple(inv), orders)
    lengths = {0: F(0)}
    lengths.update({2 + 2 * i: F(l) for i, l in enumerate(arcs)})
    return MetricFatgraph.from_edge_lengths(fg, lengths)


class TestDistance:
    def test_same_point(self):
        mg = segment_graph(F(3, 2))
        p = RPoint.on_edge(mg, 0, F(1, 3))
        assert distance(mg, p, p) == 0

    def test_segment_endpoints(self):
        mg = segment_graph(F(3, 2))
        assert distance(mg, RPoint.at_vertex(0), RPoint.at_vertex(1)) == F(3, 2)

    def test_circle_opposite_points(self):
        # both arcs give 1/2, computed by hand
        mg = circle([F(1, 2), F(1, 2)])
        assert distance(mg, RPoint.at_vertex(0), RPoint.at_vertex(1)) == F(1, 2)

    def test_circle_shorter_arc_wins(self):
        mg = circle([F(1, 4), F(3, 4)])
        assert distance(mg, RPoint.at_vertex(0), RPoint.at_vertex(1)) == F(1, 4)

    def test_interior_points_same_edge_both_routes(self):
        mg = circle([F(1)])
        p = RPoint.on_edge(mg, 0, F(1, 10))
        q = RPoint.on_edge(mg, 0, F(9, 10))
        assert distance(mg, p, q) == F(1, 5)

    def test_zero_length_edges_cost_nothing(self):
        mg = path_graph([F(1, 2), F(0), F(1, 3)])
        assert distance(mg, RPoint.at_vertex(0), RPoint.at_vertex(3)) == F(5, 6)
        assert points_coincide(mg, RPoint.at_vertex(1), RPoint.at_vertex(2))

    def test_different_components_error(self):
        fg = Fatgraph.from_cyclic_orders((1, 0, 3, 2), [[0], [1], [2], [3]])
        mg = MetricFatgraph.from_edge_lengths(fg, {0: F(1), 2: F(1)})
        with pytest.raises(GraphError):
            distance(mg, RPoint.at_vertex(0), RPoint.at_vertex(2))

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=30, deadline=None)
    def test_triangle_inequality_on_path(self, rng):
        mg = path_graph([F(rng.randrange(1, 9), 8) for _ in range(3)])
        pts = []
        for _ in range(3):
            e = 2 * rng.randrange(3)
            t = mg.edge_length(e) * F(rng.randrange(0, 5), 4)
            pts.append(RPoint.on_edge(mg, e, t))
        a, b, c = pts
        assert distance(mg, a, c) <= distance(mg, a, b) + distance(mg, b, c)
        assert distance(mg, a, b) == distance(mg, b, a)


class TestRPoint:
    def test_offsets_normalize_to_vertices(self):
        mg = segment_graph(F(2))
        assert RPoint.on_edge(mg, 0, 0) == RPoint.at_vertex(0)
        assert RPoint.on_edge(mg, 0, 2) == RPoint.at_vertex(1)

    def test_lesser_half_is_stored(self):
        mg = segment_graph(F(2))
        p = RPoint.on_edge(mg, 1, F(1, 2))
        assert p.half == 0 and p.t == F(3, 2)

    def test_out_of_range(self):
        mg = segment_graph(F(1))
        with pytest.raises(GraphError):
            RPoint.on_edge(mg, 0, F(3, 2))


class TestBoundaryParametrization:
    def test_t_zero_is_marking(self):
        mg = marked_lollipop([F(1, 2), F(1, 2)])
        cyc = next(c for c in mg.fatgraph.boundary_cycles if 1 in c)
        assert marked_cycle_point(mg, cyc, 0) == RPoint.at_vertex(0)
        total = cycle_length(mg, cyc)
        assert marked_cycle_point(mg, cyc, total) == RPoint.at_vertex(0)

    def test_zero_length_cycle_is_constant(self):
        mg = marked_lollipop([F(0), F(0)])
        cyc = next(c for c in mg.fatgraph.boundary_cycles if 1 in c)
        for t in [0]:
            assert marked_cycle_point(mg, cyc, t) == RPoint.at_vertex(0)

    def test_lollipop_midpoint(self):
        # total length 1; the point at arc length 1/2 sits mid-circle
        mg = marked_lollipop([F(1, 2), F(1, 2)])
        cyc = next(c for c in mg.fatgraph.boundary_cycles if 1 in c)
        p = marked_cycle_point(mg, cyc, F(1, 2))
        assert p.is_vertex  # exactly at the far bivalent vertex
        q = marked_cycle_point(mg, cyc, F(1, 4))
        assert not q.is_vertex and q.t in (F(1, 4), F(1, 4))

    def test_reversal_identity(self):
        mg = marked_lollipop([F(1, 3), F(1, 4), F(5, 12)])
        cyc = next(c for c in mg.fatgraph.boundary_cycles if 1 in c)
        total = cycle_length(mg, cyc)
        for t in [F(0), F(1, 7), F(1, 2), F(2, 3), total]:
            assert marked_cycle_point_reversed(mg, cyc, t) == \
                marked_cycle_point(mg, cyc, total - t)

    def test_midpoint_fixed_under_reversal(self):
        mg = marked_lollipop([F(1, 2), F(1, 2)])
        cyc = next(c for c in mg.fatgraph.boundary_cycles if 1 in c)
        total = cycle_length(mg, cyc)
        assert marked_cycle_point_reversed(mg, cyc, total / 2) == \
            marked_cycle_point(mg, cyc, total / 2)

    @given(st.randoms(use_true_random=False))
    @settings(max_examples=25, deadline=None)
    def test_parametrization_is_one_lipschitz(self, rng):
        arcs = [F(rng.randrange(1, 6), 12) for _ in range(3)]
        mg = marked_lollipop(arcs)
        cyc = next(c for c in mg.fatgraph.boundary_cycles if 1 in c)
        total = cycle_length(mg, cyc)
        t1 = total * F(rng.randrange(0, 13), 12)
        t2 = total * F(rng.randrange(0, 13), 12)
        p1 = marked_cycle_point(mg, cyc, t1)
        p2 = marked_cycle_point(mg, cyc, t2)
        assert distance(mg, p1, p2) <= abs(t1 - t2)

    def test_unmarked_cycle_rejected(self):
        mg = circle([F(1)])
        cyc = mg.fatgraph.boundary_cycles[0]
        with pytest.raises(GraphError):
            marked_cycle_point(mg, cyc, 0)

    def test_contracting_zero_edge_is_isometry(self):
        mg = path_graph([F(1, 2), F(0), F(1, 3)])
        fg2, hmap, vmap = mg.fatgraph.contract_edge(2)
        lengths = {}
        for e in mg.fatgraph.graph.edges:
            if e != 2:
                lengths[min(hmap[e], hmap[mg.fatgraph.involution[e]])] = mg.edge_length(e)
        mg2 = MetricFatgraph.from_edge_lengths(fg2, lengths)
        for a in range(mg.fatgraph.n_vertices):
            for b in range(mg.fatgraph.n_vertices):
                d1 = distance(mg, RPoint.at_vertex(a), RPoint.at_vertex(b))
                d2 = distance(mg2, RPoint.at_vertex(vmap[a]), RPoint.at_vertex(vmap[b]))
                assert d1 == d2


class TestCyclePositions:
    def test_positions_accumulate(self):
        mg = marked_lollipop([F(1, 3), F(2, 3)])
        cyc = next(c for c in mg.fatgraph.boundary_cycles if 1 in c)
        assert vertex_cycle_position(mg, cyc, 0) == 0
        assert vertex_cycle_position(mg, cyc, 1) == 0  # stem joined by zero edge
        positions = sorted(vertex_cycle_position(mg, cyc, v)
                           for v in range(mg.fatgraph.n_vertices))
        # the far vertex sits one arc away from the marking, either way around
        assert positions[-1] in (F(1, 3), F(2, 3))
