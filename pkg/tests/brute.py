"""Independent brute-force enumeration oracle for small complexes.

Enumerates every assembly outright: arbitrary numbers of attachments per
circle site, attachments at marked sites, and all cyclic orders at every
vertex, with no seeding or closure.  Slow, but independent of the
production enumerator except for the shared low-level assembler.
"""

import itertools

from stringtop.diagrams import DiagramError
from stringtop.fatgraph import GraphError
from stringtop.moduli import (_partitions, assemble, canonical_instance,
                              diagram_polytope, tree_shapes)


def _ordered_set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for tail in _ordered_set_partitions(rest):
        # first joins an existing block or starts a new one anywhere
        for i in range(len(tail)):
            yield tail[:i] + [[first] + tail[i]] + tail[i + 1:]
        for i in range(len(tail) + 1):
            yield tail[:i] + [[first]] + tail[i:]


def _subsets(items):
    items = list(items)
    for r in range(len(items) + 1):
        yield from (list(c) for c in itertools.combinations(items, r))


def _circle_structures(items):
    """All (site list) structures of a circle hosting the given items."""
    for i0 in _subsets(items):
        rest = [x for x in items if x not in i0]
        for blocks in _ordered_set_partitions(rest):
            marked_tails = itertools.permutations(['P', 'N'] + i0)
            block_opts = []
            for blk in blocks:
                block_opts.append([['P'] + list(p)
                                   for p in itertools.permutations(['N'] + blk)])
            for marked_tail in marked_tails:
                head = [['E'] + list(marked_tail)]
                for chosen in itertools.product(*block_opts):
                    yield head + [list(c) for c in chosen]


def brute_force_types(chi, k, l):
    """Canonical codes of all valid diagram types with a genuine cell."""
    found = {}
    if (k + l + chi) % 2 != 0 or k == 0:
        return found
    for parts in _partitions(-chi):
        n_trees = len(parts)
        total_leaves = sum(p + 1 for p in parts)
        shape_lists = []
        for p in parts:
            shape_lists.append(tree_shapes(p + 1, l + (total_leaves - (p + 1))))
        for shape_pick in itertools.product(*shape_lists):
            shapes = list(shape_pick)
            degs, leaves, internals = [], [], []
            for edges in shapes:
                V = 1 + max(max(e) for e in edges)
                d = [0] * V
                for x, y in edges:
                    d[x] += 1
                    d[y] += 1
                degs.append(d)
                leaves.append([v for v in range(V) if d[v] == 1])
                internals.append([v for v in range(V) if d[v] > 1])
            leaf_items = [(t, v) for t in range(n_trees) for v in leaves[t]]
            leaf_opts = [[('c', i) for i in range(k)]
                         + [('tv', t2, v2) for t2 in range(n_trees) if t2 != t
                            for v2 in internals[t2]]
                         for (t, v) in leaf_items]
            mark_opts = [[('c', i) for i in range(k)]
                         + [('tv', t2, v2) for t2 in range(n_trees)
                            for v2 in internals[t2]]
                         for _ in range(l)]
            for pick in itertools.product(*(leaf_opts + mark_opts)):
                hosts = dict(zip(leaf_items + [('ls', i) for i in range(l)], pick))
                circle_items = [[] for _ in range(k)]
                vertex_items = {}
                for key, host in hosts.items():
                    tok = ('tl', key[0], key[1]) if key[0] != 'ls' else ('ls', key[1])
                    if host[0] == 'c':
                        circle_items[host[1]].append(tok)
                    else:
                        vertex_items.setdefault((host[1], host[2]), []).append(tok)
                vertex_keys, vertex_opts = [], []
                skip = False
                for t, edges in enumerate(shapes):
                    th_at = {}
                    for e, (x, y) in enumerate(edges):
                        th_at.setdefault(x, []).append(('th', e, 0))
                        th_at.setdefault(y, []).append(('th', e, 1))
                    for v in internals[t]:
                        rest = th_at[v][1:] + vertex_items.get((t, v), [])
                        vertex_keys.append((t, v))
                        vertex_opts.append([[th_at[v][0]] + list(p)
                                            for p in itertools.permutations(rest)])
                if skip:
                    continue
                circle_opts = [list(_circle_structures(ci)) for ci in circle_items]
                for circle_pick in itertools.product(*circle_opts):
                    for vertex_pick in itertools.product(*vertex_opts):
                        orders = [dict() for _ in shapes]
                        for (t, v), order in zip(vertex_keys, vertex_pick):
                            orders[t][v] = order
                        trees = [(list(shapes[t]), orders[t])
                                 for t in range(n_trees)]
                        try:
                            csd = assemble(k, list(circle_pick), trees, l)
                        except (DiagramError, GraphError):
                            continue
                        if not csd.is_valid:
                            continue
                        code, csd2, _hm, _tm = canonical_instance(csd)
                        if code in found:
                            continue
                        poly, _ev = diagram_polytope(csd2)
                        if not poly.is_empty and poly.strict_interior:
                            found[code] = csd2
    return found
