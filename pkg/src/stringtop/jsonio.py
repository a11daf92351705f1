"""JSON and DOT serialization.

Rationals travel as strings "p/q"; half-edges and vertices as integers.
Serialization is canonical (sorted keys, fixed separators) so equal
structures produce byte-identical documents.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .diagrams import CombinatorialStringDiagram, Ordering, StringDiagram
from .fatgraph import Fatgraph, Graph
from .metric import RPoint
from .moduli import SDComplex
from .torus import TorusLoop, TorusPoint


def frac_str(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def parse_frac(s) -> Fraction:
    return Fraction(s)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


# -- graphs -----------------------------------------------------------------

def fatgraph_to_json(fg: Fatgraph) -> dict:
    pairs = sorted([h, fg.involution[h]] for h in range(fg.n_half)
                   if h < fg.involution[h])
    return {
        "half_edges": list(range(fg.n_half)),
        "source": {str(h): fg.source[h] for h in range(fg.n_half)},
        "involution": pairs,
        "cyclic_order": {str(v): list(fg.cyclic_orders[v])
                         for v in range(fg.n_vertices)},
    }


def fatgraph_from_json(doc) -> Fatgraph:
    halves = doc["half_edges"]
    n = len(halves)
    inv = [0] * n
    for a, b in doc["involution"]:
        inv[a], inv[b] = b, a
    orders = [doc["cyclic_order"][str(v)] for v in range(len(doc["cyclic_order"]))]
    return Fatgraph.from_cyclic_orders(tuple(inv), orders)


def diagram_to_json(sd: StringDiagram, ordering: Ordering | None = None) -> dict:
    csd = sd.csd
    fg = csd.fatgraph
    doc = fatgraph_to_json(fg)
    doc["subgraphs"] = {
        "Q": [[e for e in fg.graph.edges if csd.he_label[e] == ('Q', i)]
              for i in range(csd.n_inputs)],
        "L": [[e for e in fg.graph.edges if csd.he_label[e] == ('L', i)]
              for i in range(csd.n_outputs)],
        "T": [{"edges": [e for e in fg.graph.edges if csd.he_label[e] == ('T', j)],
               "fundamental": sorted(csd.fundamental[j])}
              for j in range(csd.n_trees)],
    }
    doc["lengths"] = {str(e): frac_str(sd.length[e]) for e in fg.graph.edges}
    if ordering is not None:
        doc["ordering"] = {"trees": list(ordering.trees),
                           "leaves": [list(x) for x in ordering.leaves]}
    return doc


def diagram_from_json(doc):
    fg = fatgraph_from_json(doc)
    label: list = [None] * fg.n_half
    subs = doc["subgraphs"]
    for i, edges in enumerate(subs["Q"]):
        for e in edges:
            label[e] = label[fg.involution[e]] = ('Q', i)
    for i, edges in enumerate(subs["L"]):
        for e in edges:
            label[e] = label[fg.involution[e]] = ('L', i)
    fund = []
    for j, td in enumerate(subs["T"]):
        for e in td["edges"]:
            label[e] = label[fg.involution[e]] = ('T', j)
        fund.append(frozenset(td["fundamental"]))
    csd = CombinatorialStringDiagram(fg, tuple(label), tuple(fund))
    vec = [Fraction(0)] * fg.n_half
    for e_str, s in doc["lengths"].items():
        e = int(e_str)
        vec[e] = vec[fg.involution[e]] = parse_frac(s)
    sd = StringDiagram(csd, tuple(vec))
    ordering = None
    if "ordering" in doc:
        o = doc["ordering"]
        ordering = Ordering(tuple(o["trees"]),
                            tuple((j, h) for j, h in o["leaves"]))
    return sd, ordering


def rpoint_to_json(p: RPoint) -> dict:
    if p.is_vertex:
        return {"vertex": p.vertex}
    return {"edge": p.half, "t": frac_str(p.t)}


# -- loops ------------------------------------------------------------------

def loop_to_json(loop: TorusLoop) -> dict:
    return {"d": loop.d,
            "breakpoints": [[frac_str(t), [frac_str(c) for c in p.coords]]
                            for t, p in zip(loop.times, loop.points)]}


def loop_from_json(doc) -> TorusLoop:
    times = tuple(parse_frac(t) for t, _p in doc["breakpoints"])
    points = tuple(TorusPoint(tuple(parse_frac(c) for c in p))
                   for _t, p in doc["breakpoints"])
    return TorusLoop(times, points)


def loops_from_json(doc) -> list[TorusLoop]:
    if isinstance(doc, list):
        return [loop_from_json(d) for d in doc]
    return [loop_from_json(doc)]


# -- complexes ---------------------------------------------------------------

def complex_to_json(cx: SDComplex) -> dict:
    cells = []
    for c in cx.cells:
        ti = cx.types[c.code]
        poly = ti.polytope
        cells.append({
            "code": c.code.decode(),
            "orient": c.orient,
            "dim": c.dim,
            "diagram": diagram_to_json(
                StringDiagram(c.csd, tuple(Fraction(0) for _ in range(c.csd.fatgraph.n_half)))),
            "polytope": {
                "variables": list(ti.evars),
                "equalities": [[[frac_str(x) for x in row], frac_str(rhs)]
                               for row, rhs in poly.eqs],
                "inequalities": [[[frac_str(x) for x in row], frac_str(rhs), list(map(str, tag))]
                                 for row, rhs, tag in poly.ineqs],
            },
        })
    faces = [{
        "cell": f.cell,
        "tags": [list(map(str, t)) for t in f.tags],
        "target": f.target,
        "sign": f.sign,
        "coord_map": {str(k): v for k, v in sorted(f.edge_map.items())},
    } for f in cx.faces]
    return {"params": {"chi": cx.chi, "k": cx.k, "l": cx.l},
            "cells": cells, "faces": faces}


# -- DOT ----------------------------------------------------------------------

def fatgraph_to_dot(fg: Fatgraph, name: str = "fatgraph") -> str:
    lines = [f"graph {name} {{"]
    for v in range(fg.n_vertices):
        ports = ",".join(str(h) for h in fg.cyclic_orders[v])
        lines.append(f'  v{v} [label="v{v} ({ports})"];')
    for e in fg.graph.edges:
        a, b = fg.source[e], fg.source[fg.involution[e]]
        lines.append(f'  v{a} -- v{b} [label="{e}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
