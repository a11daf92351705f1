"""Command-line interface.

Subcommands: validate, enumerate, homology, straighten, heart, bv, cover,
export-dot.  JSON goes to stdout or --out; human-readable summaries go to
stderr.  Exit code 0 on success, 1 on validation failure, 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import jsonio
from .diagrams import DiagramError
from .fatgraph import GraphError
from .homology import all_homology
from .metric import MetricFatgraph, RPoint
from .moduli import enumerate_cells, orientation_cover_components
from .straighten import straighten_tree
from .torus import bv_rotation_check, heart, outputs


def _emit(doc, args):
    text = jsonio.dumps(doc)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def _parse_point(spec: str, mg):
    """Parse a point spec 'e<edge>:<p/q>' or 'v<vertex>'."""
    if spec.startswith("v"):
        return RPoint.at_vertex(int(spec[1:]))
    if spec.startswith("e"):
        edge, _, off = spec[1:].partition(":")
        return RPoint.on_edge(mg, int(edge), Fraction(off))
    raise DiagramError(f"cannot parse point {spec!r}")


def cmd_validate(args):
    sd, _ = jsonio.diagram_from_json(_load(args.diagram))
    report = {name: {"ok": ok, "detail": detail}
              for name, (ok, detail) in sd.csd.validate().items()}
    report.update({name: {"ok": ok, "detail": detail}
                   for name, (ok, detail) in sd.validate_metric().items()})
    _emit(report, args)
    bad = [name for name, r in report.items() if not r["ok"]]
    if bad:
        print("failed: " + ", ".join(bad), file=sys.stderr)
        return 1
    print("all conditions pass", file=sys.stderr)
    return 0


def cmd_enumerate(args):
    cx = enumerate_cells(args.chi, args.inputs, args.outputs, budget=args.budget)
    _emit(jsonio.complex_to_json(cx), args)
    dims = {}
    for c in cx.cells:
        dims[c.dim] = dims.get(c.dim, 0) + 1
    print(f"cells by dimension: {dims}", file=sys.stderr)
    return 0


def cmd_homology(args):
    from .moduli import SDComplex  # complexes are reenumerated from parameters
    doc = _load(args.complex)
    p = doc["params"]
    cx = enumerate_cells(p["chi"], p["k"], p["l"], budget=max(2, -p["chi"]))
    groups = all_homology(cx, args.coeff)
    _emit({str(n): {"betti": g.betti, "torsion": list(g.torsion)}
           for n, g in groups.items()}, args)
    for n in sorted(groups):
        print(f"H_{n} = {groups[n]}", file=sys.stderr)
    return 0


def cmd_straighten(args):
    doc = _load(args.tree)
    fg = jsonio.fatgraph_from_json(doc)
    lengths = {int(e): Fraction(s) for e, s in doc["lengths"].items()}
    mt = MetricFatgraph.from_edge_lengths(fg, lengths)
    point = _parse_point(args.point, mt)
    sp = straighten_tree(mt, point)
    _emit({str(l): jsonio.frac_str(c) for l, c in sp.as_dict().items()}, args)
    return 0


def cmd_heart(args):
    sd, _ = jsonio.diagram_from_json(_load(args.diagram))
    loops = jsonio.loops_from_json(_load(args.loops))
    hm = heart(sd, loops)
    point = _parse_point(args.eval, sd.mg)
    value = hm.at(point)
    _emit({"point": jsonio.rpoint_to_json(point),
           "value": [jsonio.frac_str(c) for c in value.coords]}, args)
    return 0


def cmd_bv(args):
    sd, _ = jsonio.diagram_from_json(_load(args.diagram))
    loop = jsonio.loops_from_json(_load(args.loop))[0]
    samples = [Fraction(i, args.samples) for i in range(args.samples)]
    ok, p = bv_rotation_check(sd, loop, samples)
    _emit({"rotation": jsonio.frac_str(p), "agrees": ok,
           "samples": args.samples}, args)
    print(f"rotation by {p}: {'exact agreement' if ok else 'MISMATCH'}",
          file=sys.stderr)
    return 0 if ok else 1


def cmd_cover(args):
    doc = _load(args.complex)
    p = doc["params"]
    cx = enumerate_cells(p["chi"], p["k"], p["l"], budget=max(2, -p["chi"]))
    _emit(orientation_cover_components(cx), args)
    return 0


def cmd_export_dot(args):
    doc = _load(args.graph)
    fg = jsonio.fatgraph_from_json(doc)
    text = jsonio.fatgraph_to_dot(fg)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="stringtop",
                                 description="string diagram moduli and the heart map")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check every diagram condition")
    p.add_argument("diagram")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("enumerate", help="enumerate a cell complex")
    p.add_argument("--chi", type=int, required=True)
    p.add_argument("--inputs", type=int, required=True)
    p.add_argument("--outputs", type=int, required=True)
    p.add_argument("--budget", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("homology", help="homology of an enumerated complex")
    p.add_argument("complex")
    p.add_argument("--coeff", default="Z", choices=["Z", "Q", "Z2", "Z3", "Z5"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("straighten", help="straighten a tree point")
    p.add_argument("--tree", required=True)
    p.add_argument("--point", required=True, help="e<edge>:<p/q> or v<vertex>")
    p.add_argument("--out")
    p.set_defaults(func=cmd_straighten)

    p = sub.add_parser("heart", help="evaluate the loop extension")
    p.add_argument("diagram")
    p.add_argument("loops")
    p.add_argument("--eval", required=True, help="e<edge>:<p/q> or v<vertex>")
    p.add_argument("--out")
    p.set_defaults(func=cmd_heart)

    p = sub.add_parser("bv", help="check the rotation identity on a (0,1,1) diagram")
    p.add_argument("--diagram", required=True)
    p.add_argument("--loop", required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bv)

    p = sub.add_parser("cover", help="orientation double cover components")
    p.add_argument("complex")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("export-dot", help="DOT drawing of a fatgraph")
    p.add_argument("graph")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_dot)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (DiagramError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
