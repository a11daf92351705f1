"""Fatgraphs, string diagrams, their moduli complexes, and the heart map."""

from .fatgraph import Fatgraph, Graph, GraphError, canonical_code
from .metric import MetricFatgraph, RPoint, distance
from .diagrams import (CombinatorialStringDiagram, DiagramError, Ordering,
                       StringDiagram, is_marked_metric_chord_diagram,
                       is_short_branched, orientation_sign)
from .straighten import SimplexPoint, barycentric, straighten_tree
from .moduli import BudgetError, SDComplex, enumerate_cells
from .homology import HomologyGroup, all_homology, homology, smith_normal_form
from .torus import (Heart, TorusLoop, TorusPoint, geodesic_interpolation,
                    in_N, in_S, in_n, in_s, outputs, theta)

__all__ = [
    "Fatgraph", "Graph", "GraphError", "canonical_code",
    "MetricFatgraph", "RPoint", "distance",
    "CombinatorialStringDiagram", "DiagramError", "Ordering", "StringDiagram",
    "is_marked_metric_chord_diagram", "is_short_branched", "orientation_sign",
    "SimplexPoint", "barycentric", "straighten_tree",
    "BudgetError", "SDComplex", "enumerate_cells",
    "HomologyGroup", "all_homology", "homology", "smith_normal_form",
    "Heart", "TorusLoop", "TorusPoint", "geodesic_interpolation",
    "in_N", "in_S", "in_n", "in_s", "outputs", "theta",
]
