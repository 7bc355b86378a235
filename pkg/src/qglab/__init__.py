"""Numerical laboratory for Laplacians on finite metric graphs.

Spectra under Neumann-Kirchhoff and rotated delta vertex conditions,
generalized Dirichlet-to-Neumann (Robin) maps, Robin points and domains of
eigenfunctions, spectral flow of boundary-condition families, and winding
numbers of the associated unitary loops.  All headline identities are exact
integer checks at desk scale.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    GenericityError,
    GraphSpecError,
    IllDefinedLevelError,
    QGLabError,
    SolverError,
    TrackingError,
    WindowEndpointError,
)
from .graph import (
    CutResult,
    Edge,
    MetricGraph,
    PointOnGraph,
    betti,
    build_graph,
    cut_at_points,
    cut_at_vertices,
    insert_degree_two,
    orient_for_degree_two,
    parse_graph_file,
    parse_graph_text,
    subdivide,
)

__all__ = [
    "QGLabError",
    "GraphSpecError",
    "SolverError",
    "WindowEndpointError",
    "TrackingError",
    "GenericityError",
    "IllDefinedLevelError",
    "Edge",
    "MetricGraph",
    "PointOnGraph",
    "CutResult",
    "build_graph",
    "orient_for_degree_two",
    "betti",
    "cut_at_points",
    "cut_at_vertices",
    "insert_degree_two",
    "subdivide",
    "parse_graph_file",
    "parse_graph_text",
]
