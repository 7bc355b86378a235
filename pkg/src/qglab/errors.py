"""Exception hierarchy shared across the package."""

from __future__ import annotations


class QGLabError(Exception):
    """Base class for all package errors."""


class GraphSpecError(QGLabError):
    """Invalid graph description: bad lengths, dangling endpoints, parse errors."""


class SolverError(QGLabError):
    """Eigenvalue solver failure (no nullspace, floor detection, overflow guard)."""


class WindowEndpointError(SolverError):
    """A search-window endpoint landed too close to a detected eigenvalue.

    The caller must shrink or shift the window.
    """

    def __init__(self, message: str, *, endpoint: float, eigenvalue: float):
        super().__init__(message)
        self.endpoint = endpoint
        self.eigenvalue = eigenvalue


class TrackingError(SolverError):
    """Curve matching between parameter samples could not be resolved."""


class GenericityError(QGLabError):
    """An eigenfunction violates a genericity hypothesis (vertex zero, whole-edge
    zero trace, point landing on a vertex of degree other than two)."""


class IllDefinedLevelError(QGLabError):
    """The requested spectral level lies in the spectrum of the decoupled operator,
    so the Robin map is not defined there."""
