"""Robin points and Robin domains of an eigenfunction.

A point x on an edge is a Robin point of f for the angle alpha when the
rotated trace vanishes there: cos(alpha) f(x) = sin(alpha) f'(x), with the
derivative along the edge orientation.  Cutting the graph at all such
points decomposes it into Robin domains.

For lambda > 0 the trace along an edge is again a pure wave,

    tau f(x) = P cos(kx) + Q sin(kx),
    P = a cos(alpha) - b sin(alpha),    Q = (b/k) cos(alpha) + a k sin(alpha),

so its zeros are closed-form and consecutive zeros are exactly pi/k apart.
Nonpositive energies fall back to sampled bisection per edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import edge_eval, mixed_trace, reduce_angle
from .errors import GenericityError
from .graph import (
    HEAD,
    TAIL,
    CutResult,
    MetricGraph,
    PointOnGraph,
    Subdivision,
    betti,
    cut_at_vertices,
    subdivide,
)
from .solver import EigenFunction, carry_through_subdivision

#: Zeros within this fraction of the edge length of an endpoint snap to it.
_SNAP = 1e-9

#: Residual bound for returned points, relative to the trace amplitude.
_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class RobinPointSet:
    """Zeros of the rotated trace of one eigenfunction, canonically ordered.

    ``at_vertex[i]`` is the (degree-2) vertex id when point i sits at a
    vertex, else None.  Vertex hits are deduplicated across their two
    incident edge ends.
    """

    alpha: float
    lam: float
    points: tuple[PointOnGraph, ...]
    at_vertex: tuple[str | None, ...]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def interior(self) -> tuple[PointOnGraph, ...]:
        return tuple(p for p, v in zip(self.points, self.at_vertex) if v is None)

    @property
    def vertex_names(self) -> tuple[str, ...]:
        return tuple(v for v in self.at_vertex if v is not None)


def _edge_trace_zeros(a: float, b: float, lam: float, length: float, alpha: float) -> list[float]:
    """Zeros of tau f on [0, length] for one edge (tolerant band at the ends)."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    snap = _SNAP * length
    if lam > 1e-9:
        k = math.sqrt(lam)
        P = a * ca - b * sa
        Q = (b / k) * ca + a * k * sa
        amp = math.hypot(P, Q)
        if amp == 0.0 or amp < 1e-14 * max(abs(a), abs(b), 1e-300):
            raise GenericityError("rotated trace vanishes identically on an edge")
        theta = math.atan2(P, -Q)
        x0 = theta / k
        period = math.pi / k
        x0 -= math.floor((x0 + snap) / period) * period
        out = []
        x = x0
        while x <= length + snap:
            if x >= -snap:
                out.append(min(max(x, 0.0), length))
            x += period
        return out

    # nonpositive energy: sampled sign changes, then bisection
    def tau(x: float) -> float:
        t = edge_eval((a, b), lam, x)
        return ca * t.value - sa * t.derivative

    xs = np.linspace(0.0, length, 65)
    vals = np.array([tau(x) for x in xs])
    scale = np.max(np.abs(vals))
    if scale < 1e-13 * max(abs(a), abs(b), 1e-300):
        raise GenericityError("rotated trace vanishes identically on an edge")
    out = []
    for i in range(len(xs) - 1):
        lo, hi, flo = xs[i], xs[i + 1], vals[i]
        if vals[i] == 0.0:
            out.append(float(xs[i]))
            continue
        if (vals[i] > 0) == (vals[i + 1] > 0):
            continue
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = tau(mid)
            if fm == 0.0:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
            if hi - lo < 1e-14 * length:
                break
        out.append(0.5 * (lo + hi))
    if vals[-1] == 0.0:
        out.append(float(length))
    return out


def robin_points(g: MetricGraph, f: EigenFunction, alpha: float) -> RobinPointSet:
    """All Robin points of ``f`` at angle ``alpha``, vertices deduplicated.

    Raises :class:`GenericityError` when the trace vanishes on a whole edge
    or a zero lands on a vertex of degree other than two.
    """
    alpha = reduce_angle(alpha)
    interior: list[PointOnGraph] = []
    vertex_hits: set[str] = set()
    for eidx, e in enumerate(g.edges):
        a, b = f.coeffs[eidx]
        for x in _edge_trace_zeros(a, b, f.lam, e.length, alpha):
            p = PointOnGraph(eidx, x)
            v = g.point_at_vertex(p)
            if v is None:
                interior.append(p)
            elif g.degree(v) == 2:
                vertex_hits.add(v)
            elif g.degree(v) == 1:
                # A boundary vertex is not an internal point: a trace zero
                # there is forced by the vertex condition (Neumann ends kill
                # f' for alpha = pi/2) and carries no partition information.
                continue
            else:
                raise GenericityError(
                    f"Robin point at vertex {v!r} of degree {g.degree(v)}"
                )

    points: list[PointOnGraph] = []
    tags: list[str | None] = []
    for p in sorted(interior, key=lambda q: (q.edge, q.x)):
        points.append(p)
        tags.append(None)
    for v in sorted(vertex_hits):
        eidx, side = g.ends(v)[0]
        x = 0.0 if side == TAIL else g.edges[eidx].length
        points.append(PointOnGraph(eidx, x))
        tags.append(v)

    ps = RobinPointSet(alpha=alpha, lam=f.lam, points=tuple(points), at_vertex=tuple(tags))
    _check_residuals(g, f, ps)
    return ps


def _check_residuals(g: MetricGraph, f: EigenFunction, ps: RobinPointSet) -> None:
    """Independent recheck: every returned point must zero the rotated trace."""
    for p in ps.points:
        e = g.edges[p.edge]
        t = edge_eval(f.coeffs[p.edge], f.lam, p.x, length=e.length)
        m = mixed_trace(ps.alpha, t)
        xs = np.linspace(0.0, e.length, 17)
        scale = max(
            abs(mixed_trace(ps.alpha, edge_eval(f.coeffs[p.edge], f.lam, x)).tau) for x in xs
        )
        if abs(m.tau) > 100.0 * _RESIDUAL_RTOL * max(scale, 1e-300):
            raise GenericityError(
                f"trace residual {m.tau:.2e} at point {p} exceeds tolerance"
            )


@dataclass(frozen=True)
class RobinDomainPartition:
    """The graph cut at a Robin point set, with its component count."""

    subdivision: Subdivision | None
    cut: CutResult
    nu: int

    @property
    def graph(self) -> MetricGraph:
        return self.cut.graph


def robin_domains(g: MetricGraph, ps: RobinPointSet) -> RobinDomainPartition:
    """Cut ``g`` at the points of ``ps`` and label the components."""
    sub = subdivide(g, ps.interior) if ps.interior else None
    g2 = sub.graph if sub else g
    names = [sub.vertex_at(p) for p in ps.interior] if sub else []
    names += list(ps.vertex_names)
    cut = cut_at_vertices(g2, names)
    return RobinDomainPartition(subdivision=sub, cut=cut, nu=cut.n_components)


def euler_identity_check(g: MetricGraph, ps: RobinPointSet, part: RobinDomainPartition) -> tuple[int, int]:
    """Both sides of the cycle-count identity: (beta, |P| - nu + 1)."""
    return betti(g), len(ps) - part.nu + 1


@dataclass(frozen=True)
class RobinCutData:
    """A Robin point set materialized as degree-2 vertices of one graph.

    ``graph`` is the (possibly subdivided) host graph, ``cut_vertices`` the
    canonically sorted vertex ids of the Robin points, and ``f`` the
    eigenfunction re-expanded on the host graph.
    """

    graph: MetricGraph
    cut_vertices: tuple[str, ...]
    f: EigenFunction
    points: RobinPointSet

    @property
    def size(self) -> int:
        return len(self.cut_vertices)


def robin_cut_data(g: MetricGraph, f: EigenFunction, alpha: float) -> RobinCutData:
    """Locate Robin points, subdivide at the interior ones, carry f across."""
    ps = robin_points(g, f, alpha)
    if ps.interior:
        sub = subdivide(g, ps.interior)
        names = [sub.vertex_at(p) for p in ps.interior] + list(ps.vertex_names)
        f2 = carry_through_subdivision(sub, f)
        return RobinCutData(sub.graph, tuple(sorted(names)), f2, ps)
    return RobinCutData(g, tuple(sorted(ps.vertex_names)), f, ps)
