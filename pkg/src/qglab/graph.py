"""Metric graphs: combinatorial structure plus positive edge lengths.

A graph is a list of vertices and directed edges ``(src, dst, length)``.
Loops and multi-edges are allowed; a loop contributes both of its ends to
the degree of its vertex.  Graphs are immutable: every mutating operation
(orientation, subdivision, cutting) returns a new graph.

Edge ends are addressed as ``(edge_index, TAIL)`` or ``(edge_index, HEAD)``.
Arclength coordinates run from 0 at the tail to the edge length at the head,
and all derivative conventions elsewhere in the package follow this
direction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import yaml

from .errors import GraphSpecError

TAIL = 0
HEAD = 1

#: Relative tolerance for identifying two arclength coordinates on one edge.
POINT_EQ_RTOL = 1e-12

#: Roots closer than this (relative to edge length) to an endpoint snap to it.
VERTEX_SNAP_RTOL = 1e-9


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    length: float

    def reversed(self) -> "Edge":
        return Edge(self.dst, self.src, self.length)


@dataclass(frozen=True)
class PointOnGraph:
    """A point addressed by edge index and arclength coordinate along the edge."""

    edge: int
    x: float


class MetricGraph:
    """Immutable metric graph with cached adjacency, components and ``lmin``."""

    __slots__ = ("vertices", "edges", "oriented", "_ends", "_components", "_comp_of")

    def __init__(self, vertices: Sequence[str], edges: Sequence[Edge], *, oriented: bool = False):
        vertices = tuple(str(v) for v in vertices)
        if len(set(vertices)) != len(vertices):
            raise GraphSpecError("duplicate vertex ids")
        if not edges:
            raise GraphSpecError("empty edge set")
        vset = set(vertices)
        for e in edges:
            if e.src not in vset or e.dst not in vset:
                raise GraphSpecError(f"edge ({e.src},{e.dst}) has an undeclared endpoint")
            if not (e.length > 0.0):
                raise GraphSpecError(f"edge ({e.src},{e.dst}) has non-positive length {e.length}")
        self.vertices = vertices
        self.edges = tuple(edges)
        self.oriented = bool(oriented)

        ends: dict[str, list[tuple[int, int]]] = {v: [] for v in vertices}
        for i, e in enumerate(self.edges):
            ends[e.src].append((i, TAIL))
            ends[e.dst].append((i, HEAD))
        self._ends = {v: tuple(sorted(lst)) for v, lst in ends.items()}

        comps: list[tuple[str, ...]] = []
        comp_of: dict[str, int] = {}
        seen: set[str] = set()
        adj: dict[str, set[str]] = {v: set() for v in vertices}
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        for v in vertices:
            if v in seen:
                continue
            stack, comp = [v], []
            seen.add(v)
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            idx = len(comps)
            comps.append(tuple(sorted(comp)))
            for u in comp:
                comp_of[u] = idx
        self._components = tuple(comps)
        self._comp_of = comp_of

        if self.oriented and not degree_two_oriented(self):
            raise GraphSpecError("graph marked oriented but a degree-2 vertex is not head-to-tail")

    # -- basic queries ------------------------------------------------------

    def ends(self, v: str) -> tuple[tuple[int, int], ...]:
        """Edge ends incident to ``v``; a loop contributes both of its ends."""
        return self._ends[v]

    def degree(self, v: str) -> int:
        return len(self._ends[v])

    def length(self, edge: int) -> float:
        return self.edges[edge].length

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def components(self) -> tuple[tuple[str, ...], ...]:
        return self._components

    def component_of(self, v: str) -> int:
        return self._comp_of[v]

    @property
    def lmin(self) -> float:
        return min(e.length for e in self.edges)

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.edges)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"MetricGraph(|V|={self.n_vertices}, |E|={self.n_edges}, "
            f"oriented={self.oriented})"
        )

    # -- point helpers ------------------------------------------------------

    def point_at_vertex(self, p: PointOnGraph) -> str | None:
        """Vertex id if ``p`` sits (within snap tolerance) at an edge endpoint."""
        e = self.edges[p.edge]
        snap = VERTEX_SNAP_RTOL * e.length
        if abs(p.x) <= snap:
            return e.src
        if abs(p.x - e.length) <= snap:
            return e.dst
        return None

    def same_point(self, p: PointOnGraph, q: PointOnGraph) -> bool:
        """Equality of points: same edge within tolerance, or the same vertex.

        A degree-2 vertex is representable on either incident edge end and
        both representations compare equal.
        """
        vp, vq = self.point_at_vertex(p), self.point_at_vertex(q)
        if vp is not None or vq is not None:
            return vp == vq
        if p.edge != q.edge:
            return False
        return abs(p.x - q.x) <= POINT_EQ_RTOL * self.edges[p.edge].length


# -- construction -----------------------------------------------------------


def build_graph(
    vertices: Iterable[str],
    edges: Iterable[tuple[str, str, float]],
    *,
    orient: bool = False,
) -> MetricGraph:
    """Validate and build a graph from ``(src, dst, length)`` triples.

    With ``orient=True`` the result additionally satisfies the degree-2
    orientation constraint (one edge in, one edge out at every degree-2
    vertex).
    """
    g = MetricGraph(list(vertices), [Edge(str(a), str(b), float(l)) for a, b, l in edges])
    return orient_for_degree_two(g) if orient else g


def degree_two_oriented(g: MetricGraph) -> bool:
    """True if every degree-2 vertex has exactly one incoming edge end."""
    for v in g.vertices:
        ends = g.ends(v)
        if len(ends) == 2:
            heads = sum(1 for _, side in ends if side == HEAD)
            if heads != 1:
                return False
    return True


def _other_endpoint(g: MetricGraph, eidx: int, depart_side: int) -> str:
    e = g.edges[eidx]
    return e.dst if depart_side == TAIL else e.src


def orient_for_degree_two(g: MetricGraph) -> MetricGraph:
    """Reorient edges so each degree-2 vertex is passed head-to-tail.

    Degree-2 vertices form maximal chains and cycles; each is traversed once
    and its edges are aligned with the traversal.  Edges not on such a chain
    keep their declared direction, so the operation is idempotent and never
    touches lengths or adjacency.
    """
    if degree_two_oriented(g):
        return g if g.oriented else MetricGraph(g.vertices, g.edges, oriented=True)

    flip = [False] * g.n_edges
    done: set[str] = set()

    for v0 in sorted(g.vertices):
        if v0 in done or g.degree(v0) != 2:
            continue
        endA, endB = g.ends(v0)
        if endA[0] == endB[0]:
            done.add(v0)  # single loop: one end in, one out already
            continue

        # Walk from v0 through endA until a junction vertex or back at v0.
        terminus: str | None = None
        depart_at: tuple[int, int] | None = None
        v, dep = v0, endA
        for _ in range(g.n_edges + 1):
            u = _other_endpoint(g, dep[0], dep[1])
            arrive = (dep[0], 1 - dep[1])
            if u == v0:
                break  # closed cycle of degree-2 vertices
            if g.degree(u) != 2:
                terminus, depart_at = u, arrive
                break
            v, dep = u, next(x for x in g.ends(u) if x != arrive)

        # Re-traverse from the terminus (or around the cycle from v0) and
        # align every chain edge with the direction of travel.
        v, dep = (terminus, depart_at) if terminus is not None else (v0, endA)
        for _ in range(g.n_edges + 1):
            eidx, side = dep
            flip[eidx] = side == HEAD
            u = _other_endpoint(g, eidx, side)
            if g.degree(u) != 2 or u == v0 and terminus is None:
                if terminus is None:
                    break
                if g.degree(u) != 2:
                    break
            done.add(u)
            arrive = (eidx, 1 - side)
            dep = next(x for x in g.ends(u) if x != arrive)
            v = u
        done.add(v0)

    edges = [e.reversed() if fl else e for e, fl in zip(g.edges, flip)]
    out = MetricGraph(g.vertices, edges, oriented=False)
    if not degree_two_oriented(out):  # pragma: no cover - algorithmic guard
        raise GraphSpecError("degree-2 orientation failed")
    return MetricGraph(out.vertices, out.edges, oriented=True)


# -- invariants -------------------------------------------------------------


def betti(g: MetricGraph) -> int:
    """First Betti number |E| - |V| + #components."""
    return g.n_edges - g.n_vertices + len(g.components)


# -- subdivision ------------------------------------------------------------


@dataclass(frozen=True)
class Subdivision:
    """Result of inserting degree-2 vertices at interior points.

    ``pieces[original_edge]`` lists ``(new_edge_index, x_lo, x_hi)`` covering
    the original edge in order, in original arclength coordinates.
    """

    graph: MetricGraph
    pieces: tuple[tuple[tuple[int, float, float], ...], ...]
    new_vertices: tuple[str, ...]

    def vertex_at(self, p: PointOnGraph) -> str:
        """Vertex id of the subdivision point that was inserted at ``p``."""
        edge_len = self.pieces[p.edge][-1][2]
        tol = 10.0 * POINT_EQ_RTOL * edge_len
        for eidx, lo, hi in self.pieces[p.edge]:
            if abs(p.x - lo) <= tol:
                return self.graph.edges[eidx].src
            if abs(p.x - hi) <= tol:
                return self.graph.edges[eidx].dst
        raise GraphSpecError(f"point {p} is not a subdivision vertex")

    def locate(self, p: PointOnGraph) -> PointOnGraph:
        """Coordinates of original point ``p`` on the subdivided graph."""
        for eidx, lo, hi in self.pieces[p.edge]:
            if lo <= p.x <= hi:
                return PointOnGraph(eidx, p.x - lo)
        raise GraphSpecError(f"point {p} outside its edge")


def subdivide(g: MetricGraph, points: Sequence[PointOnGraph]) -> Subdivision:
    """Insert a degree-2 vertex at each strictly interior point.

    New edges inherit the orientation head-to-tail, so an oriented graph
    stays oriented.  Total length and Betti number are preserved.
    """
    by_edge: dict[int, list[float]] = {}
    for p in points:
        e = g.edges[p.edge]
        if g.point_at_vertex(p) is not None:
            raise GraphSpecError(f"point {p} lies at a vertex; subdivide interior points only")
        if not (0.0 < p.x < e.length):
            raise GraphSpecError(f"coordinate {p.x} outside edge of length {e.length}")
        by_edge.setdefault(p.edge, []).append(p.x)
    for eidx, xs in by_edge.items():
        xs.sort()
        for a, b in zip(xs, xs[1:]):
            if b - a <= POINT_EQ_RTOL * g.edges[eidx].length:
                raise GraphSpecError("subdivision points coincide")

    vertices = list(g.vertices)
    new_names: list[str] = []
    edges: list[Edge] = []
    pieces: list[tuple[tuple[int, float, float], ...]] = []
    taken = set(vertices)
    for eidx, e in enumerate(g.edges):
        xs = by_edge.get(eidx)
        if not xs:
            pieces.append(((len(edges), 0.0, e.length),))
            edges.append(e)
            continue
        cuts = [0.0] + xs + [e.length]
        names = []
        for x in xs:
            name = f"e{eidx}:{x:.12g}"
            while name in taken:
                name += "'"
            taken.add(name)
            names.append(name)
            vertices.append(name)
            new_names.append(name)
        chain = [e.src] + names + [e.dst]
        plist = []
        for k in range(len(chain) - 1):
            plist.append((len(edges), cuts[k], cuts[k + 1]))
            edges.append(Edge(chain[k], chain[k + 1], cuts[k + 1] - cuts[k]))
        pieces.append(tuple(plist))
    out = MetricGraph(vertices, edges, oriented=g.oriented)
    return Subdivision(out, tuple(pieces), tuple(new_names))


def insert_degree_two(g: MetricGraph, points: Sequence[PointOnGraph]) -> MetricGraph:
    """Subdivide at interior points and return only the new graph."""
    return subdivide(g, points).graph


# -- cutting ----------------------------------------------------------------


@dataclass(frozen=True)
class CutResult:
    """Graph cut at a set of degree-2 vertices.

    Each cut vertex ``v`` splits into ``v-`` on its incoming side and ``v+``
    on its outgoing side (for a loop edge, the tail side is ``v+``).
    """

    graph: MetricGraph
    daughters: Mapping[str, tuple[str, str]]
    components: tuple[tuple[str, ...], ...]

    @property
    def n_components(self) -> int:
        return len(self.components)


def cut_at_vertices(g: MetricGraph, cut: Sequence[str]) -> CutResult:
    """Cut the graph at the given degree-2 vertices.

    Requires the degree-2 orientation, which fixes the incoming/outgoing
    side of each cut vertex.
    """
    if not g.oriented:
        raise GraphSpecError("cutting requires a degree-2 oriented graph")
    cutset = list(dict.fromkeys(cut))
    for v in cutset:
        if v not in g._ends:
            raise GraphSpecError(f"unknown vertex {v!r}")
        if g.degree(v) != 2:
            raise GraphSpecError(f"cut point {v!r} has degree {g.degree(v)} != 2")

    vertices = list(g.vertices)
    taken = set(vertices)
    edges = [[e.src, e.dst, e.length] for e in g.edges]
    daughters: dict[str, tuple[str, str]] = {}
    for v in cutset:
        minus, plus = v + "-", v + "+"
        while minus in taken:
            minus += "'"
        taken.add(minus)
        while plus in taken:
            plus += "'"
        taken.add(plus)
        for eidx, side in g.ends(v):
            if side == HEAD:
                edges[eidx][1] = minus
            else:
                edges[eidx][0] = plus
        vertices.remove(v)
        vertices.extend([minus, plus])
        daughters[v] = (minus, plus)

    out = MetricGraph(vertices, [Edge(a, b, l) for a, b, l in edges], oriented=g.oriented)
    return CutResult(out, daughters, out.components)


def cut_at_points(g: MetricGraph, points: Sequence[PointOnGraph]) -> CutResult:
    """Cut at points: degree-2 vertex points directly, interior points after
    subdivision.  Points at vertices of degree != 2 are rejected."""
    interior: list[PointOnGraph] = []
    vertex_names: list[str] = []
    for p in points:
        v = g.point_at_vertex(p)
        if v is None:
            interior.append(p)
        elif g.degree(v) == 2:
            vertex_names.append(v)
        else:
            raise GraphSpecError(f"cut point at vertex {v!r} of degree {g.degree(v)} != 2")
    if interior:
        sub = subdivide(g, interior)
        vertex_names.extend(sub.vertex_at(p) for p in interior)
        g = sub.graph
    return cut_at_vertices(g, vertex_names)


def subgraph(g: MetricGraph, component: Sequence[str]) -> MetricGraph:
    """Restriction of ``g`` to one set of vertices (must be edge-closed)."""
    vs = set(component)
    edges = []
    for e in g.edges:
        if e.src in vs and e.dst in vs:
            edges.append(e)
        elif e.src in vs or e.dst in vs:
            raise GraphSpecError("component is not edge-closed")
    return MetricGraph(sorted(vs), edges, oriented=g.oriented)


# -- graph description files -------------------------------------------------

# One YAML document per graph:
#   vertices: [a, b]
#   edges:
#     - {from: a, to: b, length: "3.141592653589793"}
#   orient: auto            # or: declared
# Lengths are written back as shortest round-trip decimal strings, so a
# parse -> format -> parse cycle is bit-exact.


def parse_graph_text(text: str) -> MetricGraph:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise GraphSpecError(f"invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise GraphSpecError("graph document must be a mapping")
    try:
        vertices = [str(v) for v in doc["vertices"]]
        raw_edges = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise GraphSpecError("graph document needs 'vertices' and 'edges'") from exc
    if not isinstance(raw_edges, list):
        raise GraphSpecError("'edges' must be a list")
    edges = []
    for item in raw_edges:
        try:
            length = float(item["length"])
            edges.append((str(item["from"]), str(item["to"]), length))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphSpecError(f"bad edge entry {item!r}") from exc
    orient = str(doc.get("orient", "auto"))
    if orient not in ("auto", "declared"):
        raise GraphSpecError(f"orient must be 'auto' or 'declared', got {orient!r}")
    return build_graph(vertices, edges, orient=(orient == "auto"))


def parse_graph_file(path: str) -> MetricGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph_text(fh.read())


def format_graph_text(g: MetricGraph, *, orient: str = "declared") -> str:
    buf = io.StringIO()
    buf.write("vertices: [" + ", ".join(g.vertices) + "]\n")
    buf.write("edges:\n")
    for e in g.edges:
        buf.write(f"  - {{from: {e.src}, to: {e.dst}, length: \"{e.length!r}\"}}\n")
    buf.write(f"orient: {orient}\n")
    return buf.getvalue()
