"""Two-sided Robin maps: boundary-data-to-trace-jump matrices with inertia.

For a set B of degree-2 vertices, an angle alpha and a level mu off the
spectrum of the decoupled operator, the Robin map sends boundary data xi on
B to the jump of the rotated co-trace of the solving function:

    (Lambda xi)(v) = tau' f(v-) - tau' f(v+),

where f solves -f'' = mu f with tau f(v+) = tau f(v-) = xi(v) on B and
Neumann-Kirchhoff conditions elsewhere.  The matrix is assembled column by
column from boundary-value solves; its symmetry is a solver health metric
rather than an input.

For alpha = 0 this is the two-sided Dirichlet-to-Neumann map with the sign
that makes it bounded from below; :func:`dtn_matrix` additionally supports
vertices of arbitrary degree (experimental, alpha = 0 only):

    (Lambda xi)(v) = - sum over incident ends of the outgoing derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import fundamental_pair, reduce_angle
from .errors import IllDefinedLevelError, SolverError
from .graph import HEAD, TAIL, CutResult, MetricGraph, cut_at_vertices
from .solver import (
    NK,
    BoundaryProblem,
    DEFAULT_CONFIG,
    RobinFixed,
    SolverConfig,
    _count_null,
    _row_weights,
    assemble_scaled,
    enumerate_spectrum,
    eigenvalues_in,
)
from .errors import WindowEndpointError


@dataclass(frozen=True)
class RobinMap:
    """Symmetrized Robin matrix with the data that produced it."""

    matrix: np.ndarray
    vertices: tuple[str, ...]
    alpha: float
    mu: float
    asymmetry: float

    @property
    def size(self) -> int:
        return len(self.vertices)

    def eigenvalues(self) -> np.ndarray:
        if self.size == 0:
            return np.zeros(0)
        return np.linalg.eigvalsh(self.matrix)

    def inertia(self, cfg: SolverConfig | None = None) -> tuple[int, int, int]:
        return inertia(self.matrix, cfg)


def inertia(matrix: np.ndarray, cfg: SolverConfig | None = None) -> tuple[int, int, int]:
    """(negative, positive, null) eigenvalue counts of a symmetric matrix."""
    cfg = cfg or DEFAULT_CONFIG
    m = np.asarray(matrix, dtype=float)
    if m.size == 0:
        return (0, 0, 0)
    w = np.linalg.eigvalsh(0.5 * (m + m.T))
    tau = max(cfg.nullity_rel * float(np.max(np.abs(w))), 1e-14)
    mor = int(np.sum(w < -tau))
    pos = int(np.sum(w > tau))
    return mor, pos, len(w) - mor - pos


def decoupled_problem(g: MetricGraph, cut: Sequence[str], alpha: float) -> BoundaryProblem:
    """The operator with the graph cut at B and fixed rotated traces there.

    alpha = 0 puts Dirichlet conditions at the cut points; alpha = pi/2 is
    the plain Neumann-Kirchhoff operator of the cut graph.
    """
    problem, _ = _decoupled(g, cut, alpha)
    return problem


def _decoupled(g: MetricGraph, cut: Sequence[str], alpha: float) -> tuple[BoundaryProblem, CutResult]:
    res = cut_at_vertices(g, cut)
    conds = {}
    for minus, plus in res.daughters.values():
        conds[minus] = RobinFixed(alpha)
        conds[plus] = RobinFixed(alpha)
    return BoundaryProblem(res.graph, conds), res


def is_well_defined(
    g: MetricGraph, cut: Sequence[str], alpha: float, mu: float, cfg: SolverConfig | None = None
) -> bool:
    """True when ``mu`` is off the decoupled spectrum (unique BVP solutions)."""
    cfg = cfg or DEFAULT_CONFIG
    problem, _ = _decoupled(g, cut, alpha)
    sv = np.linalg.svd(assemble_scaled(problem, np.array([mu]))[0], compute_uv=False)
    return _count_null(sv, cfg) == 0


@dataclass(frozen=True)
class BVPSolution:
    """Solution coefficients of one inhomogeneous boundary-value problem."""

    mu: float
    coeffs: tuple[tuple[float, float], ...]
    residual: float


def _bvp_system(g: MetricGraph, cut: Sequence[str], alpha: float, mu: float, cfg: SolverConfig):
    problem, res = _decoupled(g, cut, alpha)
    Ms = assemble_scaled(problem, np.array([mu]))[0]
    sv = np.linalg.svd(Ms, compute_uv=False)
    if _count_null(sv, cfg) > 0:
        raise IllDefinedLevelError(
            f"mu = {mu} lies in the spectrum of the decoupled operator"
        )
    weights = _row_weights(problem, np.array([mu]))[0]
    labels = problem.plan.row_labels
    row_of = {lab: i for i, lab in enumerate(labels)}
    return problem, res, Ms, weights, row_of


def solve_bvp(
    g: MetricGraph,
    cut: Sequence[str],
    alpha: float,
    mu: float,
    xi: Sequence[float],
    cfg: SolverConfig | None = None,
) -> BVPSolution:
    """Solve -f'' = mu f with prescribed rotated traces xi on the cut set."""
    cfg = cfg or DEFAULT_CONFIG
    order = sorted(dict.fromkeys(cut))
    if len(xi) != len(order):
        raise SolverError("boundary data size does not match the cut set")
    _, res, Ms, weights, row_of = _bvp_system(g, order, alpha, mu, cfg)
    rhs = np.zeros(Ms.shape[0])
    for value, v in zip(xi, order):
        minus, plus = res.daughters[v]
        for name in (minus, plus):
            r = row_of[(name, "robin", 0)]
            rhs[r] = value / weights[r]
    x = np.linalg.solve(Ms, rhs)
    resid = float(np.max(np.abs(Ms @ x - rhs)))
    scale = max(float(np.max(np.abs(xi))) if len(xi) else 0.0, 1e-300)
    if resid > cfg.resid_tol * scale:
        raise SolverError(f"boundary-value residual {resid:.2e}")
    coeffs = tuple((float(x[2 * i]), float(x[2 * i + 1])) for i in range(g.n_edges))
    return BVPSolution(mu=mu, coeffs=coeffs, residual=resid)


def _trace_jump_extractor(g: MetricGraph, res: CutResult, order: Sequence[str], alpha: float, mu: float) -> np.ndarray:
    """Matrix T with (T x)(v) = tau' f(v-) - tau' f(v+) for coefficients x."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    n = 2 * g.n_edges
    T = np.zeros((len(order), n))
    cut_graph = res.graph
    for i, v in enumerate(order):
        minus, plus = res.daughters[v]
        ((e_m, side_m),) = cut_graph.ends(minus)
        ((e_p, side_p),) = cut_graph.ends(plus)
        assert side_m == HEAD and side_p == TAIL
        fv = fundamental_pair(mu, cut_graph.edges[e_m].length)
        # tau' = sin(alpha) * value + cos(alpha) * derivative, per orientation
        T[i, 2 * e_m] += sa * fv.c + ca * fv.cp
        T[i, 2 * e_m + 1] += sa * fv.s + ca * fv.sp
        T[i, 2 * e_p + 1] -= ca
        T[i, 2 * e_p] -= sa
    return T


def robin_matrix(
    g: MetricGraph,
    cut: Sequence[str],
    alpha: float,
    mu: float,
    cfg: SolverConfig | None = None,
) -> RobinMap:
    """Assemble the Robin map column by column from boundary-value solves."""
    cfg = cfg or DEFAULT_CONFIG
    alpha = reduce_angle(alpha)
    order = tuple(sorted(dict.fromkeys(cut)))
    if not order:
        return RobinMap(np.zeros((0, 0)), (), alpha, mu, 0.0)
    _, res, Ms, weights, row_of = _bvp_system(g, order, alpha, mu, cfg)
    rhs = np.zeros((Ms.shape[0], len(order)))
    for j, v in enumerate(order):
        minus, plus = res.daughters[v]
        for name in (minus, plus):
            r = row_of[(name, "robin", 0)]
            rhs[r, j] = 1.0 / weights[r]
    X = np.linalg.solve(Ms, rhs)
    T = _trace_jump_extractor(g, res, order, alpha, mu)
    raw = T @ X
    asym = float(np.linalg.norm(raw - raw.T) / max(np.linalg.norm(raw), 1e-300))
    return RobinMap(0.5 * (raw + raw.T), order, alpha, mu, asym)


def dtn_matrix(
    g: MetricGraph,
    terminals: Sequence[str],
    mu: float,
    cfg: SolverConfig | None = None,
) -> RobinMap:
    """Dirichlet-to-Neumann map at vertices of arbitrary degree (alpha = 0).

    Experimental extension beyond degree-2 sets: prescribes f(v) = xi(v) on
    every incident end and returns minus the sum of outgoing derivatives.
    Agrees with :func:`robin_matrix` at alpha = 0 on degree-2 sets.
    """
    cfg = cfg or DEFAULT_CONFIG
    order = tuple(sorted(dict.fromkeys(terminals)))
    if not order:
        return RobinMap(np.zeros((0, 0)), (), 0.0, mu, 0.0)
    problem = BoundaryProblem(g, {v: RobinFixed(0.0) for v in order})
    Ms = assemble_scaled(problem, np.array([mu]))[0]
    sv = np.linalg.svd(Ms, compute_uv=False)
    if _count_null(sv, cfg) > 0:
        raise IllDefinedLevelError(f"mu = {mu} lies in the decoupled spectrum")
    weights = _row_weights(problem, np.array([mu]))[0]
    row_of = {lab: i for i, lab in enumerate(problem.plan.row_labels)}
    rhs = np.zeros((Ms.shape[0], len(order)))
    for j, v in enumerate(order):
        for jj in range(g.degree(v)):
            r = row_of[(v, "robin", jj)]
            rhs[r, j] = 1.0 / weights[r]
    X = np.linalg.solve(Ms, rhs)

    T = np.zeros((len(order), 2 * g.n_edges))
    for i, v in enumerate(order):
        for eidx, side in g.ends(v):
            if side == TAIL:  # outgoing derivative = +f'(0) = b
                T[i, 2 * eidx + 1] -= 1.0
            else:  # outgoing derivative = -f'(l)
                fv = fundamental_pair(mu, g.edges[eidx].length)
                T[i, 2 * eidx] += fv.cp
                T[i, 2 * eidx + 1] += fv.sp
    raw = T @ X
    asym = float(np.linalg.norm(raw - raw.T) / max(np.linalg.norm(raw), 1e-300))
    return RobinMap(0.5 * (raw + raw.T), order, 0.0, mu, asym)


@dataclass(frozen=True)
class EpsilonChoice:
    """A certified half-gap around an eigenvalue.

    Both one-sided intervals (lam - eps, lam) and (lam, lam + eps) are free
    of spectrum of the base operator and of the decoupled operator.
    """

    lam: float
    eps: float
    base_nearby: tuple[float, ...]
    decoupled_nearby: tuple[float, ...]


def epsilon_select(
    g: MetricGraph,
    cut: Sequence[str],
    alpha: float,
    lam: float,
    cfg: SolverConfig | None = None,
    *,
    cap: float = 0.1,
    window: float = 0.35,
) -> EpsilonChoice:
    """Half of the smallest spectral gap around ``lam``, capped at ``cap``.

    The gap is measured against the base (Neumann-Kirchhoff) operator and
    the decoupled operator; eigenvalues equal to ``lam`` itself are ignored.
    """
    cfg = cfg or DEFAULT_CONFIG
    base = BoundaryProblem(g)
    dec, _ = _decoupled(g, sorted(dict.fromkeys(cut)), alpha)

    def nearby(problem) -> tuple[float, ...]:
        shift = 0.0
        for _ in range(12):
            try:
                found = eigenvalues_in(problem, lam - window - shift, lam + window + shift, window / 40.0, cfg)
                return found.values
            except WindowEndpointError:
                shift += 0.013 * window
        raise SolverError("could not scan the neighborhood of lambda")

    base_near = nearby(base)
    dec_near = nearby(dec)
    gap = window
    for values in (base_near, dec_near):
        for v in values:
            dist = abs(v - lam)
            if dist > 1e-7 * max(1.0, abs(lam)):
                gap = min(gap, dist)
    eps = min(cap, 0.5 * gap)
    if eps < 1e-7:
        raise SolverError(f"spectral gap at lambda = {lam} below 1e-7")
    return EpsilonChoice(lam=lam, eps=eps, base_nearby=base_near, decoupled_nearby=dec_near)
