"""Secular-matrix eigenvalue solver for boundary problems on metric graphs.

A boundary problem is a graph plus one vertex condition per vertex.  With
edge coefficients (a_e, b_e) in the fundamental basis, the conditions
assemble into a square matrix M(lambda) of size 2|E|; eigenvalues are the
lambdas where M is singular.  Detection combines the sign of the
row-equilibrated determinant (odd multiplicities) with dips of the smallest
singular value (even multiplicities); multiplicities come from the numerical
nullity.

The rotated delta condition at a degree-2 vertex couples the two sides
through the mixed traces:

    tau(v+) = tau(v-),      tau'(v+) - tau'(v-) = t * tau(v-),

with coupling t on the circle R u {inf}; t = inf decouples the vertex into
two fixed-trace conditions tau(v+/-) = 0.  Rows switch to the inverse
parameter s = -1/t for |t| > 1 so families stay well scaled through t = inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .basis import edge_gram, fundamental_tables, reduce_angle
from .errors import GraphSpecError, SolverError, WindowEndpointError
from .graph import HEAD, TAIL, MetricGraph

# -- vertex conditions -------------------------------------------------------


@dataclass(frozen=True)
class NeumannKirchhoff:
    """Continuity plus vanishing sum of outgoing derivatives."""


@dataclass(frozen=True)
class RobinFixed:
    """cos(alpha) f - sin(alpha) f' = 0 on every edge end at a vertex.

    The derivative follows the edge orientation, so the condition depends on
    whether the vertex hosts tails or heads.  At degree 1 this is the usual
    fixed Robin (Dirichlet for alpha = 0, Neumann for alpha = pi/2); at
    higher degree it decouples the vertex, fixing the rotated trace of each
    incident end separately.
    """

    alpha: float


@dataclass(frozen=True)
class DeltaAlpha:
    """Rotated delta coupling of strength ``t`` at a degree-2 vertex."""

    alpha: float
    t: float

    def __post_init__(self):
        if math.isinf(self.t) and self.t < 0:
            object.__setattr__(self, "t", math.inf)  # -inf and +inf coincide


@dataclass(frozen=True)
class UnitaryGeneral:
    """General self-adjoint condition i(U-1)f + (U+1) grad f = 0 at a vertex.

    ``matrix`` is a deg(v) x deg(v) unitary acting on the incident edge ends
    in the order returned by ``graph.ends(v)``.  Assembly becomes complex,
    which restricts determinant-sign eigenvalue search; intended for
    cross-checks, not production sweeps.
    """

    matrix: tuple[tuple[complex, ...], ...]

    @staticmethod
    def from_array(u: np.ndarray) -> "UnitaryGeneral":
        return UnitaryGeneral(tuple(tuple(complex(x) for x in row) for row in np.asarray(u)))

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=complex)


VertexCondition = Union[NeumannKirchhoff, RobinFixed, DeltaAlpha, UnitaryGeneral]

NK = NeumannKirchhoff()


def dirichlet() -> RobinFixed:
    return RobinFixed(0.0)


# -- boundary problems -------------------------------------------------------

_K_CONST, _K_C, _K_S, _K_NEGLS = 0, 1, 2, 3


class SecularPlan:
    """Precompiled sparse description of M(lambda) for one boundary problem."""

    __slots__ = ("n", "lengths", "row_labels", "rows", "cols", "kinds", "edges_", "coeffs", "is_complex")

    def __init__(self, n, lengths, row_labels, terms, is_complex):
        self.n = n
        self.lengths = lengths
        self.row_labels = row_labels
        rows, cols, kinds, edges_, coeffs = zip(*terms)
        self.rows = np.array(rows, dtype=np.intp)
        self.cols = np.array(cols, dtype=np.intp)
        self.kinds = np.array(kinds, dtype=np.int8)
        self.edges_ = np.array(edges_, dtype=np.intp)
        self.coeffs = np.array(coeffs, dtype=complex if is_complex else float)
        self.is_complex = is_complex


class BoundaryProblem:
    """A metric graph with one vertex condition per vertex (default NK)."""

    def __init__(self, graph: MetricGraph, conditions: Mapping[str, VertexCondition] | None = None):
        self.graph = graph
        conds: dict[str, VertexCondition] = {v: NK for v in graph.vertices}
        for v, c in (conditions or {}).items():
            if v not in conds:
                raise GraphSpecError(f"condition at unknown vertex {v!r}")
            conds[v] = c
        self.conditions = conds
        self._validate()
        self._plan: SecularPlan | None = None

    def _validate(self):
        g = self.graph
        for v, c in self.conditions.items():
            if isinstance(c, DeltaAlpha):
                if g.degree(v) != 2:
                    raise GraphSpecError(f"delta condition at {v!r} needs degree 2, got {g.degree(v)}")
                if not g.oriented:
                    raise GraphSpecError("delta conditions need a degree-2 oriented graph")
            elif isinstance(c, RobinFixed):
                pass  # valid at any degree; rows are per incident end
            elif isinstance(c, UnitaryGeneral):
                u = c.as_array()
                d = g.degree(v)
                if u.shape != (d, d):
                    raise GraphSpecError(f"unitary at {v!r} must be {d}x{d}")
                if np.linalg.norm(u.conj().T @ u - np.eye(d)) > 1e-10:
                    raise GraphSpecError(f"matrix at {v!r} is not unitary")

    def with_conditions(self, updates: Mapping[str, VertexCondition]) -> "BoundaryProblem":
        merged = dict(self.conditions)
        merged.update(updates)
        return BoundaryProblem(self.graph, merged)

    @property
    def plan(self) -> SecularPlan:
        if self._plan is None:
            self._plan = _build_plan(self)
        return self._plan

    def row_index(self, label: tuple[str, str, int]) -> int:
        return self.plan.row_labels.index(label)


def _build_plan(p: BoundaryProblem) -> SecularPlan:
    g = p.graph
    n = 2 * g.n_edges
    terms: list[tuple[int, int, int, int, complex]] = []
    row_labels: list[tuple[str, str, int]] = []
    is_complex = any(isinstance(c, UnitaryGeneral) for c in p.conditions.values())

    def add_val(row, eidx, side, scale):
        if side == TAIL:
            terms.append((row, 2 * eidx, _K_CONST, eidx, scale))
        else:
            terms.append((row, 2 * eidx, _K_C, eidx, scale))
            terms.append((row, 2 * eidx + 1, _K_S, eidx, scale))

    def add_deriv(row, eidx, side, scale):
        # derivative along the edge orientation
        if side == TAIL:
            terms.append((row, 2 * eidx + 1, _K_CONST, eidx, scale))
        else:
            terms.append((row, 2 * eidx, _K_NEGLS, eidx, scale))
            terms.append((row, 2 * eidx + 1, _K_C, eidx, scale))

    def add_tau(row, end, ca, sa, scale):
        add_val(row, end[0], end[1], ca * scale)
        add_deriv(row, end[0], end[1], -sa * scale)

    def add_tau_prime(row, end, ca, sa, scale):
        add_val(row, end[0], end[1], sa * scale)
        add_deriv(row, end[0], end[1], ca * scale)

    row = 0
    for v in g.vertices:
        cond = p.conditions[v]
        ends = g.ends(v)
        d = len(ends)
        if isinstance(cond, NeumannKirchhoff):
            for i in range(1, d):
                add_val(row, *ends[i - 1], 1.0)
                add_val(row, *ends[i], -1.0)
                row_labels.append((v, "cont", i - 1))
                row += 1
            for eidx, side in ends:
                add_deriv(row, eidx, side, 1.0 if side == TAIL else -1.0)
            row_labels.append((v, "current", 0))
            row += 1
        elif isinstance(cond, RobinFixed):
            a = reduce_angle(cond.alpha)
            for j, end in enumerate(ends):
                add_tau(row, end, math.cos(a), math.sin(a), 1.0)
                row_labels.append((v, "robin", j))
                row += 1
        elif isinstance(cond, DeltaAlpha):
            a = reduce_angle(cond.alpha)
            ca, sa = math.cos(a), math.sin(a)
            minus = next(e for e in ends if e[1] == HEAD)   # incoming side
            plus = next(e for e in ends if e[1] == TAIL)    # outgoing side
            add_tau(row, plus, ca, sa, 1.0)
            add_tau(row, minus, ca, sa, -1.0)
            row_labels.append((v, "delta", 0))
            row += 1
            t = cond.t
            if math.isfinite(t) and abs(t) <= 1.0:
                add_tau_prime(row, plus, ca, sa, 1.0)
                add_tau_prime(row, minus, ca, sa, -1.0)
                add_tau(row, minus, ca, sa, -t)
            else:
                s = 0.0 if math.isinf(t) else -1.0 / t
                add_tau_prime(row, plus, ca, sa, s)
                add_tau_prime(row, minus, ca, sa, -s)
                add_tau(row, minus, ca, sa, 1.0)
            row_labels.append((v, "delta", 1))
            row += 1
        elif isinstance(cond, UnitaryGeneral):
            u = cond.as_array()
            a_part = 1j * (u - np.eye(d))
            b_part = u + np.eye(d)
            for j in range(d):
                for k, (eidx, side) in enumerate(ends):
                    if a_part[j, k] != 0:
                        add_val(row, eidx, side, a_part[j, k])
                    if b_part[j, k] != 0:
                        add_deriv(row, eidx, side, b_part[j, k] * (1.0 if side == TAIL else -1.0))
                row_labels.append((v, "unitary", j))
                row += 1
        else:  # pragma: no cover
            raise GraphSpecError(f"unknown condition {cond!r} at {v!r}")

    if row != n:  # pragma: no cover - dimension invariant
        raise SolverError(f"assembled {row} rows for size {n}")
    lengths = np.array([e.length for e in g.edges])
    return SecularPlan(n, lengths, tuple(row_labels), terms, is_complex)


# -- assembly and indicators --------------------------------------------------


def assemble_batch(p: BoundaryProblem, lams: np.ndarray) -> np.ndarray:
    """Stack of secular matrices M(lambda), shape (len(lams), 2|E|, 2|E|)."""
    plan = p.plan
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    C, S = fundamental_tables(lams, plan.lengths)
    nl, nt = lams.size, plan.rows.size
    w = np.empty((nl, nt), dtype=complex if plan.is_complex else float)
    for kind, expr in (
        (_K_CONST, None),
        (_K_C, C),
        (_K_S, S),
        (_K_NEGLS, S),
    ):
        m = plan.kinds == kind
        if not np.any(m):
            continue
        if kind == _K_CONST:
            w[:, m] = 1.0
        elif kind == _K_NEGLS:
            w[:, m] = -lams[:, None] * expr[:, plan.edges_[m]]
        else:
            w[:, m] = expr[:, plan.edges_[m]]
    vals = w * plan.coeffs[None, :]
    M = np.zeros((nl, plan.n * plan.n), dtype=vals.dtype)
    np.add.at(M, (slice(None), plan.rows * plan.n + plan.cols), vals)
    return M.reshape(nl, plan.n, plan.n)


def assemble_secular(p: BoundaryProblem, lam: float) -> np.ndarray:
    """Single secular matrix M(lambda)."""
    return assemble_batch(p, np.array([lam]))[0]


def _row_weights(p: BoundaryProblem, lams: np.ndarray) -> np.ndarray:
    """Smooth positive per-row scales bounding the row entries.

    Scaling rows by their actual sup-norm hides eigenvalues at which a whole
    row vanishes (a loop at its double eigenvalues zeroes the full matrix),
    so rows are scaled by envelope bounds of the basis values instead: the
    scale never vanishes, the determinant keeps its sign and continuity, and
    entries stay O(1) for every lambda.
    """
    plan = p.plan
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    C, S = fundamental_tables(lams, plan.lengths)
    lens = plan.lengths[None, :]
    with np.errstate(divide="ignore"):
        inv_k = 1.0 / np.sqrt(np.maximum(lams, 1e-300))[:, None]
    Bc = np.maximum(np.abs(C), 1.0)
    Bs = np.maximum(np.abs(S), np.minimum(lens, inv_k))
    nl, nt = lams.size, plan.rows.size
    bounds = np.empty((nl, nt))
    for kind in (_K_CONST, _K_C, _K_S, _K_NEGLS):
        m = plan.kinds == kind
        if not np.any(m):
            continue
        if kind == _K_CONST:
            bounds[:, m] = 1.0
        elif kind == _K_C:
            bounds[:, m] = Bc[:, plan.edges_[m]]
        elif kind == _K_S:
            bounds[:, m] = Bs[:, plan.edges_[m]]
        else:
            bounds[:, m] = np.abs(lams)[:, None] * Bs[:, plan.edges_[m]]
    W = np.zeros((nl, plan.n))
    np.add.at(W, (slice(None), plan.rows), np.abs(plan.coeffs)[None, :] * bounds)
    return np.maximum(W, 1e-300)


def assemble_scaled(p: BoundaryProblem, lams: np.ndarray) -> np.ndarray:
    """Stack of secular matrices with envelope-normalized rows."""
    M = assemble_batch(p, lams)
    W = _row_weights(p, np.atleast_1d(np.asarray(lams, dtype=float)))
    return M / W[:, :, None]


def indicator_batch(p: BoundaryProblem, lams: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sign-carrying determinant and smallest singular value per lambda."""
    if p.plan.is_complex:
        raise SolverError("determinant sign search requires real vertex conditions")
    Me = assemble_scaled(p, lams)
    sign, logdet = np.linalg.slogdet(Me)
    d = sign * np.exp(np.clip(logdet, -700.0, 700.0))
    svals = np.linalg.svd(Me, compute_uv=False)
    return d, svals[..., -1]


def secular_indicator(p: BoundaryProblem, lam: float) -> tuple[float, float]:
    d, smin = indicator_batch(p, np.array([lam]))
    return float(d[0]), float(smin[0])


def _count_null(sv: np.ndarray, cfg: "SolverConfig") -> int:
    # The scaled matrix has O(1) entries, so a vanishing sigma_max itself
    # signals rank collapse; never let the threshold collapse with it.
    return int(np.sum(sv < cfg.nullity_rel * max(1.0, sv[0])))


def nullity(p: BoundaryProblem, lam: float, cfg: "SolverConfig | None" = None) -> int:
    cfg = cfg or DEFAULT_CONFIG
    sv = np.linalg.svd(assemble_scaled(p, np.array([lam]))[0], compute_uv=False)
    return _count_null(sv, cfg)


# -- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs; the defaults are the documented package-wide choices."""

    nullity_rel: float = 1e-8        # singular values below this (rel sigma_max) count as zero
    bisect_rel: float = 1e-10        # bisection stops at |dl| < bisect_rel * max(1, |lambda|)
    resid_tol: float = 1e-8          # max residual of boundary rows for an eigenfunction
    endpoint_rtol: float = 1e-8      # window endpoints must keep this distance from roots
    dip_abs: float = 0.12            # smallest-singular-value level that triggers refinement
    merge_rtol: float = 2e-8         # roots closer than this (rel) are one eigenvalue
    floor_band: float = 50.0         # clean-band width certifying a spectral floor
    floor_resolution: float = 0.25   # scan resolution inside floor bands
    kgrid: float = 0.35              # k-space step factor: dk = min(kgrid, pi/(6 L))


DEFAULT_CONFIG = SolverConfig()


# -- eigenvalue search --------------------------------------------------------


@dataclass(frozen=True)
class EigenvalueList:
    """Sorted eigenvalues with multiplicities found in [lo, hi].

    ``start_index`` is the 1-based ordinal of the first entry within the full
    spectrum; it is set when the search started from a certified floor.
    """

    lo: float
    hi: float
    values: tuple[float, ...]
    mults: tuple[int, ...]
    start_index: int | None = None

    def flat(self) -> list[float]:
        out: list[float] = []
        for v, m in zip(self.values, self.mults):
            out.extend([v] * m)
        return out

    def locate(self, lam: float, rtol: float = 1e-6) -> int:
        for i, v in enumerate(self.values):
            if abs(v - lam) <= rtol * max(1.0, abs(lam)):
                return i
        raise SolverError(f"{lam} is not in the computed list")

    def n_of(self, lam: float) -> int:
        if self.start_index is None:
            raise SolverError("counts need a list enumerated from the spectral floor")
        i = self.locate(lam)
        return self.start_index + sum(self.mults[:i])

    def N_of(self, lam: float) -> int:
        i = self.locate(lam)
        return self.n_of(lam) + self.mults[i] - 1

    def mult_of(self, lam: float) -> int:
        return self.mults[self.locate(lam)]


def _bisect_signs(p: BoundaryProblem, los, his, dlos, cfg: SolverConfig) -> list[float]:
    los = np.array(los, dtype=float)
    his = np.array(his, dtype=float)
    dlos = np.array(dlos, dtype=float)
    for _ in range(90):
        mids = 0.5 * (los + his)
        tol = cfg.bisect_rel * np.maximum(1.0, np.abs(mids))
        if np.all(his - los < tol):
            break
        d, _ = indicator_batch(p, mids)
        left = d * dlos > 0
        los = np.where(left, mids, los)
        dlos = np.where(left, d, dlos)
        his = np.where(left, his, mids)
    return list(0.5 * (los + his))


def _golden_min(p: BoundaryProblem, brackets: list[tuple[float, float]], cfg: SolverConfig) -> list[tuple[float, float]]:
    """Minimize the smallest singular value on each bracket; returns (lam, smin)."""
    if not brackets:
        return []
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a = np.array([x[0] for x in brackets])
    b = np.array([x[1] for x in brackets])
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    _, fc = indicator_batch(p, c)
    _, fd = indicator_batch(p, d)
    for _ in range(70):
        if np.all(b - a < cfg.bisect_rel * np.maximum(1.0, np.abs(a))):
            break
        left = fc < fd  # keep [a, d] on the left, [c, b] on the right
        b_n = np.where(left, d, b)
        a_n = np.where(left, a, c)
        d_n = np.where(left, c, a_n + invphi * (b_n - a_n))
        c_n = np.where(left, b_n - invphi * (b_n - a_n), d)
        _, f_new = indicator_batch(p, np.where(left, c_n, d_n))
        fc_old, fd_old = fc, fd
        fd = np.where(left, fc_old, f_new)
        fc = np.where(left, f_new, fd_old)
        a, b, c, d = a_n, b_n, c_n, d_n
    mid = 0.5 * (a + b)
    _, fm = indicator_batch(p, mid)
    return list(zip(mid.tolist(), fm.tolist()))


def eigenvalues_in(
    p: BoundaryProblem,
    lo: float,
    hi: float,
    resolution: float,
    cfg: SolverConfig | None = None,
    *,
    start_index: int | None = None,
) -> EigenvalueList:
    """All eigenvalues in [lo, hi] found on a grid of step <= resolution.

    Sign changes of the equilibrated determinant give odd-multiplicity roots
    (bisected to ``bisect_rel``); local dips of the smallest singular value
    recover even-multiplicity roots.  Raises :class:`WindowEndpointError`
    when a root lands within ``endpoint_rtol`` of ``lo`` or ``hi``.
    """
    cfg = cfg or DEFAULT_CONFIG
    if not lo < hi:
        raise SolverError(f"empty window [{lo}, {hi}]")
    npts = max(9, int(math.ceil((hi - lo) / resolution)) + 1)
    lams = np.linspace(lo, hi, npts)
    d, smin = indicator_batch(p, lams)

    brackets = [
        (lams[i], lams[i + 1], d[i])
        for i in range(npts - 1)
        if d[i] != 0 and d[i + 1] != 0 and (d[i] > 0) != (d[i + 1] > 0)
    ]
    # (root, certain) pairs: sign-change roots are eigenvalues regardless of
    # how small the nullity margin looks after bisection rounding.
    roots: list[tuple[float, bool]] = []
    if brackets:
        found = _bisect_signs(p, [b[0] for b in brackets], [b[1] for b in brackets], [b[2] for b in brackets], cfg)
        roots += [(r, True) for r in found]
    roots += [(float(lams[i]), True) for i in range(npts) if d[i] == 0]

    dip_brackets = []
    for i in range(1, npts - 1):
        if smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1]:
            sharp = smin[i] < 0.35 * max(smin[i - 1], smin[i + 1])
            if smin[i] < cfg.dip_abs or sharp:
                dip_brackets.append((float(lams[i - 1]), float(lams[i + 1])))
    for lam_star, s_star in _golden_min(p, dip_brackets, cfg):
        if s_star < 10.0 * cfg.nullity_rel:
            roots.append((lam_star, False))

    # merge duplicates (a dip refinement can rediscover a sign-change root)
    roots.sort()
    merged: list[tuple[float, bool]] = []
    for r, certain in roots:
        if merged and abs(r - merged[-1][0]) <= cfg.merge_rtol * max(1.0, abs(r)):
            merged[-1] = (merged[-1][0], merged[-1][1] or certain)
            continue
        merged.append((r, certain))

    values, mults = [], []
    if merged:
        Me = assemble_scaled(p, np.array([r for r, _ in merged]))
        sv = np.linalg.svd(Me, compute_uv=False)
        for (r, certain), s in zip(merged, sv):
            mult = _count_null(s, cfg)
            if certain:
                mult = max(1, mult)
            elif mult == 0:
                continue  # spurious shallow dip
            values.append(r)
            mults.append(mult)

    for r in values:
        for endpoint in (lo, hi):
            if abs(r - endpoint) <= cfg.endpoint_rtol * max(1.0, abs(r)):
                raise WindowEndpointError(
                    f"eigenvalue {r} too close to window endpoint {endpoint}",
                    endpoint=endpoint,
                    eigenvalue=r,
                )
    return EigenvalueList(lo, hi, tuple(values), tuple(mults), start_index=start_index)


def _is_nonnegative_problem(p: BoundaryProblem) -> bool:
    """Conditions for which the quadratic form is obviously nonnegative."""
    for c in p.conditions.values():
        if isinstance(c, NeumannKirchhoff):
            continue
        if isinstance(c, RobinFixed) and reduce_angle(c.alpha) == 0.0:
            continue
        if isinstance(c, DeltaAlpha) and reduce_angle(c.alpha) == 0.0 and (c.t >= 0.0 or math.isinf(c.t)):
            continue
        return False
    return True


def certified_floor(p: BoundaryProblem, cfg: SolverConfig | None = None) -> float:
    """A value strictly below the lowest eigenvalue.

    Nonnegative problems get a fixed floor; otherwise bands of width
    ``floor_band`` are scanned downward until one is free of spectrum.
    """
    cfg = cfg or DEFAULT_CONFIG
    if _is_nonnegative_problem(p):
        return -0.789
    top = 0.0123
    for _ in range(40):
        bottom = top - cfg.floor_band
        try:
            found = eigenvalues_in(p, bottom, top, cfg.floor_resolution, cfg)
            empty = not found.values
        except WindowEndpointError:
            top += 0.3 * cfg.floor_resolution
            continue
        if empty:
            return bottom
        top = bottom + 0.1 * cfg.floor_resolution
    raise SolverError("no clean spectral band found above lambda = -2000")


def enumerate_spectrum(
    p: BoundaryProblem,
    hi: float,
    cfg: SolverConfig | None = None,
    *,
    floor: float | None = None,
) -> EigenvalueList:
    """All eigenvalues from the spectral floor up to ``hi``, with ordinals.

    The positive axis is scanned on a grid uniform in k = sqrt(lambda), which
    matches the oscillation rate of the basis; the nonpositive part uses a
    uniform lambda grid.
    """
    cfg = cfg or DEFAULT_CONFIG
    lo = certified_floor(p, cfg) if floor is None else floor
    if hi <= lo:
        raise SolverError("enumeration window is empty")
    dk = min(cfg.kgrid, math.pi / (6.0 * p.graph.total_length))
    values: list[float] = []
    mults: list[int] = []

    def run_window(a: float, b: float, res: float):
        shift = 0.0
        for _ in range(12):
            try:
                part = eigenvalues_in(p, a - shift, b + shift, res, cfg)
            except WindowEndpointError:
                shift += 0.317 * res
                continue
            for v, m in zip(part.values, part.mults):
                if values and abs(v - values[-1]) <= cfg.merge_rtol * max(1.0, abs(v)):
                    continue
                if v > hi:
                    continue
                values.append(v)
                mults.append(m)
            return
        raise SolverError("could not place a window clear of eigenvalues")

    # nonpositive part plus a first sliver of the positive axis
    b0 = (1.5 * dk) ** 2
    if hi <= b0:
        run_window(lo, hi, cfg.floor_resolution)
        return EigenvalueList(lo, hi, tuple(values), tuple(mults), start_index=1)
    run_window(lo, b0, min(cfg.floor_resolution, b0 / 24.0))

    k = 1.5 * dk
    kmax = math.sqrt(hi)
    band = 48
    while k < kmax:
        k2 = min(k + band * dk, kmax)
        res = max((k2 * k2 - k * k) / (band * 4), 2.0 * k * dk / 4.0)
        run_window(k * k, k2 * k2, res)
        k = k2
    return EigenvalueList(lo, hi, tuple(values), tuple(mults), start_index=1)


def spectral_counts(
    p: BoundaryProblem,
    lam: float,
    cfg: SolverConfig | None = None,
    *,
    floor: float | None = None,
) -> tuple[int, int, int]:
    """(n, N, Mult) of an eigenvalue within the full ordered spectrum."""
    cfg = cfg or DEFAULT_CONFIG
    spec = enumerate_spectrum(p, lam + 0.377, cfg, floor=floor)
    return spec.n_of(lam), spec.N_of(lam), spec.mult_of(lam)


# -- eigenfunctions -----------------------------------------------------------


@dataclass(frozen=True)
class EigenFunction:
    """Energy and per-edge coefficients (a_e, b_e); unit L2 norm, real."""

    lam: float
    coeffs: tuple[tuple[float, float], ...]
    residual: float

    def coeff_array(self) -> np.ndarray:
        return np.array(self.coeffs)


def graph_gram(g: MetricGraph, lam: float) -> np.ndarray:
    """Block-diagonal L2 Gram matrix of the fundamental basis on all edges."""
    n = 2 * g.n_edges
    G = np.zeros((n, n))
    for i, e in enumerate(g.edges):
        G[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = edge_gram(lam, e.length)
    return G


def eigenfunction(p: BoundaryProblem, lam: float, cfg: SolverConfig | None = None) -> list[EigenFunction]:
    """Orthonormal real basis of the eigenspace at ``lam``.

    Null vectors of M(lambda) are orthonormalized in L2 using the exact Gram
    matrix of the basis; the sign convention makes the first coefficient of
    largest magnitude positive.
    """
    cfg = cfg or DEFAULT_CONFIG
    Me = assemble_scaled(p, np.array([lam]))[0]
    _, sv, vt = np.linalg.svd(Me)
    k = _count_null(sv, cfg)
    if k == 0:
        raise SolverError(f"numerical nullity 0 at lambda = {lam}")
    X = vt[-k:].T
    if np.iscomplexobj(X):
        X = np.real(X)
    G = graph_gram(p.graph, lam)
    B = X.T @ G @ X
    w, Q = np.linalg.eigh(B)
    keep = w > 1e-12 * w.max()
    Y = X @ Q[:, keep] / np.sqrt(w[keep])[None, :]

    out = []
    for j in range(Y.shape[1]):
        y = Y[:, j]
        imax = int(np.argmax(np.abs(y)))
        if y[imax] < 0:
            y = -y
        resid = float(np.max(np.abs(Me @ y)) / max(np.max(np.abs(y)), 1e-300))
        if resid > cfg.resid_tol:
            raise SolverError(f"eigenfunction residual {resid:.2e} exceeds tolerance")
        coeffs = tuple((float(y[2 * i]), float(y[2 * i + 1])) for i in range(p.graph.n_edges))
        out.append(EigenFunction(lam=lam, coeffs=coeffs, residual=resid))
    return out


def eigenfunction_max_abs(g: MetricGraph, f: EigenFunction) -> float:
    """Max of |f| over the graph (exact amplitude for lam > 0, sampled else)."""
    best = 0.0
    for i, e in enumerate(g.edges):
        a, b = f.coeffs[i]
        if f.lam > 1e-9:
            k = math.sqrt(f.lam)
            best = max(best, math.hypot(a, b / k))
        else:
            from .basis import edge_eval

            for x in np.linspace(0.0, e.length, 65):
                best = max(best, abs(edge_eval((a, b), f.lam, x).value))
    return best


def vertex_values(g: MetricGraph, f: EigenFunction) -> dict[str, float]:
    """Value of f at each vertex (first incident end; continuity assumed)."""
    from .basis import edge_eval

    out = {}
    for v in g.vertices:
        eidx, side = g.ends(v)[0]
        x = 0.0 if side == TAIL else g.edges[eidx].length
        out[v] = edge_eval(f.coeffs[eidx], f.lam, x, length=g.edges[eidx].length).value
    return out


@dataclass(frozen=True)
class GenericityReport:
    """Pure data on the genericity hypotheses for an eigenpair."""

    lam: float
    lambda_bound: float
    lambda_ok: bool
    vertex_min: float
    vertex_ok: bool
    edge_nonzero_ok: bool

    @property
    def satisfied(self) -> bool:
        return self.lambda_ok and self.vertex_ok and self.edge_nonzero_ok


def check_generic(p: BoundaryProblem, lam: float, f: EigenFunction, cfg: SolverConfig | None = None) -> GenericityReport:
    cfg = cfg or DEFAULT_CONFIG
    g = p.graph
    bound = (math.pi / g.lmin) ** 2
    fmax = eigenfunction_max_abs(g, f)
    vv = vertex_values(g, f)
    high = [abs(vv[v]) for v in g.vertices if g.degree(v) > 2]
    vertex_min = min(high) if high else math.inf
    edge_ok = True
    for i in range(g.n_edges):
        a, b = f.coeffs[i]
        scale = abs(a) + abs(b) * max(1.0, g.edges[i].length)
        if scale < 1e-10 * fmax:
            edge_ok = False
    return GenericityReport(
        lam=lam,
        lambda_bound=bound,
        lambda_ok=lam > bound,
        vertex_min=vertex_min,
        vertex_ok=(vertex_min >= 1e-8 * fmax),
        edge_nonzero_ok=edge_ok,
    )


# -- eigenfunction transport through subdivision ------------------------------


def carry_through_subdivision(sub, f: EigenFunction) -> EigenFunction:
    """Express an eigenfunction on the subdivided graph (exact re-expansion)."""
    from .basis import edge_eval

    coeffs: list[tuple[float, float]] = [None] * sub.graph.n_edges  # type: ignore[list-item]
    for orig_edge, plist in enumerate(sub.pieces):
        a, b = f.coeffs[orig_edge]
        for new_edge, x_lo, _x_hi in plist:
            t = edge_eval((a, b), f.lam, x_lo)
            coeffs[new_edge] = (t.value, t.derivative)
    return EigenFunction(lam=f.lam, coeffs=tuple(coeffs), residual=f.residual)
