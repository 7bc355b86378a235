"""Fundamental solutions of -f'' = lambda.f on an edge, and rotated traces.

The basis is ``c`` and ``s`` with c(0)=1, c'(0)=0, s(0)=0, s'(0)=1.  For
this equation the derivatives close up exactly: c' = -lambda*s and s' = c,
so only the pair (c, s) is ever computed.  The Wronskian c*s' - c'*s =
c^2 + lambda*s^2 equals 1 identically.

The rotated trace of a (value, derivative) pair by an angle ``alpha`` is

    tau f      = cos(alpha)*f - sin(alpha)*f'
    tau' f     = sin(alpha)*f + cos(alpha)*f'

with the derivative always taken along the edge orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Below this |lambda| the sine-like solution is evaluated by series to keep
#: joint continuity in (lambda, x) through lambda = 0.
SERIES_LAMBDA = 1e-9


@dataclass(frozen=True)
class FundamentalValues:
    c: float
    s: float
    cp: float
    sp: float


@dataclass(frozen=True)
class TracePair:
    value: float
    derivative: float


@dataclass(frozen=True)
class MixedTracePair:
    tau: float
    tau_prime: float
    alpha: float


def reduce_angle(alpha: float) -> float:
    """Reduce an angle to [0, pi); the trace kernel only depends on it there."""
    a = math.fmod(alpha, math.pi)
    if a < 0.0:
        a += math.pi
    return 0.0 if a == math.pi else a


def _cs(lam: float, x: float) -> tuple[float, float]:
    if abs(lam) < SERIES_LAMBDA:
        x2 = x * x
        s = x * (1.0 - lam * x2 / 6.0 + lam * lam * x2 * x2 / 120.0)
        c = 1.0 - lam * x2 / 2.0 + lam * lam * x2 * x2 / 24.0
        return c, s
    if lam > 0.0:
        k = math.sqrt(lam)
        return math.cos(k * x), math.sin(k * x) / k
    kappa = math.sqrt(-lam)
    return math.cosh(kappa * x), math.sinh(kappa * x) / kappa


def fundamental_pair(lam: float, x: float) -> FundamentalValues:
    """Values of c, s and their derivatives at arclength ``x >= 0``."""
    c, s = _cs(lam, x)
    return FundamentalValues(c=c, s=s, cp=-lam * s, sp=c)


def fundamental_tables(lams: np.ndarray, lengths: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (c, s) tables of shape (len(lams), len(lengths)).

    Guards against cosh overflow; scans must not go below
    lambda = -(700 / max length)^2.
    """
    lams = np.asarray(lams, dtype=float)
    lengths = np.asarray(lengths, dtype=float)
    lam = lams[:, None]
    x = lengths[None, :]
    C = np.empty((lams.size, lengths.size))
    S = np.empty_like(C)

    tiny = np.abs(lam) < SERIES_LAMBDA
    pos = (lam >= SERIES_LAMBDA)
    neg = (lam <= -SERIES_LAMBDA)

    if np.any(pos):
        k = np.sqrt(np.where(pos, lam, 1.0))
        np.copyto(C, np.cos(k * x), where=pos)
        np.copyto(S, np.sin(k * x) / k, where=pos)
    if np.any(neg):
        kap = np.sqrt(np.where(neg, -lam, 1.0))
        arg = kap * x
        if np.any(arg[np.broadcast_to(neg, arg.shape)] > 700.0):
            raise OverflowError("hyperbolic basis overflow; raise the scan floor")
        np.copyto(C, np.cosh(arg), where=neg)
        np.copyto(S, np.sinh(arg) / kap, where=neg)
    if np.any(tiny):
        x2 = x * x
        np.copyto(C, 1.0 - lam * x2 / 2.0 + lam * lam * x2 * x2 / 24.0, where=tiny)
        np.copyto(S, x * (1.0 - lam * x2 / 6.0 + lam * lam * x2 * x2 / 120.0), where=tiny)
    return C, S


def mixed_trace(alpha: float, t: TracePair) -> MixedTracePair:
    """Rotate the (value, derivative) pair by ``alpha``."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    return MixedTracePair(
        tau=ca * t.value - sa * t.derivative,
        tau_prime=sa * t.value + ca * t.derivative,
        alpha=alpha,
    )


def mixed_trace_inverse(alpha: float, m: MixedTracePair) -> TracePair:
    """Undo :func:`mixed_trace` (rotation by ``-alpha``)."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    return TracePair(value=ca * m.tau + sa * m.tau_prime, derivative=-sa * m.tau + ca * m.tau_prime)


def edge_eval(coeffs: tuple[float, float], lam: float, x: float, *, length: float | None = None) -> TracePair:
    """Evaluate f = a*c + b*s at ``x``, derivative along the edge orientation.

    Outgoing derivatives at vertices are derived quantities: at the tail the
    outgoing derivative equals +f', at the head it equals -f'.
    """
    if x < 0.0 or (length is not None and x > length * (1.0 + 1e-12)):
        raise ValueError(f"coordinate {x} outside [0, {length}]")
    a, b = coeffs
    c, s = _cs(lam, x)
    return TracePair(value=a * c + b * s, derivative=-lam * a * s + b * c)


def outgoing_derivative(t: TracePair, side: int) -> float:
    """Outgoing derivative at an edge end: TAIL keeps f', HEAD flips the sign."""
    return t.derivative if side == 0 else -t.derivative


def edge_gram(lam: float, length: float) -> np.ndarray:
    """Exact 2x2 Gram matrix of (c, s) in L^2(0, length)."""
    l = float(length)
    if abs(lam) * l * l < 1e-9:
        return np.array([[l, l * l / 2.0], [l * l / 2.0, l ** 3 / 3.0]])
    if lam > 0.0:
        k = math.sqrt(lam)
        i11 = l / 2.0 + math.sin(2.0 * k * l) / (4.0 * k)
        i12 = math.sin(k * l) ** 2 / (2.0 * k * k)
        i22 = (l / 2.0 - math.sin(2.0 * k * l) / (4.0 * k)) / (k * k)
    else:
        kap = math.sqrt(-lam)
        i11 = l / 2.0 + math.sinh(2.0 * kap * l) / (4.0 * kap)
        i12 = math.sinh(kap * l) ** 2 / (2.0 * kap * kap)
        i22 = (math.sinh(2.0 * kap * l) / (4.0 * kap) - l / 2.0) / (kap * kap)
    return np.array([[i11, i12], [i12, i22]])
