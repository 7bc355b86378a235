from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qglab.basis import (
    MixedTracePair,
    TracePair,
    edge_eval,
    edge_gram,
    fundamental_pair,
    fundamental_tables,
    mixed_trace,
    mixed_trace_inverse,
    outgoing_derivative,
    reduce_angle,
)
from qglab.graph import HEAD, TAIL


class TestFundamentalPair:
    def test_quarter_period(self):
        fv = fundamental_pair(1.0, math.pi / 2)
        assert fv.c == pytest.approx(0.0, abs=1e-15)
        assert fv.s == pytest.approx(1.0)
        assert fv.cp == pytest.approx(-1.0)
        assert fv.sp == pytest.approx(0.0, abs=1e-15)

    def test_linear_case(self):
        fv = fundamental_pair(0.0, 2.0)
        assert (fv.c, fv.s, fv.cp, fv.sp) == (1.0, 2.0, 0.0, 1.0)

    def test_hyperbolic(self):
        fv = fundamental_pair(-1.0, 1.0)
        assert fv.c == pytest.approx(math.cosh(1.0))
        assert fv.s == pytest.approx(math.sinh(1.0))

    def test_wronskian_grid(self):
        # Tolerance is relative to the size of the two products; at lambda=-10,
        # x=5 they are ~1e13 and cancel to 1.
        for lam in (-10.0, -1.0, 0.0, 1e-14, 1.0, 100.0):
            for x in np.linspace(0.0, 5.0, 21):
                fv = fundamental_pair(lam, x)
                w = fv.c * fv.sp - fv.cp * fv.s
                scale = max(1.0, abs(fv.c * fv.sp), abs(fv.cp * fv.s))
                assert abs(w - 1.0) <= 1e-10 * scale

    def test_continuity_through_zero(self):
        left = fundamental_pair(-1e-10, 3.0)
        right = fundamental_pair(1e-10, 3.0)
        assert left.s == pytest.approx(right.s, rel=1e-8)
        assert left.c == pytest.approx(right.c, rel=1e-8)

    def test_tables_match_scalar(self):
        lams = np.array([-4.0, -1e-12, 0.0, 2.5, 30.0])
        lengths = np.array([0.5, 1.0, math.pi])
        C, S = fundamental_tables(lams, lengths)
        for i, lam in enumerate(lams):
            for j, l in enumerate(lengths):
                fv = fundamental_pair(lam, l)
                assert C[i, j] == pytest.approx(fv.c, rel=1e-12, abs=1e-12)
                assert S[i, j] == pytest.approx(fv.s, rel=1e-12, abs=1e-12)

    def test_table_overflow_guard(self):
        with pytest.raises(OverflowError):
            fundamental_tables(np.array([-1e8]), np.array([100.0]))


class TestMixedTrace:
    def test_identity_rotation(self):
        m = mixed_trace(0.0, TracePair(2.0, 3.0))
        assert (m.tau, m.tau_prime) == (2.0, 3.0)

    def test_quarter_rotation_swaps(self):
        m = mixed_trace(math.pi / 2, TracePair(2.0, 3.0))
        assert m.tau == pytest.approx(-3.0)
        assert m.tau_prime == pytest.approx(2.0)

    def test_eighth_rotation(self):
        m = mixed_trace(math.pi / 4, TracePair(1.0, 1.0))
        assert m.tau == pytest.approx(0.0, abs=1e-15)
        assert m.tau_prime == pytest.approx(math.sqrt(2.0))

    def test_pi_shift_flips_sign(self):
        t = TracePair(0.7, -1.3)
        a = mixed_trace(0.4, t)
        b = mixed_trace(0.4 + math.pi, t)
        assert b.tau == pytest.approx(-a.tau)
        assert b.tau_prime == pytest.approx(-a.tau_prime)

    @settings(max_examples=100, deadline=None)
    @given(
        alpha=st.floats(min_value=-10.0, max_value=10.0),
        f=st.floats(min_value=-100.0, max_value=100.0),
        fp=st.floats(min_value=-100.0, max_value=100.0),
    )
    def test_norm_preserved_and_inverse(self, alpha, f, fp):
        t = TracePair(f, fp)
        m = mixed_trace(alpha, t)
        assert m.tau**2 + m.tau_prime**2 == pytest.approx(f**2 + fp**2, rel=1e-12, abs=1e-9)
        back = mixed_trace_inverse(alpha, m)
        assert back.value == pytest.approx(f, abs=1e-12 * (1 + abs(f)))
        assert back.derivative == pytest.approx(fp, abs=1e-12 * (1 + abs(fp)))

    def test_reduce_angle(self):
        assert reduce_angle(math.pi) == 0.0
        assert reduce_angle(-0.1) == pytest.approx(math.pi - 0.1)
        assert reduce_angle(2.5 * math.pi) == pytest.approx(0.5 * math.pi)


class TestEdgeEval:
    def test_pure_cosine(self):
        t = edge_eval((1.0, 0.0), 1.0, 0.0)
        assert (t.value, t.derivative) == (1.0, 0.0)

    def test_pure_sine_quarter(self):
        t = edge_eval((0.0, 1.0), 4.0, math.pi / 4)
        assert t.value == pytest.approx(0.5)
        assert t.derivative == pytest.approx(0.0, abs=1e-15)

    def test_derivative_matches_finite_difference(self):
        coeffs, lam = (0.37, -1.21), 5.3
        h = 1e-5
        for x in (0.3, 1.1, 2.2):
            t = edge_eval(coeffs, lam, x)
            fd = (edge_eval(coeffs, lam, x + h).value - edge_eval(coeffs, lam, x - h).value) / (2 * h)
            assert t.derivative == pytest.approx(fd, rel=1e-6, abs=1e-6)

    def test_outgoing_signs(self):
        t = TracePair(1.0, 2.0)
        assert outgoing_derivative(t, TAIL) == 2.0
        assert outgoing_derivative(t, HEAD) == -2.0

    def test_range_check(self):
        with pytest.raises(ValueError):
            edge_eval((1.0, 0.0), 1.0, 2.0, length=1.0)


def _simpson(y: np.ndarray, xs: np.ndarray) -> float:
    h = xs[1] - xs[0]
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum()))


class TestGram:
    @pytest.mark.parametrize("lam", [-3.7, -1.0, 0.0, 1e-12, 2.0, 17.3])
    @pytest.mark.parametrize("length", [0.5, 1.0, math.pi])
    def test_against_quadrature(self, lam, length):
        xs = np.linspace(0.0, length, 4001)
        c = np.array([fundamental_pair(lam, x).c for x in xs])
        s = np.array([fundamental_pair(lam, x).s for x in xs])
        g = edge_gram(lam, length)
        assert g[0, 0] == pytest.approx(_simpson(c * c, xs), rel=1e-9, abs=1e-11)
        assert g[0, 1] == pytest.approx(_simpson(c * s, xs), rel=1e-9, abs=1e-11)
        assert g[1, 1] == pytest.approx(_simpson(s * s, xs), rel=1e-9, abs=1e-11)
