from __future__ import annotations

import math

import numpy as np
import pytest

from qglab.basis import edge_eval
from qglab.errors import IllDefinedLevelError
from qglab.graph import PointOnGraph, build_graph, insert_degree_two
from qglab.robinmap import (
    EpsilonChoice,
    decoupled_problem,
    dtn_matrix,
    epsilon_select,
    inertia,
    is_well_defined,
    robin_matrix,
    solve_bvp,
)
from qglab.solver import (
    BoundaryProblem,
    DeltaAlpha,
    eigenvalues_in,
    enumerate_spectrum,
    secular_indicator,
)


def split_interval(total=2.0, at=1.0):
    g0 = build_graph(["v1", "v2"], [("v1", "v2", total)], orient=True)
    g = insert_degree_two(g0, [PointOnGraph(0, at)])
    mid = next(v for v in g.vertices if ":" in v)
    return g, mid


class TestDecoupled:
    def test_alpha_zero_is_dirichlet_split(self):
        g, mid = split_interval(2.0, 1.0)
        p = decoupled_problem(g, [mid], 0.0)
        found = eigenvalues_in(p, -0.5, 25.0, 0.05)
        # two Dirichlet-Neumann unit intervals: ((n+1/2) pi)^2 each, doubled
        expect = [(0.5 * math.pi) ** 2, (1.5 * math.pi) ** 2]
        assert np.allclose(found.values, expect, atol=1e-8)
        assert found.mults == (2, 2)

    def test_alpha_half_pi_is_nk_of_cut(self):
        g, mid = split_interval(2.0, 0.8)
        p = decoupled_problem(g, [mid], math.pi / 2)
        found = eigenvalues_in(p, -0.5, 30.0, 0.05)
        # Neumann intervals of lengths 0.8 and 1.2
        expect = sorted([0.0, 0.0] + [(math.pi / 0.8) ** 2] + [(math.pi / 1.2) ** 2, (2 * math.pi / 1.2) ** 2])
        got = found.flat()
        assert np.allclose(got[: len(expect)], expect, atol=1e-7)

    def test_matches_delta_infinity_on_uncut_graph(self):
        g, mid = split_interval(2.0, 0.8)
        alpha = 0.9
        dec = decoupled_problem(g, [mid], alpha)
        via_delta = BoundaryProblem(g, {mid: DeltaAlpha(alpha, math.inf)})
        a = eigenvalues_in(dec, -8.0, 25.0, 0.05)
        b = eigenvalues_in(via_delta, -8.0, 25.0, 0.05)
        assert np.allclose(a.flat(), b.flat(), atol=1e-8)


class TestWellDefined:
    def test_below_first_decoupled_eigenvalue(self):
        g, mid = split_interval(2.0, 1.0)
        assert is_well_defined(g, [mid], 0.0, 0.25)

    def test_at_decoupled_eigenvalue(self):
        g, mid = split_interval(2.0, 1.0)
        assert not is_well_defined(g, [mid], 0.0, (0.5 * math.pi) ** 2)

    def test_negative_mu_for_dirichlet_decoupling(self):
        g, mid = split_interval(2.0, 1.0)
        dec = decoupled_problem(g, [mid], 0.0)
        found = eigenvalues_in(dec, -60.0, -0.01, 0.25)
        assert not found.values  # nonnegative operator
        assert is_well_defined(g, [mid], 0.0, -1.0)


class TestSolveBVP:
    def test_zero_data_zero_solution(self):
        g, mid = split_interval()
        sol = solve_bvp(g, [mid], 0.3, -0.7, [0.0])
        assert max(abs(a) + abs(b) for a, b in sol.coeffs) < 1e-12

    def test_linearity(self):
        g, mid = split_interval()
        mu, alpha = -0.7, 0.3
        s1 = solve_bvp(g, [mid], alpha, mu, [1.0])
        s2 = solve_bvp(g, [mid], alpha, mu, [-2.5])
        for (a1, b1), (a2, b2) in zip(s1.coeffs, s2.coeffs):
            assert a2 == pytest.approx(-2.5 * a1, rel=1e-9, abs=1e-12)
            assert b2 == pytest.approx(-2.5 * b1, rel=1e-9, abs=1e-12)

    def test_flat_solution_at_mu_zero(self):
        # mu = 0, alpha = 0: linear pieces with Neumann outer ends are
        # constant 1 on both sides of the cut.
        g, mid = split_interval()
        sol = solve_bvp(g, [mid], 0.0, 0.0, [1.0])
        for eidx, e in enumerate(g.edges):
            for x in (0.0, 0.5 * e.length, e.length):
                t = edge_eval(sol.coeffs[eidx], 0.0, x)
                assert t.value == pytest.approx(1.0, abs=1e-10)


class TestRobinMatrix:
    def test_interval_dtn_value_at_negative_mu(self):
        # One-sided maps of unit Neumann-terminated intervals at mu = -1
        # contribute tanh(1) each: Lambda = 2 tanh(1).
        g, mid = split_interval(2.0, 1.0)
        rm = robin_matrix(g, [mid], 0.0, -1.0)
        assert rm.matrix.shape == (1, 1)
        assert rm.matrix[0, 0] == pytest.approx(2.0 * math.tanh(1.0), rel=1e-9)

    def test_symmetry_random_cases(self):
        g0 = build_graph(
            ["a", "b", "c"],
            [("a", "b", 1.0), ("b", "c", 1.4), ("a", "c", 0.8)],
            orient=True,
        )
        g = insert_degree_two(g0, [PointOnGraph(0, 0.4), PointOnGraph(1, 0.7), PointOnGraph(2, 0.3)])
        cut = sorted(v for v in g.vertices if ":" in v)
        rng = np.random.default_rng(7)
        for _ in range(20):
            alpha = rng.uniform(0.0, math.pi)
            mu = rng.uniform(-3.0, 25.0)
            if not is_well_defined(g, cut, alpha, mu):
                continue
            rm = robin_matrix(g, cut, alpha, mu)
            assert rm.asymmetry < 1e-8

    def test_alpha_mod_pi(self):
        g, mid = split_interval(2.0, 0.9)
        a = robin_matrix(g, [mid], 0.6, -0.5)
        b = robin_matrix(g, [mid], 0.6 + math.pi, -0.5)
        assert np.allclose(a.matrix, b.matrix, atol=1e-9)

    def test_kernel_matches_base_operator(self):
        # dim ker Lambda(mu) = dim ker(H - mu): at an eigenvalue of H the
        # Robin matrix develops a null eigenvalue.
        g, mid = split_interval(math.pi, 1.1)
        rm = robin_matrix(g, [mid], 0.0, 4.0)
        mor, pos, null = rm.inertia()
        assert null == 1
        rm2 = robin_matrix(g, [mid], 0.0, 3.9)
        assert rm2.inertia()[2] == 0

    def test_ill_defined_level_raises(self):
        g, mid = split_interval(2.0, 1.0)
        with pytest.raises(IllDefinedLevelError):
            robin_matrix(g, [mid], 0.0, (0.5 * math.pi) ** 2)

    def test_monotone_in_mu_below_decoupled_spectrum(self):
        # Crossing parameters t = -kappa(mu) move up with mu along increasing
        # spectral curves, so the map's eigenvalues decrease in mu between
        # decoupled eigenvalues (with the bounded-from-below sign choice).
        g, mid = split_interval(2.0, 1.0)
        vals = [robin_matrix(g, [mid], 0.0, mu).matrix[0, 0] for mu in (-3.0, -1.0, 0.0, 1.0, 2.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_planted_coupling_hits_spectrum(self):
        # For each eigenvalue kappa of Lambda(mu), t = -kappa makes mu an
        # eigenvalue of the coupled operator.
        g0 = build_graph(["a", "b"], [("a", "b", 1.3), ("b", "a", 1.9)], orient=True)
        g = insert_degree_two(g0, [PointOnGraph(0, 0.5), PointOnGraph(1, 0.8)])
        cut = sorted(v for v in g.vertices if ":" in v)
        for alpha, mu in ((0.0, 0.77), (0.9, 1.3), (math.pi / 2, -0.6)):
            if not is_well_defined(g, cut, alpha, mu):
                continue
            rm = robin_matrix(g, cut, alpha, mu)
            for kappa in rm.eigenvalues():
                p = BoundaryProblem(g, {v: DeltaAlpha(alpha, -float(kappa)) for v in cut})
                _, smin = secular_indicator(p, mu)
                assert smin < 1e-7


class TestDtnArbitraryDegree:
    def test_agrees_with_robin_on_degree_two(self):
        g, mid = split_interval(2.0, 1.0)
        for mu in (-1.0, 0.5, 3.3):
            a = robin_matrix(g, [mid], 0.0, mu)
            b = dtn_matrix(g, [mid], mu)
            assert np.allclose(a.matrix, b.matrix, atol=1e-9)

    def test_star_center(self):
        # DtN at the degree-3 center of a star at mu = -1:
        # Lambda = sum of tanh(l_i) over the three Neumann-terminated legs.
        lengths = (1.0, 1.3, 1.7)
        verts = ["o"] + [f"t{i}" for i in range(3)]
        edges = [("o", f"t{i}", l) for i, l in enumerate(lengths)]
        g = build_graph(verts, edges, orient=True)
        rm = dtn_matrix(g, ["o"], -1.0)
        expect = sum(math.tanh(l) for l in lengths)
        assert rm.matrix[0, 0] == pytest.approx(expect, rel=1e-9)


class TestInertia:
    def test_identity(self):
        assert inertia(np.eye(3)) == (0, 3, 0)

    def test_mixed_diagonal(self):
        assert inertia(np.diag([-1.0, 0.0, 2.0])) == (1, 1, 1)

    def test_empty(self):
        assert inertia(np.zeros((0, 0))) == (0, 0, 0)

    def test_invertible_robin_map_full_rank(self):
        g, mid = split_interval(math.pi, 1.1)
        rm = robin_matrix(g, [mid], 0.0, 4.0 + 0.05)
        mor, pos, null = rm.inertia()
        assert null == 0
        assert mor + pos == rm.size


class TestEpsilonSelect:
    def test_interval_around_four(self):
        g, mid = split_interval(math.pi, 1.1)
        choice = epsilon_select(g, [mid], 0.0, 4.0)
        assert 0 < choice.eps <= 0.1
        # certificates: no other eigenvalue of either problem within eps
        for v in choice.base_nearby + choice.decoupled_nearby:
            if abs(v - 4.0) > 1e-7:
                assert abs(v - 4.0) >= 2 * choice.eps - 1e-12

    def test_ground_state(self):
        g, mid = split_interval(math.pi, 1.1)
        choice = epsilon_select(g, [mid], 0.0, 0.0)
        assert choice.eps > 0

    def test_cycle_with_double_eigenvalues(self):
        g0 = build_graph(["v"], [("v", "v", 2 * math.pi)], orient=True)
        g = insert_degree_two(g0, [PointOnGraph(0, 2.0)])
        mid = next(v for v in g.vertices if ":" in v)
        choice = epsilon_select(g, [mid], 0.0, 1.0)
        assert choice.eps > 0
