import numpy as np
import pytest

from relaywalk import (
    CostParams,
    PathParams,
    bellman_placement_set,
    finite_horizon_values,
    solve_unconstrained,
    value_iteration,
    verify_osla_equivalence,
)
from relaywalk.bellman import branch_margins, default_grid
from relaywalk.model import hop_deltas
from test_renewal import oracle_1d_g

COST = CostParams(0.1, 0.01, 2.0)
COST3 = CostParams(0.1, 0.01, 3.0)


class TestFiniteHorizon:
    def test_one_step_value_at_origin(self):
        table = finite_horizon_values(1, PathParams(0.02, 0.5), COST, 41.0, (5, 5))
        assert table.j00 == pytest.approx(0.11, rel=1e-12)

    def test_one_step_forced_placement_far_out(self):
        table = finite_horizon_values(1, PathParams(0.02, 0.5), COST, 1.0, (120, 5))
        m, n = 118, 3
        d = lambda mm, nn: 0.1 + 0.01 * (mm * mm + nn * nn)
        place = 1.0 + d(m, n) + 0.11
        assert table.values[m, n] == pytest.approx(place, rel=1e-12)

    def test_one_step_margin_formula(self):
        # J_1 - d == min(lam + d(1), mixed increment), everywhere
        pp = PathParams(0.3, 0.4)
        lam = 0.2
        table = finite_horizon_values(1, pp, COST, lam, (25, 25))
        h = table.h_table(COST)
        for m in range(0, 26, 5):
            for n in range(0, 26, 5):
                _d1, _d2, dq = hop_deltas((m, n), pp.q, COST)
                assert h[m, n] == pytest.approx(min(lam + 0.11, dq), rel=1e-10)

    @pytest.mark.parametrize("k", [1, 2, 5, 20])
    def test_margin_monotone_in_both_axes(self, k):
        table = finite_horizon_values(k, PathParams(0.02, 0.5), COST, 41.0, (40, 40))
        h = table.h_table(COST)
        assert np.all(np.diff(h, axis=0) >= -1e-9)
        assert np.all(np.diff(h, axis=1) >= -1e-9)


class TestValueIteration:
    def test_accelerated_matches_jacobi(self):
        pp = PathParams(0.3, 0.4)
        fast = value_iteration(pp, COST, 2.0)
        slow = value_iteration(pp, COST, 2.0, method="jacobi")
        assert fast.values.shape == slow.values.shape
        assert np.max(np.abs(fast.values - slow.values)) <= 1e-8

    def test_margin_monotone_on_converged_table(self):
        table = value_iteration(PathParams(0.02, 0.5), COST3, 41.0)
        h = table.h_table(COST3)
        assert np.all(np.diff(h, axis=0) >= -1e-8)
        assert np.all(np.diff(h, axis=1) >= -1e-8)

    def test_residual_below_tolerance(self):
        table = value_iteration(PathParams(0.02, 0.5), COST, 41.0, tol=1e-9)
        assert table.residual is not None and table.residual <= 1e-9

    def test_east_degenerate_matches_oracle(self):
        pp = PathParams(0.5, 1.0)
        table = value_iteration(pp, COST, 1.0)
        best = min(oracle_1d_g(m, 0.5, 1.0, COST) for m in range(1, 201))
        assert table.j00 == pytest.approx(best, abs=1e-9)
        assert table.values.shape[1] == 1

    def test_north_degenerate_grid(self):
        table = value_iteration(PathParams(0.5, 0.0), COST, 1.0)
        assert table.values.shape[0] == 1


class TestPlacementExtraction:
    def test_threshold_shape_and_line_structure(self):
        pp = PathParams(0.02, 0.5)
        table = value_iteration(pp, COST, 41.0)
        s = bellman_placement_set(table, pp, COST, 41.0)
        # exponent 2 boundaries are straight lines in the q-weighted sum
        vals = [0.5 * s.m_star_at(n) + 0.5 * n for n in range(s.n_max) if s.m_star_at(n) >= 1]
        assert max(vals) - min(vals) <= 1.0 + 1e-9

    def test_tie_points_place(self):
        pp = PathParams(0.02, 0.5)
        table = value_iteration(pp, COST, 41.0)
        margins = branch_margins(table, pp, COST, 41.0)
        s = bellman_placement_set(table, pp, COST, 41.0)
        m0 = s.m_star_at(0)
        assert margins[m0, 0] <= 0.0  # first member row 0
        assert margins[m0 - 1, 0] > 0.0

    def test_degenerate_extraction(self):
        pp = PathParams(0.5, 1.0)
        table = value_iteration(pp, COST, 1.0)
        s = bellman_placement_set(table, pp, COST, 1.0)
        assert s.m_star == (29, 0)
        pp0 = PathParams(0.5, 0.0)
        table0 = value_iteration(pp0, COST, 1.0)
        s0 = bellman_placement_set(table0, pp0, COST, 1.0)
        assert s0.m_star == (1,) * 29 + (0,)


class TestEquivalence:
    @pytest.mark.parametrize(
        "p,q,eta,lam",
        [
            (0.5, 1.0, 2.0, 1.0),
            (0.5, 0.0, 2.0, 1.0),
            (0.02, 0.5, 3.0, 41.0),
            (0.02, 0.3, 2.0, 1.0),
            (0.002, 0.5, 3.0, 1.0),
        ],
    )
    def test_sets_and_values_agree(self, p, q, eta, lam):
        rep = verify_osla_equivalence(PathParams(p, q), CostParams(eta=eta), lam)
        assert rep.passed, rep.summary()
        assert rep.sets_equal

    def test_price_step_straddle(self):
        # two prices on either side of a staircase jump give different sets,
        # both matching their own value-iteration runs
        pp = PathParams(0.5, 1.0)
        lams = (0.02, 0.03)
        sets = []
        for lam in lams:
            rep = verify_osla_equivalence(pp, COST, lam)
            assert rep.passed, rep.summary()
            sets.append(rep.lookahead_boundary)
        assert sets[0] != sets[1]

    def test_grid_default_covers_solution(self):
        pp = PathParams(0.02, 0.5)
        grid_m, grid_n = default_grid(pp, COST, 41.0)
        opt = solve_unconstrained(pp, COST, 41.0).optimal_set
        assert grid_m >= opt.m_star[0]
        assert grid_n >= opt.n_max
