import numpy as np
import pytest

from relaywalk import (
    CostParams,
    PathParams,
    compare,
    distance_set,
    eval_cost,
    optimize_threshold,
    solve_unconstrained,
)
from relaywalk.heuristic import heuristic_family

COST = CostParams(0.1, 0.01, 2.0)


class TestDistanceSet:
    def test_radius_one_and_a_half(self):
        s = distance_set(1.5)
        assert s.m_star == (2, 2, 0)  # outside set misses (0,0),(1,0),(0,1),(1,1)

    def test_unit_radius_degenerate(self):
        s = distance_set(1.0)
        assert s.m_star == (1, 0)

    def test_circle_points_are_members(self):
        s = distance_set(5.0)
        assert s.contains(3, 4) and s.contains(4, 3) and s.contains(5, 0)
        assert not s.contains(3, 3)
        assert s.m_star_at(4) == 3

    def test_rejects_nonpositive_radius(self):
        with pytest.raises(ValueError):
            distance_set(0.0)

    def test_admissible_for_evaluation(self):
        pp = PathParams(0.05, 0.4)
        for r in (0.5, 1.0, 2.5, 7.3):
            ev = eval_cost(distance_set(r), pp, COST, lam=1.0)
            assert ev.end_mass + ev.continue_mass == pytest.approx(1.0, abs=1e-10)
            assert abs(ev.identity_residual) <= 1e-8 * (1 + ev.g)


class TestOptimizeThreshold:
    def test_never_beats_the_optimum(self):
        pp = PathParams(0.02, 0.5)
        for lam in (0.0, 5.0, 41.0):
            res = solve_unconstrained(pp, COST, lam)
            _policy, ev = optimize_threshold(pp, COST, lam)
            assert ev.g >= res.g_star - 1e-12

    def test_east_degenerate_matches_optimum_exactly(self):
        # in one dimension circles and increments induce the same family
        pp = PathParams(0.5, 1.0)
        res = solve_unconstrained(pp, COST, 1.0)
        _policy, ev = optimize_threshold(pp, COST, 1.0)
        assert ev.g == pytest.approx(res.g_star, abs=1e-15)

    def test_finer_grid_does_not_hurt(self):
        pp = PathParams(0.02, 0.5)
        _p1, coarse = optimize_threshold(pp, COST, 5.0, r_grid=np.arange(0.5, 20.0, 0.5))
        _p2, fine = optimize_threshold(pp, COST, 5.0, r_grid=np.arange(0.5, 20.0, 0.05))
        assert fine.g <= coarse.g + 1e-15


class TestCompare:
    def test_frontier_dominance_small_instance(self):
        pp = PathParams(0.05, 0.5)
        pts = compare(pp, COST, rho_grid=[0.5, 1.0, 2.0, 4.0])
        for pt in pts:
            assert pt.cost_heuristic >= pt.cost_optimal - 1e-9
        costs = [pt.cost_optimal for pt in pts]
        assert all(a >= b - 1e-9 for a, b in zip(costs, costs[1:]))

    def test_family_budget_interpolation(self):
        pp = PathParams(0.05, 0.5)
        fam = heuristic_family(pp, COST, np.arange(0.5, 12.0, 0.05))
        rel = sorted(fam.relays)
        mid = 0.5 * (rel[3] + rel[4])
        c = fam.cost_at_budget(mid)
        assert min(fam.costs) <= c <= max(fam.costs)
        with pytest.raises(ValueError):
            fam.cost_at_budget(rel[0] * 0.5)
