import math

import pytest
from hypothesis import given, settings, strategies as st

from relaywalk import (
    CostParams,
    EvaluationError,
    PathParams,
    PlacementSet,
    build_set,
    eval_cost,
    hit_probs,
    identity_residual,
    reaching_prob,
    reaching_table,
)

COST = CostParams(0.1, 0.01, 2.0)
COST3 = CostParams(0.1, 0.01, 3.0)


def oracle_1d_g(threshold_m: int, p: float, lam: float, cost: CostParams) -> float:
    """Independent geometric-series evaluation of an Eastward threshold set."""
    d = lambda r: cost.p_m + cost.gamma * r**cost.eta
    ends = math.fsum(p * (1 - p) ** (m - 1) * d(m) for m in range(1, threshold_m + 1))
    cont = (1 - p) ** threshold_m
    return (ends + cont * (lam + d(threshold_m))) / (1 - cont)


class TestReachingProb:
    def test_origin_is_certain(self):
        assert reaching_prob((0, 0), PathParams(0.37, 0.81)) == 1.0

    def test_single_step(self):
        assert reaching_prob((1, 0), PathParams(0.5, 0.5)) == pytest.approx(0.25, abs=1e-15)

    def test_two_step_diagonal(self):
        assert reaching_prob((1, 1), PathParams(0.5, 0.5)) == pytest.approx(0.125, abs=1e-15)

    @given(st.integers(0, 60), st.integers(0, 60))
    @settings(max_examples=60, deadline=None)
    def test_binomial_row_sums_to_survival(self, m, n):
        # across one antidiagonal the reach probabilities sum to (1-p)^s
        pp = PathParams(0.05, 0.35)
        s = m + n
        total = math.fsum(reaching_prob((k, s - k), pp) for k in range(s + 1))
        assert total == pytest.approx((1 - pp.p) ** s, rel=1e-11)


class TestReachingTable:
    def test_matches_closed_form_on_moderate_set(self):
        pp = PathParams(0.02, 0.3)
        s = build_set(0.06, 0.3, COST)
        table = reaching_table(s, pp)
        assert table[0, 0] == 1.0
        for (m, n), dp_val in table.items():
            closed = reaching_prob((m, n), pp)
            if max(dp_val, closed) > 1e-300:
                assert dp_val == pytest.approx(closed, rel=1e-12)

    def test_line_set_interior_value(self):
        pp = PathParams(0.002, 0.5)
        s = build_set(0.082, 0.5, COST)
        assert reaching_table(s, pp)[1, 1] == pytest.approx(2 * 0.998**2 * 0.25, rel=1e-12)

    def test_east_degenerate_geometric(self):
        pp = PathParams(0.25, 1.0)
        s = PlacementSet(0.0, 1.0, (6, 0))
        table = reaching_table(s, pp)
        for k in range(6):
            assert table[k, 0] == pytest.approx(0.75**k, rel=1e-12)


class TestHitProbs:
    def test_first_step_boundary(self):
        s = PlacementSet(0.0, 1.0, (1, 0))
        p_end, p_cont = hit_probs(s, (1, 0), PathParams(0.5, 1.0))
        assert p_end == 0.5 and p_cont == 0.5

    def test_east_degenerate_boundary_continuation(self):
        s = PlacementSet(0.0, 1.0, (4, 0))
        p_end, p_cont = hit_probs(s, (4, 0), PathParams(0.3, 1.0))
        assert p_cont == pytest.approx(0.7**4, rel=1e-12)

    def test_interior_point(self):
        s = build_set(0.082, 0.5, COST)
        p_end, p_cont = hit_probs(s, (1, 1), PathParams(0.5, 0.5))
        assert p_end == pytest.approx(0.125, abs=1e-15)
        assert p_cont == 0.0  # continuing through the interior is not a renewal event

    def test_member_interior_rejected(self):
        s = build_set(0.082, 0.5, COST)
        with pytest.raises(EvaluationError):
            hit_probs(s, (10, 10), PathParams(0.5, 0.5))

    def test_origin_rejected(self):
        s = build_set(0.082, 0.5, COST)
        with pytest.raises(EvaluationError):
            hit_probs(s, (0, 0), PathParams(0.5, 0.5))


class TestEvalCost:
    def test_1d_matches_geometric_oracle(self):
        pp = PathParams(0.5, 1.0)
        for threshold_m in (3, 10, 25):
            s = PlacementSet(0.0, 1.0, (threshold_m, 0))
            ev = eval_cost(s, pp, COST, lam=1.0)
            assert ev.g == pytest.approx(oracle_1d_g(threshold_m, 0.5, 1.0, COST), rel=1e-13)

    def test_expected_relays_one_seventh_exact(self):
        s = PlacementSet(0.0, 1.0, (3, 0))
        ev = eval_cost(s, PathParams(0.5, 1.0), COST, lam=1.0)
        assert ev.expected_relays == 1 / 7

    def test_spec_25_threshold_values(self):
        s = PlacementSet(0.0, 1.0, (25, 0))
        ev = eval_cost(s, PathParams(0.5, 1.0), COST, lam=1.0)
        assert ev.g == pytest.approx(0.16, abs=5e-9)
        assert ev.continue_mass == pytest.approx(2.98023e-8, rel=1e-4)

    def test_masses_sum_to_one(self):
        cases = [
            (PathParams(0.5, 0.5), build_set(0.57, 0.5, COST), 1.0),
            (PathParams(0.002, 0.5), build_set(0.082, 0.5, COST), 41.0),
            (PathParams(0.02, 0.3), build_set(0.2, 0.3, COST3), 5.0),
            (PathParams(0.5, 1.0), PlacementSet(0.0, 1.0, (7, 0)), 2.0),
            (PathParams(0.25, 0.0), PlacementSet(0.0, 0.0, (1, 1, 1, 1, 0)), 2.0),
            (PathParams(1.0, 0.7), build_set(0.3, 0.7, COST), 1.0),
        ]
        for pp, s, lam in cases:
            ev = eval_cost(s, pp, COST, lam)
            assert ev.end_mass + ev.continue_mass == pytest.approx(1.0, abs=1e-10)
            assert 0.0 <= ev.continue_mass < 1.0
            assert ev.g > 0.0
            assert ev.expected_relays >= 0.0

    def test_objective_is_affine_in_price(self):
        pp = PathParams(0.02, 0.5)
        s = build_set(0.9, 0.5, COST)
        ev0 = eval_cost(s, pp, COST, lam=0.0)
        ev5 = eval_cost(s, pp, COST, lam=5.0)
        assert ev5.g == pytest.approx(ev0.g + 5.0 * ev0.expected_relays, rel=1e-12)
        assert ev5.expected_relays == ev0.expected_relays

    def test_immediate_end_instance(self):
        # p = 1: the corridor is one step; no relay is ever placed
        ev = eval_cost(build_set(0.5, 0.7, COST), PathParams(1.0, 0.7), COST, lam=3.0)
        assert ev.expected_relays == 0.0
        assert ev.g == pytest.approx(0.11, rel=1e-12)


class TestIdentity:
    CASES = [
        (PathParams(0.5, 1.0), PlacementSet(0.0, 1.0, (25, 0)), 1.0),
        (PathParams(0.002, 0.5), build_set(0.082, 0.5, COST), 41.0),
        (PathParams(0.02, 0.3), build_set(0.2, 0.3, COST3), 5.0),
        (PathParams(0.25, 0.0), PlacementSet(0.0, 0.0, (1, 1, 1, 0)), 0.5),
    ]

    @pytest.mark.parametrize("pp,s,lam", CASES)
    def test_residual_vanishes_at_g(self, pp, s, lam):
        cost = COST if s.q != 0.3 else COST3
        ev = eval_cost(s, pp, cost, lam)
        assert abs(ev.identity_residual) <= 1e-8 * (1.0 + abs(ev.g))

    def test_wrong_g_shifts_residual_linearly(self):
        pp = PathParams(0.002, 0.5)
        s = build_set(0.082, 0.5, COST)
        ev = eval_cost(s, pp, COST, 41.0)
        r_mass = math.fsum(reaching_table(s, pp).values())
        shifted = identity_residual(s, ev.g + 1.0, pp, COST, 41.0)
        assert shifted == pytest.approx(ev.identity_residual - pp.p * r_mass, rel=1e-9)
        assert abs(shifted) > 1e-6


class TestRandomSets:
    @given(
        st.lists(st.integers(0, 12), min_size=1, max_size=8),
        st.floats(0.05, 0.95),
        st.floats(0.02, 0.9),
    )
    @settings(max_examples=50, deadline=None)
    def test_any_admissible_staircase_normalizes(self, widths, q, p):
        rows = sorted((max(w, 1) for w in widths), reverse=True)
        rows.append(0)
        s = PlacementSet(float("nan"), q, tuple(rows), rule="custom")
        pp = PathParams(p, q)
        ev = eval_cost(s, pp, COST, lam=2.0)
        assert ev.end_mass + ev.continue_mass == pytest.approx(1.0, abs=1e-10)
        assert abs(ev.identity_residual) <= 1e-8 * (1.0 + abs(ev.g))
