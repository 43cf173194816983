"""Self-contained invariant battery behind ``relaywalk verify``.

Each check prints one PASS/FAIL line; the runner returns the failure
count. The battery favors breadth over depth: the heavy parameter matrix
lives in the test suite, this is the quick field check.
"""

from __future__ import annotations

import warnings

import numpy as np

from .bellman import finite_horizon_values, verify_osla_equivalence
from .constrained import mixing_objective_gap, solve_constrained
from .heuristic import optimize_threshold
from .model import CostParams, PathParams, validate_cost_model
from .osla import grid_scan, solve_unconstrained
from .placement import boundary_partition, build_set
from .renewal import eval_cost, reaching_prob, reaching_table
from .simulate import monte_carlo

__all__ = ["run_checks"]


def _trace_decreasing(trace) -> bool:
    core = trace[1:]
    return all(a > b for a, b in zip(core, core[1:])) or (
        len(core) >= 2
        and core[-1] == core[-2]
        and all(a > b for a, b in zip(core[:-1], core[1:-1]))
    )


def _checks():
    cost = CostParams()
    cost3 = CostParams(eta=3.0)

    def cost_conditions():
        rep = validate_cost_model(cost, extent=50)
        rep3 = validate_cost_model(cost3, extent=20)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lin = CostParams(eta=1.0)
        rep1 = validate_cost_model(lin, extent=50)
        assert rep.ok, rep.summary()
        assert rep3.ok, rep3.summary()
        assert not rep1["c3"].passed, "linear cost must fail the growth proxy"
        return "power cost passes c1-c3; linear cost flagged"

    def set_structure():
        s = build_set(0.082, 0.5, cost)
        assert s.m_star == (8, 7, 6, 5, 4, 3, 2, 1, 0)
        part = boundary_partition(s)
        assert len(part) == len(set(part.all_points))
        for m, n in part.all_points:
            assert s.contains(m, n) and s.contains(m + 1, n) and s.contains(m, n + 1)
        return "diagonal boundary, disjoint partition, upward closed"

    def normalization_and_identity():
        cases = [
            (PathParams(0.5, 1.0), build_set(0.3, 1.0, cost), 1.0),
            (PathParams(0.5, 0.0), build_set(0.3, 0.0, cost), 1.0),
            (PathParams(0.002, 0.5), build_set(0.082, 0.5, cost), 41.0),
            (PathParams(0.02, 0.3), build_set(0.05, 0.3, cost3), 5.0),
        ]
        for pp, s, lam in cases:
            ev = eval_cost(s, pp, cost, lam)
            assert abs(ev.end_mass + ev.continue_mass - 1.0) <= 1e-10
            assert abs(ev.identity_residual) <= 1e-8 * (1.0 + abs(ev.g))
        return f"{len(cases)} sets: masses sum to one, cycle identity ~ 0"

    def reaching_agreement():
        pp = PathParams(0.02, 0.3)
        s = build_set(0.06, 0.3, cost)
        table = reaching_table(s, pp)
        worst = 0.0
        for (m, n), dp_val in table.items():
            closed = reaching_prob((m, n), pp)
            if closed > 1e-300 or dp_val > 1e-300:
                worst = max(worst, abs(dp_val - closed) / max(closed, dp_val))
        assert worst <= 1e-12, f"worst relative gap {worst}"
        return f"step recursion matches closed form (worst {worst:.1e})"

    def fixed_point_behavior():
        pp = PathParams(0.02, 0.5)
        res = solve_unconstrained(pp, cost3, 41.0)
        assert res.iterations <= 10
        assert _trace_decreasing(res.trace), res.trace
        scan = grid_scan(pp, cost3, 41.0, h_max=2.0 * res.g_star + 50.0, step=res.g_star / 40.0)
        assert scan.diagonal_crossings() == 1
        above = scan.hs > res.g_star
        assert np.all(scan.gs[above] < scan.hs[above])
        assert scan.min_g >= res.g_star - 1e-9
        return f"trace monotone, single diagonal crossing, g* = {res.g_star:.3f}"

    def bellman_agreement():
        for p, q, eta, lam in [(0.5, 1.0, 2.0, 1.0), (0.02, 0.5, 3.0, 41.0), (0.02, 0.3, 2.0, 1.0)]:
            rep = verify_osla_equivalence(PathParams(p, q), CostParams(eta=eta), lam)
            assert rep.passed, rep.summary()
        return "lookahead and value-iteration optima coincide on 3 instances"

    def horizon_monotonicity():
        pp = PathParams(0.02, 0.5)
        for k in (1, 2, 5):
            table = finite_horizon_values(k, pp, cost, 41.0, (30, 30))
            h = table.h_table(cost)
            assert np.all(np.diff(h, axis=0) >= -1e-9)
            assert np.all(np.diff(h, axis=1) >= -1e-9)
        return "stopping margin non-decreasing for horizons 1, 2, 5"

    def constrained_mixing():
        pp = PathParams(0.5, 1.0)
        sol = solve_constrained(pp, cost, 0.05)
        assert sol.kind == "mixed"
        assert abs(sol.achieved_relays - 0.05) <= 1e-9
        gap = mixing_objective_gap(sol, pp, cost)
        assert gap <= 1e-8, gap
        return f"mixed policy hits the budget exactly (component gap {gap:.1e})"

    def heuristic_dominance():
        pp = PathParams(0.02, 0.5)
        res = solve_unconstrained(pp, cost, 5.0)
        _pol, ev = optimize_threshold(pp, cost, 5.0)
        assert ev.g >= res.g_star - 1e-12
        return f"best circle {ev.g:.4f} >= optimum {res.g_star:.4f}"

    def simulator_consistency():
        pp = PathParams(0.5, 1.0)
        res = solve_unconstrained(pp, cost, 1.0)
        mc1 = monte_carlo(res.optimal_set, pp, cost, 1.0, 4000, seed=7)
        mc2 = monte_carlo(res.optimal_set, pp, cost, 1.0, 4000, seed=7)
        assert mc1 == mc2
        assert abs(mc1.mean_objective - res.g_star) <= 4.0 * mc1.se_objective
        return "seeded runs identical; estimate brackets the optimum"

    return [
        ("cost-model conditions", cost_conditions),
        ("placement-set structure", set_structure),
        ("mass normalization + cycle identity", normalization_and_identity),
        ("reaching probabilities, two routes", reaching_agreement),
        ("fixed-point behavior", fixed_point_behavior),
        ("value-iteration agreement", bellman_agreement),
        ("finite-horizon monotonicity", horizon_monotonicity),
        ("constrained mixing", constrained_mixing),
        ("distance heuristic dominance", heuristic_dominance),
        ("simulator determinism + agreement", simulator_consistency),
    ]


def run_checks(out=print) -> int:
    failures = 0
    for name, fn in _checks():
        try:
            detail = fn()
        except AssertionError as exc:
            failures += 1
            out(f"FAIL {name}: {exc}")
        except Exception as exc:  # noqa: BLE001
            failures += 1
            out(f"FAIL {name}: {type(exc).__name__}: {exc}")
        else:
            out(f"PASS {name}: {detail}")
    return failures
