"""Constant-distance baseline: place once a circular boundary is crossed.

Prior deployments trigger on signal strength, which under isotropic loss
is a distance threshold; on the lattice that is the circle of radius
``r_th`` around the last relay. The family is evaluated with the same
renewal machinery as the optimal sets, optimized over the radius, and
compared against the optimum along a relay-budget frontier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constrained import solve_constrained
from .model import PathParams, RadialCost
from .osla import solve_unconstrained
from .placement import PlacementSet
from .renewal import SetEvaluation, eval_cost

__all__ = [
    "DistancePolicy",
    "distance_set",
    "default_radius_grid",
    "optimize_threshold",
    "HeuristicFamily",
    "heuristic_family",
    "FrontierPoint",
    "compare",
]


@dataclass(frozen=True)
class DistancePolicy:
    """A distance threshold and the placement set it induces."""

    r_th: float
    induced_set: PlacementSet


def distance_set(r_th: float) -> PlacementSet:
    """Set of displacements at least ``r_th`` from the last relay.

    Points exactly on the circle are members. The origin guard applies as
    everywhere; tiny radii degenerate to the everything-but-origin set.
    """
    if r_th <= 0:
        raise ValueError("distance threshold must be positive")
    r2 = r_th * r_th
    rows: list[int] = []
    n = 0
    while True:
        m = math.isqrt(max(0, math.ceil(r2 - n * n)))
        while m * m + n * n < r2:
            m += 1
        while m >= 1 and (m - 1) * (m - 1) + n * n >= r2:
            m -= 1
        rows.append(m)
        if m == 0:
            break
        n += 1
    if rows[0] == 0:
        rows = [1, 0]
    guard = r_th <= 1.0  # (0,0) is inside every circle through lattice points
    return PlacementSet(r_th, 0.5, tuple(rows), origin_guard=guard, rule="distance")


def default_radius_grid(
    pp: PathParams, cost: RadialCost, lam: float, step: float = 0.05
) -> np.ndarray:
    """Radii 0.5, 0.55, ... out past the optimal set's bounding box."""
    opt = solve_unconstrained(pp, cost, lam).optimal_set
    r_max = math.hypot(opt.m_star[0], opt.n_max) + 2.0
    return np.arange(0.5, r_max + step / 2, step)


def optimize_threshold(
    pp: PathParams, cost: RadialCost, lam: float, r_grid=None
) -> tuple[DistancePolicy, SetEvaluation]:
    """Best constant-distance policy on the grid, by priced objective."""
    if r_grid is None:
        r_grid = default_radius_grid(pp, cost, lam)
    r_grid = [float(r) for r in r_grid]
    if not r_grid:
        raise ValueError("radius grid is empty")
    best: tuple[float, PlacementSet, SetEvaluation] | None = None
    prev: PlacementSet | None = None
    for r in r_grid:
        s = distance_set(r)
        if prev is not None and s.same_set(prev):
            continue
        prev = s
        ev = eval_cost(s, pp, cost, lam)
        if best is None or ev.g < best[2].g:
            best = (r, s, ev)
    r_star, s_star, ev_star = best
    return DistancePolicy(r_star, s_star), ev_star


@dataclass(frozen=True)
class HeuristicFamily:
    """Distinct distance policies with their relay counts and bare costs.

    ``cost_at_budget`` reads the lower convex envelope of the
    (relay count, bare cost) cloud: mixing two thresholds at deployment
    start realizes exactly the chords of that envelope.
    """

    radii: tuple[float, ...]
    relays: tuple[float, ...]
    costs: tuple[float, ...]

    def cost_at_budget(self, rho: float) -> float:
        hull = self._lower_hull()
        if rho < hull[0][0]:
            raise ValueError(f"budget {rho} below the family's smallest relay count")
        if rho >= hull[-1][0]:
            return min(c for _, c in hull)
        for (r_lo, c_lo), (r_hi, c_hi) in zip(hull, hull[1:]):
            if r_lo <= rho <= r_hi:
                alpha = (rho - r_lo) / (r_hi - r_lo)
                return (1.0 - alpha) * c_lo + alpha * c_hi
        raise AssertionError("unreachable")

    def _lower_hull(self) -> list[tuple[float, float]]:
        """Lower convex hull of (relays, cost), relays ascending."""
        pts = sorted(set(zip(self.relays, self.costs)))
        hull: list[tuple[float, float]] = []
        for pt in pts:
            while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0.0:
                hull.pop()
            hull.append(pt)
        return hull


def _cross(o: tuple[float, float], a: tuple[float, float], b: tuple[float, float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def heuristic_family(pp: PathParams, cost: RadialCost, r_grid) -> HeuristicFamily:
    """Evaluate the distinct sets on the radius grid (price-free)."""
    radii: list[float] = []
    relays: list[float] = []
    costs: list[float] = []
    prev: PlacementSet | None = None
    for r in (float(v) for v in r_grid):
        s = distance_set(r)
        if prev is not None and s.same_set(prev):
            continue
        prev = s
        ev = eval_cost(s, pp, cost, lam=0.0)
        radii.append(r)
        relays.append(ev.expected_relays)
        costs.append(ev.g)  # price-free objective is the bare hop cost
    return HeuristicFamily(tuple(radii), tuple(relays), tuple(costs))


@dataclass(frozen=True)
class FrontierPoint:
    rho: float
    cost_optimal: float
    cost_heuristic: float


def compare(pp: PathParams, cost: RadialCost, rho_grid, r_grid=None) -> list[FrontierPoint]:
    """Optimal vs constant-distance cost at each relay budget."""
    rhos = sorted(float(r) for r in rho_grid)
    if not rhos:
        raise ValueError("rho grid is empty")
    if r_grid is None:
        # the smallest budget needs the widest circle: size the grid off
        # the optimal set at that end of the frontier
        probe_set = solve_constrained(pp, cost, rhos[0]).set_under
        r_max = math.hypot(probe_set.m_star[0], probe_set.n_max) + 2.0
        r_grid = np.arange(0.5, r_max + 0.025, 0.05)
    family = heuristic_family(pp, cost, r_grid)
    out = []
    for rho in rhos:
        opt = solve_constrained(pp, cost, rho)
        out.append(
            FrontierPoint(
                rho=rho,
                cost_optimal=opt.achieved_cost,
                cost_heuristic=family.cost_at_budget(rho),
            )
        )
    return out
