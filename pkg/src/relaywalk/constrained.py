"""Relay-budget-constrained deployment via the priced-relay family.

Sweeping the relay price traces a staircase of expected relay counts:
each optimal set stays optimal over a price interval, so the count is
piecewise constant and non-increasing. A budget falling on a staircase
value is met by that pure policy; a budget inside a jump is met exactly
by randomizing once, at deployment start, between the two sets that are
both optimal at the jump price.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import PathParams, RadialCost
from .osla import SolveResult, solve_unconstrained
from .placement import PlacementSet
from .renewal import eval_cost

__all__ = [
    "InfeasibleBudgetError",
    "LambdaPoint",
    "ConstrainedSolution",
    "MixedPolicy",
    "relay_curve",
    "solve_constrained",
]

_STEP_RTOL = 1e-10  # relative bracket width that pins a staircase jump


class InfeasibleBudgetError(RuntimeError):
    """No priced policy meets the requested relay budget."""


@dataclass(frozen=True)
class LambdaPoint:
    """One relay price on the sweep: counts, bare cost, and objective."""

    lam: float
    expected_relays: float
    expected_cost: float
    total_cost: float
    set: PlacementSet


@dataclass(frozen=True)
class MixedPolicy:
    """Start-of-deployment randomization between two placement sets.

    ``over`` (the more placing-happy set) is used with probability
    ``alpha``, ``under`` otherwise; drawn once per deployment.
    """

    under: PlacementSet
    over: PlacementSet
    alpha: float

    def draw(self, rng) -> PlacementSet:
        return self.over if rng.random() < self.alpha else self.under

    @property
    def degenerate(self) -> bool:
        return self.alpha in (0.0, 1.0) or self.under.same_set(self.over)


@dataclass(frozen=True)
class ConstrainedSolution:
    """Budget-constrained optimum.

    kind: "unconstrained-at-zero" when the budget is slack even for free
        relays; "pure" when some price meets it exactly; "mixed" otherwise.
    """

    kind: str
    lam: float
    set_under: PlacementSet
    set_over: PlacementSet
    alpha: float
    achieved_relays: float
    achieved_cost: float
    rho_under: float
    rho_over: float

    @property
    def policy(self) -> MixedPolicy | PlacementSet:
        if self.kind == "mixed":
            return MixedPolicy(self.set_under, self.set_over, self.alpha)
        return self.set_over

    def to_record(self) -> dict:
        return {
            "kind": self.kind,
            "lambda": self.lam,
            "alpha": self.alpha,
            "achieved_relays": self.achieved_relays,
            "achieved_cost": self.achieved_cost,
            "rho_under": self.rho_under,
            "rho_over": self.rho_over,
            "set_under": self.set_under.to_record(),
            "set_over": self.set_over.to_record(),
        }


def _bare_cost(res: SolveResult, lam: float) -> float:
    """Expected hop-cost sum of the solved policy, price stripped."""
    ev = res.final_evaluation
    return ev.g - lam * ev.expected_relays


def _solve_point(pp: PathParams, cost: RadialCost, lam: float, h0: float) -> LambdaPoint:
    res = solve_unconstrained(pp, cost, lam, h0=h0)
    ev = res.final_evaluation
    return LambdaPoint(
        lam=lam,
        expected_relays=ev.expected_relays,
        expected_cost=_bare_cost(res, lam),
        total_cost=res.g_star,
        set=res.optimal_set,
    )


def relay_curve(pp: PathParams, cost: RadialCost, lambda_grid) -> list[LambdaPoint]:
    """Solve the priced problem along ``lambda_grid`` (ascending)."""
    lams = [float(v) for v in lambda_grid]
    if lams != sorted(lams):
        raise ValueError("lambda grid must be ascending")
    points: list[LambdaPoint] = []
    h0 = 0.0  # warm start: optima grow with the price
    for lam in lams:
        pt = _solve_point(pp, cost, lam, h0)
        points.append(pt)
        h0 = pt.total_cost
    return points


def solve_constrained(
    pp: PathParams, cost: RadialCost, rho_avg: float, *, max_doublings: int = 70
) -> ConstrainedSolution:
    """Cheapest deployment with expected relay count at most ``rho_avg``.

    Free-relay slack returns the zero-price solution; otherwise the price
    is bisected over the non-increasing staircase of relay counts. Set
    identity, not the count value, detects the jump: counts repeat across
    a plateau but the sets on either side of a jump differ.
    """
    if rho_avg <= 0:
        raise ValueError("relay budget must be positive")

    cache: dict[float, LambdaPoint] = {}

    def point(lam: float, h0: float) -> LambdaPoint:
        got = cache.get(lam)
        if got is None:
            got = _solve_point(pp, cost, lam, h0)
            cache[lam] = got
        return got

    at_zero = point(0.0, 0.0)
    rho_max = at_zero.expected_relays
    if rho_avg >= rho_max:
        return ConstrainedSolution(
            kind="unconstrained-at-zero",
            lam=0.0,
            set_under=at_zero.set,
            set_over=at_zero.set,
            alpha=0.0,
            achieved_relays=rho_max,
            achieved_cost=at_zero.expected_cost,
            rho_under=rho_max,
            rho_over=rho_max,
        )

    def pure(pt: LambdaPoint) -> ConstrainedSolution:
        return ConstrainedSolution(
            kind="pure",
            lam=pt.lam,
            set_under=pt.set,
            set_over=pt.set,
            alpha=0.0,
            achieved_relays=pt.expected_relays,
            achieved_cost=pt.expected_cost,
            rho_under=pt.expected_relays,
            rho_over=pt.expected_relays,
        )

    if at_zero.expected_relays == rho_avg:
        return pure(at_zero)

    # bracket: relay count exceeds the budget at lam_lo, meets it at lam_hi
    lam_lo, pt_lo = 0.0, at_zero
    lam_hi = 1.0
    for _ in range(max_doublings):
        pt_hi = point(lam_hi, pt_lo.total_cost)
        if pt_hi.expected_relays == rho_avg:
            return pure(pt_hi)
        if pt_hi.expected_relays < rho_avg:
            break
        lam_lo, pt_lo = lam_hi, pt_hi
        lam_hi *= 2.0
    else:
        raise InfeasibleBudgetError(
            f"budget {rho_avg} not reached by price {lam_hi}; "
            f"best achieved {pt_hi.expected_relays}"
        )

    while lam_hi - lam_lo > _STEP_RTOL * (1.0 + lam_hi):
        mid = 0.5 * (lam_lo + lam_hi)
        pt_mid = point(mid, pt_lo.total_cost)
        if pt_mid.expected_relays == rho_avg:
            return pure(pt_mid)
        if pt_mid.expected_relays > rho_avg:
            lam_lo, pt_lo = mid, pt_mid
        else:
            lam_hi, pt_hi = mid, pt_mid

    rho_over, rho_under = pt_lo.expected_relays, pt_hi.expected_relays
    if not rho_under < rho_avg < rho_over:
        raise InfeasibleBudgetError(
            f"staircase jump ({rho_under}, {rho_over}) does not straddle {rho_avg}"
        )
    alpha = (rho_avg - rho_under) / (rho_over - rho_under)
    achieved_cost = (1.0 - alpha) * pt_hi.expected_cost + alpha * pt_lo.expected_cost
    return ConstrainedSolution(
        kind="mixed",
        lam=0.5 * (lam_lo + lam_hi),
        set_under=pt_hi.set,
        set_over=pt_lo.set,
        alpha=alpha,
        achieved_relays=(1.0 - alpha) * rho_under + alpha * rho_over,
        achieved_cost=achieved_cost,
        rho_under=rho_under,
        rho_over=rho_over,
    )


def mixing_objective_gap(
    sol: ConstrainedSolution, pp: PathParams, cost: RadialCost
) -> float:
    """Objective spread of the two mixed components at the jump price.

    Both components are optimal at the price where the staircase jumps, so
    their priced objectives there agree; the spread is a numerical check.
    """
    if sol.kind != "mixed":
        return 0.0
    g_under = eval_cost(sol.set_under, pp, cost, sol.lam).g
    g_over = eval_cost(sol.set_over, pp, cost, sol.lam).g
    return abs(g_under - g_over)
