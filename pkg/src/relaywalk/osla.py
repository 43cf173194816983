"""Fixed-point solver for the optimal placement boundary.

One-step lookahead says: place exactly where the increment of the hop cost
already exceeds the per-step chance of ending times the price of restarting
(relay price plus the cost-to-go from a fresh relay). That cost-to-go is in
turn the renewal value of the induced set, so the optimum solves g(h) = h.
Iterating h <- g(h) from zero walks down to the unique fixed point in a
finite number of set changes, which is the termination test used here: two
consecutive iterates with identical boundaries pin the fixed point exactly,
with no floating-point equality involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PathParams, RadialCost
from .placement import PlacementSet, build_set
from .renewal import SetEvaluation, eval_cost

__all__ = ["ConvergenceError", "SolveResult", "GridScan", "solve_unconstrained", "grid_scan"]


class ConvergenceError(RuntimeError):
    """Iteration cap exceeded (indicates a bug, not bad input)."""


@dataclass(frozen=True)
class SolveResult:
    """Output of the fixed-point solve.

    g_star: optimal expected objective from a fresh deployment.
    optimal_set: the placement set achieving it.
    trace: iterates h(0), h(1), ...; strictly decreasing after the first
        entry until the final repeated value.
    evaluations: renewal evaluation per iterate; the last one describes
        ``optimal_set``.
    """

    g_star: float
    optimal_set: PlacementSet
    trace: tuple[float, ...]
    iterations: int
    evaluations: tuple[SetEvaluation, ...]
    evaluation: SetEvaluation

    @property
    def final_evaluation(self) -> SetEvaluation:
        """Renewal evaluation of ``optimal_set``."""
        return self.evaluation

    def to_record(self) -> dict:
        return {
            "g_star": self.g_star,
            "iterations": self.iterations,
            "trace": list(self.trace),
            "evaluation": self.final_evaluation.to_record(),
            "set": self.optimal_set.to_record(),
        }


def solve_unconstrained(
    pp: PathParams,
    cost: RadialCost,
    lam: float,
    *,
    h0: float = 0.0,
    max_iterations: int = 1000,
) -> SolveResult:
    """Optimal placement set and value for relay price ``lam``.

    ``h0`` warms the start (any nonnegative value converges; sweeps reuse
    the previous optimum).
    """
    if lam < 0:
        raise ValueError("relay price must be nonnegative")
    if h0 < 0:
        raise ValueError("h0 must be nonnegative")

    h = h0
    trace = [h0]
    evals: list[SetEvaluation] = []
    seen: dict[tuple[int, ...], int] = {}
    history: list[tuple[PlacementSet, SetEvaluation]] = []
    for _ in range(max_iterations):
        s = build_set(pp.p * (lam + h), pp.q, cost)
        first = seen.get(s.m_star)
        if first is not None:
            if first == len(history) - 1:
                # same set twice in a row: g depends on h only through the
                # set, so g(h) == h exactly and h is the fixed point
                idx = first
            else:
                # rounding cycle: the fixed point sits within an ulp of a
                # boundary tie; settle it tie-inclusively (the largest set
                # in the cycle, i.e. the one with the smallest complement)
                idx = min(
                    range(first, len(history)),
                    key=lambda i: history[i][0].complement_size(),
                )
            s_opt, ev_opt = history[idx]
            return SolveResult(
                g_star=ev_opt.g,
                optimal_set=s_opt,
                trace=tuple(trace),
                iterations=len(trace) - 1,
                evaluations=tuple(evals),
                evaluation=ev_opt,
            )
        ev = eval_cost(s, pp, cost, lam)
        seen[s.m_star] = len(history)
        history.append((s, ev))
        evals.append(ev)
        h = ev.g
        trace.append(h)
    raise ConvergenceError(
        f"no fixed point after {max_iterations} iterations; trace tail {trace[-5:]}"
    )


@dataclass(frozen=True)
class GridScan:
    """g sampled on an h-grid, the independent check on the fixed point."""

    hs: np.ndarray
    gs: np.ndarray

    @property
    def min_g(self) -> float:
        return float(self.gs.min())

    @property
    def argmin_h(self) -> float:
        return float(self.hs[int(self.gs.argmin())])

    def diagonal_crossings(self) -> int:
        """Sign changes of g(h) - h from + to - along the grid."""
        sign = np.sign(self.gs - self.hs)
        nz = sign[sign != 0]
        return int(np.sum((nz[:-1] > 0) & (nz[1:] < 0)))

    def rows(self):
        return zip(self.hs.tolist(), self.gs.tolist())


def grid_scan(
    pp: PathParams,
    cost: RadialCost,
    lam: float,
    h_max: float,
    step: float,
) -> GridScan:
    """Evaluate g on the grid {0, step, ..., h_max}.

    Consecutive grid points usually induce the same set; those reuse the
    previous evaluation, so the scan costs one evaluation per distinct set.
    """
    if h_max <= 0 or step <= 0:
        raise ValueError("h_max and step must be positive")
    hs = np.arange(0.0, h_max + step / 2, step)
    gs = np.empty_like(hs)
    prev_set: PlacementSet | None = None
    prev_g = 0.0
    for i, h in enumerate(hs):
        s = build_set(pp.p * (lam + float(h)), pp.q, cost)
        if prev_set is None or not s.same_set(prev_set):
            prev_g = eval_cost(s, pp, cost, lam).g
            prev_set = s
        gs[i] = prev_g
    return GridScan(hs=hs, gs=gs)
