"""Corridor statistics and the per-hop cost model.

The deployment corridor is a monotone random walk on the nonnegative
integer lattice: each step heads East with probability ``q`` (else North)
and the corridor ends at the newly reached point with probability ``p``.
Hops between nodes are charged through a radial cost ``d(r)``; the shipped
cost is the power law ``p_m + gamma * r**eta``, but any radial callable
satisfying the structural conditions checked by :func:`validate_cost_model`
can be plugged in instead.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "ModelError",
    "PathParams",
    "CostParams",
    "RadialCost",
    "hop_cost",
    "hop_cost_point",
    "hop_deltas",
    "delta_q",
    "CostCheck",
    "CostModelReport",
    "validate_cost_model",
]


class ModelError(ValueError):
    """Parameter outside its documented range."""


@dataclass(frozen=True)
class PathParams:
    """Corridor randomness.

    p: probability the corridor ends at each newly reached lattice point.
       Admits the degenerate p == 1 (single-step corridor); p == 0 would
       mean an a.s. infinite corridor and is rejected.
    q: probability a step heads East rather than North.
    """

    p: float
    q: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 1.0:
            raise ModelError(f"p must be in (0, 1], got {self.p!r}")
        if not 0.0 <= self.q <= 1.0:
            raise ModelError(f"q must be in [0, 1], got {self.q!r}")


@dataclass(frozen=True)
class CostParams:
    """Power hop cost d(r) = p_m + gamma * r**eta.

    p_m: minimum per-hop power (> 0, so even a zero-length hop costs).
    gamma: SNR coefficient (> 0).
    eta: path-loss exponent (>= 1). eta == 1 is admitted but the cost
         increments then stay bounded, which voids the finite-boundary
         guarantee; a warning is emitted.
    """

    p_m: float = 0.1
    gamma: float = 0.01
    eta: float = 2.0

    def __post_init__(self) -> None:
        if not self.p_m > 0.0:
            raise ModelError(f"p_m must be > 0, got {self.p_m!r}")
        if not self.gamma > 0.0:
            raise ModelError(f"gamma must be > 0, got {self.gamma!r}")
        if not self.eta >= 1.0:
            raise ModelError(f"eta must be >= 1, got {self.eta!r}")
        if self.eta == 1.0:
            warnings.warn(
                "eta == 1: cost increments do not diverge, so placement "
                "boundaries may fail to exist for large thresholds",
                stacklevel=2,
            )


# A cost model is either the shipped CostParams or any radial callable.
RadialCost = Union[CostParams, Callable[[np.ndarray], np.ndarray]]


def radial_fn(cost: RadialCost) -> Callable:
    """Return the radial cost callable for ``cost``."""
    if isinstance(cost, CostParams):
        p_m, gamma, eta = cost.p_m, cost.gamma, cost.eta
        return lambda r: p_m + gamma * r**eta
    if callable(cost):
        return cost
    raise TypeError(f"not a cost model: {cost!r}")


def hop_cost(r, cost: RadialCost):
    """Cost of a single hop of length ``r`` (scalar or array)."""
    if np.any(np.asarray(r) < 0):
        raise ModelError("hop length must be nonnegative")
    return radial_fn(cost)(r)


def point_cost(m, n, cost: RadialCost):
    """d at the lattice displacement (m, n); m, n may be arrays.

    For the shipped power cost this is evaluated on the exact squared
    radius, so eta == 2 values carry a single rounding.
    """
    if isinstance(cost, CostParams):
        r2 = np.asarray(m, dtype=float) ** 2 + np.asarray(n, dtype=float) ** 2
        return cost.p_m + cost.gamma * r2 ** (0.5 * cost.eta)
    return radial_fn(cost)(np.hypot(m, n))


def _increment(cost: RadialCost, m_from, n_from, m_to, n_to):
    """d(to) - d(from), cancellation-free for the power cost.

    The fixed part of the power cost drops out exactly, which keeps tie
    comparisons against increment thresholds faithful (for eta == 2 the
    East increment is exactly gamma * (2m + 1) up to one rounding).
    """
    if isinstance(cost, CostParams):
        e = 0.5 * cost.eta
        r2a = np.asarray(m_to, dtype=float) ** 2 + np.asarray(n_to, dtype=float) ** 2
        r2b = np.asarray(m_from, dtype=float) ** 2 + np.asarray(n_from, dtype=float) ** 2
        return cost.gamma * (r2a**e - r2b**e)
    d = radial_fn(cost)
    return d(np.hypot(m_to, n_to)) - d(np.hypot(m_from, n_from))


def hop_cost_point(pt: tuple[int, int], cost: RadialCost) -> float:
    """Cost of a hop spanning the lattice displacement ``(m, n)``."""
    m, n = pt
    if m < 0 or n < 0:
        raise ModelError(f"lattice point must be nonnegative, got {pt!r}")
    return float(point_cost(m, n, cost))


def hop_deltas(pt: tuple[int, int], q: float, cost: RadialCost) -> tuple[float, float, float]:
    """East/North cost increments at ``pt`` and their q-mixture.

    Returns (delta1, delta2, delta_q) where delta1 = d(m+1, n) - d(m, n),
    delta2 = d(m, n+1) - d(m, n) and delta_q = q*delta1 + (1-q)*delta2.
    """
    m, n = pt
    d1 = float(_increment(cost, m, n, m + 1, n))
    d2 = float(_increment(cost, m, n, m, n + 1))
    return d1, d2, q * d1 + (1.0 - q) * d2


def delta_q(m, n, q: float, cost: RadialCost):
    """Vector-friendly q-mixed increment; m and n may be arrays."""
    return q * _increment(cost, m, n, np.asarray(m) + 1, n) + (1.0 - q) * _increment(
        cost, m, n, m, np.asarray(n) + 1
    )


@dataclass(frozen=True)
class CostCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class CostModelReport:
    checks: tuple[CostCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CostCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        return "; ".join(
            f"{c.name}: {'pass' if c.passed else 'FAIL'}" + (f" ({c.detail})" if c.detail else "")
            for c in self.checks
        )


def validate_cost_model(cost: RadialCost, extent: int = 50) -> CostModelReport:
    """Check the structural cost conditions on the grid [0, extent]^2.

    c1: positive cost at zero distance.
    c2: midpoint convexity of d along lattice rows and columns.
    monotone-increments: East/North increments non-decreasing in both
        coordinates (required for threshold-shaped placement boundaries).
    c3: axis increment grows from the origin out to ``extent`` (a finite
        proxy for increments diverging, which bounds the boundary).
    """
    if extent < 2:
        raise ModelError("extent must be >= 2")
    idx = np.arange(extent + 2)
    mm, nn = np.meshgrid(idx, idx, indexing="ij")
    dg = point_cost(mm, nn, cost)
    # absolute slack for float comparisons, scaled to the grid
    tol = 1e-12 * float(np.max(np.abs(dg)))

    checks: list[CostCheck] = []

    c1 = float(dg[0, 0]) > 0.0
    checks.append(CostCheck("c1", c1, "" if c1 else f"d(0,0) = {dg[0, 0]!r}"))

    curv_m = dg[2:, :] - 2.0 * dg[1:-1, :] + dg[:-2, :]
    curv_n = dg[:, 2:] - 2.0 * dg[:, 1:-1] + dg[:, :-2]
    bad = _first_violation(curv_m < -tol) or _first_violation(curv_n < -tol, swap=True)
    checks.append(CostCheck("c2", bad is None, "" if bad is None else f"non-convex near {bad}"))

    delta1 = dg[1:, :] - dg[:-1, :]  # Delta1 on [0, extent] x [0, extent+1]
    delta2 = dg[:, 1:] - dg[:, :-1]
    bad = (
        _first_violation(delta1[1:, :] - delta1[:-1, :] < -tol)
        or _first_violation(delta1[:, 1:] - delta1[:, :-1] < -tol)
        or _first_violation(delta2[1:, :] - delta2[:-1, :] < -tol)
        or _first_violation(delta2[:, 1:] - delta2[:, :-1] < -tol)
    )
    checks.append(
        CostCheck("monotone-increments", bad is None, "" if bad is None else f"decrease near {bad}")
    )

    growth = float(delta1[extent, 0] - delta1[0, 0])
    c3 = growth > tol
    checks.append(
        CostCheck("c3", c3, "" if c3 else f"Delta1({extent},0) - Delta1(0,0) = {growth:.3e}")
    )

    return CostModelReport(tuple(checks))


def _first_violation(mask: np.ndarray, swap: bool = False):
    if not mask.any():
        return None
    i, j = np.argwhere(mask)[0]
    return (int(j), int(i)) if swap else (int(i), int(j))
