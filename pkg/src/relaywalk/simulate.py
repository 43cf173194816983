"""Seeded Monte Carlo corridors and policy execution.

Episodes draw their randomness from per-episode streams spawned off the
root seed, so results are reproducible bit-for-bit regardless of how the
episodes would be scheduled, and aggregation is order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .constrained import MixedPolicy
from .model import PathParams, RadialCost, point_cost
from .placement import PlacementSet

__all__ = [
    "PathEvent",
    "EpisodeResult",
    "McEstimate",
    "sample_path",
    "walk_events",
    "run_episode",
    "monte_carlo",
]

Policy = Union[PlacementSet, MixedPolicy]


class PathEvent(NamedTuple):
    """One corridor step: its direction and whether the corridor ends there."""

    direction: str  # "E" or "N"
    ended: bool


@dataclass(frozen=True)
class EpisodeResult:
    """One deployment: hop-cost total, relays placed, and where."""

    total_cost: float
    relays: int
    steps: int
    relay_positions: tuple[tuple[int, int], ...]

    def objective(self, lam: float) -> float:
        return self.total_cost + lam * self.relays


@dataclass(frozen=True)
class McEstimate:
    """Sample means with standard errors over seeded episodes."""

    mean_cost: float
    se_cost: float
    mean_relays: float
    se_relays: float
    mean_objective: float
    se_objective: float
    episodes: int
    seed: int

    def to_record(self) -> dict:
        return {
            "mean_cost": self.mean_cost,
            "se_cost": self.se_cost,
            "mean_relays": self.mean_relays,
            "se_relays": self.se_relays,
            "mean_objective": self.mean_objective,
            "se_objective": self.se_objective,
            "episodes": self.episodes,
            "seed": self.seed,
        }


def sample_path(pp: PathParams, rng: np.random.Generator) -> list[PathEvent]:
    """Draw one corridor: geometric length, then independent directions."""
    length = int(rng.geometric(pp.p))
    east = rng.random(length) < pp.q
    return [
        PathEvent("E" if east[i] else "N", i == length - 1) for i in range(length)
    ]


def walk_events(
    events: Sequence[PathEvent], policy_set: PlacementSet, cost: RadialCost
) -> EpisodeResult:
    """Deterministically execute a placement set along a fixed corridor.

    Tracks the displacement since the last relay; a relay goes down the
    moment the displacement enters the set (always on its boundary, by
    upward closure), the frame resets, and the corridor's end places the
    source with one final hop.
    """
    mstar = policy_set.m_star
    n_hi = len(mstar) - 1
    m = n = am = an = steps = 0
    total = 0.0
    relays: list[tuple[int, int]] = []
    ended = False
    for ev in events:
        steps += 1
        if ev.direction == "E":
            m += 1
            am += 1
        else:
            n += 1
            an += 1
        if ev.ended:
            total += float(point_cost(m, n, cost))
            ended = True
            break
        if m >= mstar[n if n < n_hi else n_hi] and (m or n):
            total += float(point_cost(m, n, cost))
            relays.append((am, an))
            m = n = 0
    if not ended:
        raise ValueError("event sequence does not terminate the corridor")
    return EpisodeResult(
        total_cost=total,
        relays=len(relays),
        steps=steps,
        relay_positions=tuple(relays),
    )


def run_episode(
    policy: Policy, pp: PathParams, cost: RadialCost, rng: np.random.Generator
) -> EpisodeResult:
    """Sample one corridor and execute ``policy`` along it.

    A mixed policy draws its component set once, before the corridor, as
    the start-of-deployment randomization prescribes.
    """
    chosen = policy.draw(rng) if isinstance(policy, MixedPolicy) else policy
    events = sample_path(pp, rng)
    return walk_events(events, chosen, cost)


def monte_carlo(
    policy: Policy,
    pp: PathParams,
    cost: RadialCost,
    lam: float,
    episodes: int,
    seed: int,
) -> McEstimate:
    """Aggregate seeded episodes; same seed, same estimate, bit for bit."""
    if episodes < 1:
        raise ValueError("need at least one episode")
    children = np.random.SeedSequence(seed).spawn(episodes)
    costs = np.empty(episodes)
    relays = np.empty(episodes)
    for i in range(episodes):
        res = run_episode(policy, pp, cost, np.random.default_rng(children[i]))
        costs[i] = res.total_cost
        relays[i] = res.relays
    objective = costs + lam * relays

    def se(x: np.ndarray) -> float:
        if episodes < 2:
            return 0.0
        return float(np.std(x, ddof=1) / np.sqrt(episodes))

    return McEstimate(
        mean_cost=float(costs.mean()),
        se_cost=se(costs),
        mean_relays=float(relays.mean()),
        se_relays=se(relays),
        mean_objective=float(objective.mean()),
        se_objective=se(objective),
        episodes=episodes,
        seed=seed,
    )
