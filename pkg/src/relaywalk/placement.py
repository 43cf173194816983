"""Upward-closed placement sets and their boundaries.

A placement set P collects the lattice displacements (m, n), measured from
the last placed relay, at which a relay goes down. Every set handled here
is upward closed with a finite, downward-closed complement, so it is stored
as its row boundary: ``m_star[n]`` is the least m belonging to P in row n,
with rows past the stored range fully contained. The origin is excluded
from every set (placing at zero displacement would loop forever), so
``m_star[0] >= 1`` and the final stored row is always 0.

Degenerate corridors need no special casing downstream: a purely Eastward
corridor (q == 1) yields ``(M, 0)`` and a purely Northward one (q == 0)
yields ``(1, ..., 1, 0)``; the rows those encodings add beyond the reachable
axis carry zero probability.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import ModelError, RadialCost, delta_q

__all__ = [
    "DivergenceError",
    "BoundaryStructureError",
    "PlacementSet",
    "BoundaryPartition",
    "build_set",
    "bounding_box",
    "boundary_partition",
]

# scan guard for thresholds the increments can never reach (eta == 1)
_SCAN_CAP = 2_000_000


class DivergenceError(RuntimeError):
    """The cost increments never reach the requested threshold."""


class BoundaryStructureError(RuntimeError):
    """A computed membership region is not threshold-shaped."""


@dataclass(frozen=True)
class PlacementSet:
    """Finite boundary encoding of an upward-closed placement set.

    threshold: the scalar that generated the set (increment threshold for
        lookahead sets, radius for distance sets) -- descriptive only.
    q: East-step probability the set was built for (serialization echo).
    m_star: least member m per row n; non-increasing, ends with 0.
    origin_guard: whether the raw rule admitted (0, 0) and the origin had
        to be excluded explicitly.
    rule: "delta-q" for increment-threshold sets, "distance" for circular
        heuristic sets, "custom" otherwise.
    """

    threshold: float
    q: float
    m_star: tuple[int, ...]
    origin_guard: bool = False
    rule: str = "delta-q"

    def __post_init__(self) -> None:
        ms = self.m_star
        if len(ms) < 2 or ms[-1] != 0 or ms[0] < 1:
            raise BoundaryStructureError(f"malformed boundary {ms!r}")
        if any(a < b for a, b in zip(ms, ms[1:])):
            raise BoundaryStructureError("boundary must be non-increasing")
        if any(m < 0 for m in ms):
            raise BoundaryStructureError("negative boundary entry")

    @property
    def n_max(self) -> int:
        """Index of the first all-member row."""
        return len(self.m_star) - 1

    def m_star_at(self, n: int) -> int:
        return self.m_star[n] if n < len(self.m_star) else 0

    def contains(self, m: int, n: int) -> bool:
        """Membership test; the origin is never a member."""
        if m == 0 and n == 0:
            return False
        return m >= self.m_star_at(n)

    def complement_size(self) -> int:
        return int(sum(self.m_star))

    def complement_rows(self) -> Iterator[tuple[int, int]]:
        """Yield (n, row_width) for rows with complement points."""
        for n, width in enumerate(self.m_star):
            if width > 0:
                yield n, width

    def complement_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """All complement points (including the origin) as (m, n) arrays."""
        widths = np.asarray(self.m_star, dtype=np.int64)
        ns = np.repeat(np.arange(len(widths), dtype=np.int64), widths)
        ms = np.concatenate([np.arange(w, dtype=np.int64) for w in widths if w > 0]) if widths.any() else np.zeros(0, np.int64)
        return ms, ns

    def same_set(self, other: "PlacementSet") -> bool:
        return self.m_star == other.m_star

    def to_record(self) -> dict:
        return {
            "threshold": self.threshold,
            "rows": [[n, m] for n, m in enumerate(self.m_star)],
            "q": self.q,
            "rule": self.rule,
            "origin_guard": self.origin_guard,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "PlacementSet":
        rows = sorted((int(n), int(m)) for n, m in rec["rows"])
        if [n for n, _ in rows] != list(range(len(rows))):
            raise BoundaryStructureError("rows must cover n = 0..n_max")
        return cls(
            threshold=float(rec.get("threshold", float("nan"))),
            q=float(rec.get("q", 0.5)),
            m_star=tuple(m for _, m in rows),
            origin_guard=bool(rec.get("origin_guard", False)),
            rule=str(rec.get("rule", "custom")),
        )


@dataclass(frozen=True)
class BoundaryPartition:
    """Boundary points split by which neighbour is also on the boundary.

    west: points whose West neighbour is on the boundary (reachable only
        from the South); south: the symmetric case; null_pts: neither.
    """

    west: tuple[tuple[int, int], ...]
    south: tuple[tuple[int, int], ...]
    null_pts: tuple[tuple[int, int], ...]

    @property
    def all_points(self) -> tuple[tuple[int, int], ...]:
        return self.null_pts + self.west + self.south

    def __len__(self) -> int:
        return len(self.west) + len(self.south) + len(self.null_pts)


def _axis_first_reach(t: float, q: float, cost: RadialCost, axis: str) -> int:
    """Least k with delta_q(k, 0) (axis='m') or delta_q(0, k) (axis='n') >= t."""
    k = 0
    probe = (lambda k: delta_q(k, 0, q, cost)) if axis == "m" else (lambda k: delta_q(0, k, q, cost))
    last = probe(0)
    if last >= t:
        return 0
    while True:
        k += 1
        val = probe(k)
        if val >= t:
            return k
        if k % 4096 == 0:
            if val <= last:  # increments stalled; threshold unreachable
                raise DivergenceError(
                    f"increment along {axis}-axis stalls at {val:.3e} < threshold {t:.3e}"
                )
            last = val
        if k > _SCAN_CAP:
            raise DivergenceError(f"no {axis}-axis crossing below {_SCAN_CAP}")


def bounding_box(t: float, q: float, cost: RadialCost) -> tuple[int, int]:
    """Smallest axis crossings (M, N) of the increment threshold ``t``.

    The complement of the threshold set lies inside [0, M] x [0, N]. For a
    degenerate corridor the orthogonal extent is 0 by convention (those rows
    are unreachable and the axis increment may never cross ``t`` there).
    """
    if t < 0:
        raise ModelError("threshold must be nonnegative")
    if q == 1.0:
        return _axis_first_reach(t, q, cost, "m"), 0
    if q == 0.0:
        return 0, _axis_first_reach(t, q, cost, "n")
    return _axis_first_reach(t, q, cost, "m"), _axis_first_reach(t, q, cost, "n")


def build_set(t: float, q: float, cost: RadialCost) -> PlacementSet:
    """Threshold set {(m, n) != (0,0): delta_q(m, n) >= t} as a PlacementSet.

    Ties are members (placing wins on equality). t == 0 is admitted and
    yields the everything-but-origin set.
    """
    if t < 0:
        raise ModelError("threshold must be nonnegative")
    if not 0.0 <= q <= 1.0:
        raise ModelError(f"q must be in [0, 1], got {q!r}")

    if q == 1.0:
        m0 = _axis_first_reach(t, q, cost, "m")
        return PlacementSet(t, q, (max(m0, 1), 0), origin_guard=m0 == 0)
    if q == 0.0:
        n0 = _axis_first_reach(t, q, cost, "n")
        return PlacementSet(t, q, (1,) * max(n0, 1) + (0,), origin_guard=n0 == 0)

    m0 = _axis_first_reach(t, q, cost, "m")
    guard = m0 == 0
    rows = [max(m0, 1)]
    # descend: delta_q is non-decreasing in n, so each row starts no later
    # than the previous one
    prev = m0
    n = 0
    while prev > 0:
        n += 1
        m = prev
        if delta_q(m, n, q, cost) >= t:
            while m > 0 and delta_q(m - 1, n, q, cost) >= t:
                m -= 1
        else:
            # only possible when the increments are not monotone in n
            raise BoundaryStructureError(
                f"membership is not threshold-shaped at row {n} (threshold {t:.6g})"
            )
        rows.append(m)
        prev = m
    if len(rows) == 1:  # guarded everything-set: rows past 0 are full
        rows.append(0)
    return PlacementSet(t, q, tuple(rows), origin_guard=guard)


def boundary_partition(s: PlacementSet) -> BoundaryPartition:
    """Boundary of ``s`` partitioned by which neighbour is also boundary.

    A member point is on the boundary when its in-lattice West or South
    neighbour lies outside the set; off-lattice neighbours never qualify.
    """
    b: set[tuple[int, int]] = set()
    for n in range(s.n_max + 1):
        msn = s.m_star_at(n)
        if msn >= 1:
            b.add((msn, n))  # West neighbour (msn-1, n) is outside
        if n >= 1:
            for m in range(msn, s.m_star_at(n - 1)):
                b.add((m, n))  # South neighbour (m, n-1) is outside
    west, south, nulls = [], [], []
    for pt in sorted(b, key=lambda p: (p[1], p[0])):
        m, n = pt
        if (m - 1, n) in b:
            west.append(pt)
        elif (m, n - 1) in b:
            south.append(pt)
        else:
            nulls.append(pt)
    return BoundaryPartition(tuple(west), tuple(south), tuple(nulls))


def in_boundary(s: PlacementSet, m: int, n: int) -> bool:
    """Whether a member point has an in-lattice neighbour outside the set."""
    if not s.contains(m, n):
        return False
    west_out = m >= 1 and not s.contains(m - 1, n)
    south_out = n >= 1 and not s.contains(m, n - 1)
    return west_out or south_out
