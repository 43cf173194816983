"""Exact renewal evaluation of a placement set.

Between consecutive relays the corridor restarts statistically, so the
long-run objective of a placement set is a single renewal cycle's expected
cost divided by the defect of its continuation probability. The cycle
quantities reduce to monotone-path counts over the finite complement:
every monotone path to a complement point stays inside the complement
(downward closure), so plain binomial coefficients apply. A boundary point
reachable from one side only loses the paths through its member neighbour,
which swaps in the one-sided binomial.

Weights are evaluated exactly for short paths and through log-factorials
once binomials overflow; rows whose survival factor underflows double
precision are skipped, which changes no representable sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import PathParams, RadialCost, delta_q, point_cost
from .placement import PlacementSet, boundary_partition, in_boundary

__all__ = [
    "EvaluationError",
    "SetEvaluation",
    "reaching_prob",
    "reaching_table",
    "hit_probs",
    "eval_cost",
    "identity_residual",
]

_EXACT_TOTAL = 30  # up to here binomials and powers are computed directly
_LOG_FLOOR = -745.2  # below exp() underflows even denormal doubles


class EvaluationError(RuntimeError):
    """Internal inconsistency while evaluating a set."""


@dataclass(frozen=True)
class SetEvaluation:
    """Renewal summary of one placement set.

    g: expected objective (hop costs plus priced relays) per deployment.
    expected_relays: mean number of relays a deployment places.
    end_mass / continue_mass: total probability of the corridor ending in
        the cycle vs. crossing the boundary; they sum to one.
    identity_residual: telescoped cycle-cost identity evaluated at g;
        zero up to rounding for every admissible set.
    """

    g: float
    expected_relays: float
    end_mass: float
    continue_mass: float
    identity_residual: float

    def to_record(self) -> dict:
        return {
            "g": self.g,
            "expected_relays": self.expected_relays,
            "end_mass": self.end_mass,
            "continue_mass": self.continue_mass,
            "identity_residual": self.identity_residual,
        }


_logfact_table = np.zeros(1)


def _logfact(upto: int) -> np.ndarray:
    """Cached [lgamma(k+1) for k <= upto]."""
    global _logfact_table
    if len(_logfact_table) <= upto:
        _logfact_table = np.array([math.lgamma(k + 1.0) for k in range(upto + 1)])
    return _logfact_table


_pascal = None


def _pascal_table() -> np.ndarray:
    global _pascal
    if _pascal is None:
        size = _EXACT_TOTAL + 2
        t = np.zeros((size, size))
        t[:, 0] = 1.0
        for a in range(1, size):
            t[a, 1 : a + 1] = t[a - 1, : a] + t[a - 1, 1 : a + 1]
        _pascal = t
    return _pascal


def _path_weights(
    a: np.ndarray,
    b: np.ndarray,
    m: np.ndarray,
    n: np.ndarray,
    pp: PathParams,
    ended: bool,
) -> np.ndarray:
    """binom(a, b) * q^m * (1-q)^n * (1-p)^k [* p], k = m+n-1 if ended else m+n.

    All inputs are integer arrays of one shape; entries killed by a
    degenerate q are returned as exact zeros.
    """
    p, q = pp.p, pp.q
    total = m + n
    k = total - 1 if ended else total
    out = np.zeros(a.shape, dtype=float)

    live = np.ones(a.shape, dtype=bool)
    if q == 0.0:
        live &= m == 0
    if q == 1.0:
        live &= n == 0
    if p == 1.0:
        live &= k == 0
    if not live.any():
        return out

    ai, bi, mi, ni, ki = (x[live] for x in (a, b, m, n, k))
    if np.any((bi < 0) | (bi > ai)):
        raise EvaluationError("invalid binomial index")
    vals = np.empty(ai.shape, dtype=float)

    # p == 1 leaves only k == 0 alive, which always has m + n <= 1
    exact = (mi + ni) <= _EXACT_TOTAL if p < 1.0 else np.ones(ai.shape, dtype=bool)
    if exact.any():
        ae, be, me, ne, ke = (x[exact] for x in (ai, bi, mi, ni, ki))
        vals[exact] = _pascal_table()[ae, be] * (1.0 - p) ** ke * q ** me * (1.0 - q) ** ne

    big = ~exact
    if big.any():
        ab, bb, mb, nb, kb = (x[big] for x in (ai, bi, mi, ni, ki))
        lf = _logfact(int(ab.max()))
        logw = lf[ab] - lf[bb] - lf[ab - bb] + kb * math.log(1.0 - p)
        if q > 0.0:
            logw = logw + np.where(mb > 0, mb * math.log(q), 0.0)
        if q < 1.0:
            logw = logw + np.where(nb > 0, nb * math.log(1.0 - q), 0.0)
        with np.errstate(under="ignore"):
            vals[big] = np.where(logw < _LOG_FLOOR, 0.0, np.exp(np.maximum(logw, _LOG_FLOOR)))

    if ended:
        vals *= p
    out[live] = vals
    return out


def _sum(values: np.ndarray) -> float:
    """Exact summation for short vectors, pairwise otherwise."""
    if values.size <= 4096:
        return math.fsum(values.tolist())
    return float(np.sum(values))


def reaching_prob(pt: tuple[int, int], pp: PathParams) -> float:
    """Probability the corridor reaches ``pt`` and continues past it."""
    m, n = pt
    if m < 0 or n < 0:
        raise ValueError(f"lattice point must be nonnegative, got {pt!r}")
    arr = lambda v: np.array([v], dtype=np.int64)
    return float(_path_weights(arr(m + n), arr(m), arr(m), arr(n), pp, ended=False)[0])


def reaching_table(s: PlacementSet, pp: PathParams) -> dict[tuple[int, int], float]:
    """Forward recomputation of reaching probabilities over the complement.

    Runs the step recursion restricted to complement points; because the
    complement is downward closed this agrees with the closed form at every
    entry, which makes it an independent cross-check. O(|complement|).
    """
    p, q = pp.p, pp.q
    table: dict[tuple[int, int], float] = {}
    for n, width in enumerate(s.m_star):
        for m in range(width):
            if m == 0 and n == 0:
                table[0, 0] = 1.0
                continue
            west = table.get((m - 1, n), 0.0) if m >= 1 else 0.0
            south = table.get((m, n - 1), 0.0) if n >= 1 else 0.0
            table[m, n] = (1.0 - p) * (q * west + (1.0 - q) * south)
    return table


def _classify(s: PlacementSet, m: int, n: int) -> str:
    if not s.contains(m, n):
        return "interior"
    if not in_boundary(s, m, n):
        raise EvaluationError(f"({m}, {n}) is an interior member, not a hit point")
    if m >= 1 and in_boundary(s, m - 1, n):
        return "west"
    if n >= 1 and in_boundary(s, m, n - 1):
        return "south"
    return "null"


_BINOM_OFFSETS = {
    # kind -> (a skew, b skew) applied to (m+n, m)
    "interior": (0, 0),
    "null": (0, 0),
    "west": (-1, 0),
    "south": (-1, -1),
}


def _hit_weight_arrays(
    kind: str, ms: np.ndarray, ns: np.ndarray, pp: PathParams, ended: bool
) -> np.ndarray:
    da, db = _BINOM_OFFSETS[kind]
    total = ms + ns
    return _path_weights(total + da, ms + db, ms, ns, pp, ended=ended)


def hit_probs(s: PlacementSet, pt: tuple[int, int], pp: PathParams) -> tuple[float, float]:
    """(end, continue) probabilities of the renewal cycle at ``pt``.

    ``pt`` must lie in the complement or on the boundary; interior member
    points are rejected. Continuation is a renewal event only on the
    boundary, so interior points report a zero continue probability.
    """
    m, n = pt
    if m == 0 and n == 0:
        raise EvaluationError("the corridor never ends at the renewal origin")
    kind = _classify(s, m, n)
    ms, ns = np.array([m], np.int64), np.array([n], np.int64)
    p_end = float(_hit_weight_arrays(kind, ms, ns, pp, ended=True)[0])
    p_cont = 0.0 if kind == "interior" else float(_hit_weight_arrays(kind, ms, ns, pp, ended=False)[0])
    return p_end, p_cont


def _clip_reachable(ms: np.ndarray, ns: np.ndarray, pp: PathParams) -> tuple[np.ndarray, np.ndarray]:
    """Drop points whose survival factor underflows to exactly zero."""
    if pp.p == 1.0:
        keep = ms + ns <= 1
        return ms[keep], ns[keep]
    s_cut = int(_LOG_FLOOR / math.log(1.0 - pp.p)) + 2
    keep = ms + ns <= s_cut
    if bool(keep.all()):
        return ms, ns
    return ms[keep], ns[keep]


def eval_cost(s: PlacementSet, pp: PathParams, cost: RadialCost, lam: float) -> SetEvaluation:
    """Exact renewal evaluation of ``s`` at relay price ``lam``."""
    if lam < 0:
        raise ValueError("relay price must be nonnegative")
    part = boundary_partition(s)

    mc, nc = s.complement_arrays()
    mc, nc = _clip_reachable(mc, nc, pp)
    inner = (mc != 0) | (nc != 0)  # the corridor never ends at the origin
    mi, ni = mc[inner], nc[inner]

    end_terms = [_hit_weight_arrays("interior", mi, ni, pp, ended=True)]
    end_dists = [point_cost(mi, ni, cost)]
    cont_terms: list[np.ndarray] = []
    cont_dists: list[np.ndarray] = []
    for kind, pts in (("west", part.west), ("south", part.south), ("null", part.null_pts)):
        if not pts:
            continue
        mb = np.array([p[0] for p in pts], np.int64)
        nb = np.array([p[1] for p in pts], np.int64)
        mb, nb = _clip_reachable(mb, nb, pp)
        if mb.size == 0:
            continue
        end_terms.append(_hit_weight_arrays(kind, mb, nb, pp, ended=True))
        cont_terms.append(_hit_weight_arrays(kind, mb, nb, pp, ended=False))
        dvals = point_cost(mb, nb, cost)
        end_dists.append(dvals)
        cont_dists.append(dvals)

    end_w = np.concatenate(end_terms)
    end_d = np.concatenate(end_dists)
    cont_w = np.concatenate(cont_terms) if cont_terms else np.zeros(0)
    cont_d = np.concatenate(cont_dists) if cont_dists else np.zeros(0)

    continue_mass = _sum(cont_w)
    end_mass = _sum(end_w)
    if not continue_mass < 1.0:
        raise EvaluationError(f"continuation mass {continue_mass!r} >= 1")

    numerator = _sum(end_w * end_d) + _sum(cont_w * (lam + cont_d))
    g = numerator / (1.0 - continue_mass)
    expected = continue_mass / (1.0 - continue_mass)
    residual = identity_residual(s, g, pp, cost, lam)
    return SetEvaluation(
        g=g,
        expected_relays=expected,
        end_mass=end_mass,
        continue_mass=continue_mass,
        identity_residual=residual,
    )


def identity_residual(
    s: PlacementSet, g: float, pp: PathParams, cost: RadialCost, lam: float
) -> float:
    """Telescoped cycle-cost identity over the complement, evaluated at g.

    sum over the complement of r(m,n) * (delta_q(m,n) - p*(lam+g)), plus
    d(0,0) + lam; identically zero when g is the set's renewal cost.
    """
    mc, nc = s.complement_arrays()
    mc, nc = _clip_reachable(mc, nc, pp)
    r = _path_weights(mc + nc, mc, mc, nc, pp, ended=False)
    dq = delta_q(mc, nc, pp.q, cost)
    acc = _sum(r * (dq - pp.p * (lam + g)))
    return acc + float(point_cost(0, 0, cost)) + lam
