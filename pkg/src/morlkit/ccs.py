"""Convex coverage set machinery.

Dominance tests, corner weights of the piecewise-linear upper surface,
optimistic value bounds, and the approximate optimistic linear support
loop (`aols`) that grows an epsilon-complete coverage set by querying a
value oracle at the most promising simplex weights.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .core import (
    SIMPLEX_ATOL,
    ValueVector,
    WeightVector,
    scalarize,
    simplex_extrema,
)
from .lp import LpUnbounded, solve_lp

log = logging.getLogger(__name__)

DUPLICATE_VALUE_ATOL = 1e-6
WEIGHT_MATCH_ATOL = 1e-9

Oracle = Callable[[WeightVector], ValueVector]


@dataclass(frozen=True)
class PartialCcs:
    """Working set of candidate-undominated value vectors plus the
    (weight, scalar value) observations recorded when they were found."""

    vectors: tuple[ValueVector, ...]
    observations: tuple[tuple[WeightVector, float], ...]

    def __post_init__(self) -> None:
        vecs = tuple(self.vectors)
        for a in range(len(vecs)):
            for b in range(a + 1, len(vecs)):
                if _max_norm(vecs[a], vecs[b]) <= WEIGHT_MATCH_ATOL:
                    raise ValueError(f"vectors {a} and {b} coincide")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "observations", tuple(self.observations))

    @classmethod
    def empty(cls) -> "PartialCcs":
        return cls((), ())


@dataclass(frozen=True)
class AolsIteration:
    """One pop of the weight queue: what was queried and how much
    improvement the queue still promises afterwards."""

    index: int
    weight: WeightVector
    inserted: bool
    remaining_gap: float
    remaining_delta_r: float


@dataclass(frozen=True)
class AolsResult:
    ccs: PartialCcs
    explored_weights: tuple[WeightVector, ...]
    delta_max: float
    history: tuple[AolsIteration, ...]
    hit_iteration_cap: bool


class MarginalWeightQueue:
    """Max-priority queue of candidate weights; infinite priority first,
    FIFO among equal priorities."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, WeightVector, float]] = []
        self._counter = 0

    def __len__(self) -> int:
        return len(self._heap)

    def push(self, weight: WeightVector, priority: float, bound: float) -> None:
        heapq.heappush(self._heap, (-priority, self._counter, weight, bound))
        self._counter += 1

    def pop(self) -> tuple[WeightVector, float, float]:
        neg, _, weight, bound = heapq.heappop(self._heap)
        return weight, -neg, bound

    def peek_priority(self) -> tuple[float, float]:
        """(priority, bound) of the top entry."""
        neg, _, _, bound = self._heap[0]
        return -neg, bound

    def entries(self) -> list[tuple[float, float]]:
        """(priority, bound) for every queued weight, unordered."""
        return [(-neg, bound) for neg, _, _, bound in self._heap]

    def weights(self) -> list[WeightVector]:
        return [entry[2] for entry in self._heap]


def _max_norm(a: ValueVector, b: ValueVector) -> float:
    return float(np.max(np.abs(a.array - b.array)))


def _weight_close(a: WeightVector, b: WeightVector, atol: float) -> bool:
    return float(np.max(np.abs(a.array - b.array))) <= atol


def _near_any(w: WeightVector, pool: Sequence[WeightVector], atol: float) -> bool:
    return any(_weight_close(w, other, atol) for other in pool)


def scalarized_max(
    s: Sequence[ValueVector], w: WeightVector
) -> tuple[float, ValueVector]:
    """Best scalarized value over the set and one maximizer (lowest index wins ties)."""
    if not s:
        raise ValueError("scalarized_max needs a nonempty set")
    dots = [scalarize(w, v) for v in s]
    idx = int(np.argmax(dots))
    return dots[idx], s[idx]


def is_convex_undominated(
    v: ValueVector, s: Sequence[ValueVector], margin: float = 0.0
) -> bool:
    """True when some simplex weight makes v at least margin better than
    every member of s.

    Decided by maximizing the worst slack min_w' w.(v - v') over the simplex;
    exact ties (v on the convex upper boundary of s without strictly winning
    anywhere) count as dominated.
    """
    if not s:
        return True
    dim = v.dim
    for other in s:
        if other.dim != dim:
            raise ValueError("dimension mismatch in dominance test")
    # Variables: w_1..w_I, t_pos, t_neg with t = t_pos - t_neg.
    n = dim + 2
    c = np.zeros(n)
    c[dim] = 1.0
    c[dim + 1] = -1.0
    a_ub = []
    b_ub = []
    for other in s:
        row = np.zeros(n)
        row[:dim] = other.array - v.array
        row[dim] = 1.0
        row[dim + 1] = -1.0
        a_ub.append(row)
        b_ub.append(0.0)
    a_eq = np.zeros((1, n))
    a_eq[0, :dim] = 1.0
    _, best_slack = solve_lp(c, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=[1.0])
    return best_slack > margin + WEIGHT_MATCH_ATOL


def _clean_simplex_point(raw: np.ndarray) -> WeightVector | None:
    if not np.all(np.isfinite(raw)):
        return None
    if np.min(raw) < -WEIGHT_MATCH_ATOL or abs(raw.sum() - 1.0) > 1e-7:
        return None
    clipped = np.clip(raw, 0.0, None)
    return WeightVector(tuple(clipped / clipped.sum()))


def corner_weights(s: Sequence[ValueVector]) -> list[WeightVector]:
    """Vertices of the upper surface max_V w.V over the simplex.

    Candidate vertices come from solving the square systems formed by
    dim-1 constraints chosen among pairwise-equality hyperplanes
    {w.(V_a - V_b) = 0} and boundary planes {w_k = 0}, together with the
    simplex normalization; candidates where the equalized vectors are not
    envelope-maximal are discarded. Simplex extrema are always included.
    Combinatorial in len(s) and dim, intended for small coverage sets.
    """
    if not s:
        raise ValueError("corner_weights needs a nonempty set")
    dim = s[0].dim
    vals = np.array([v.values for v in s])
    corners: list[WeightVector] = list(simplex_extrema(dim))

    if dim == 1:
        return corners

    # Constraint rows: ("pair", a, b) -> (V_a - V_b).w = 0 ; ("bound", k) -> w_k = 0.
    pair_rows = [
        (vals[a] - vals[b], a, b) for a, b in combinations(range(len(s)), 2)
    ]
    bound_rows = [(np.eye(dim)[k], -1, k) for k in range(dim)]
    all_rows = [("pair", row, a, b) for row, a, b in pair_rows] + [
        ("bound", row, -1, k) for row, _, k in bound_rows
    ]

    for combo in combinations(range(len(all_rows)), dim - 1):
        system = np.ones((dim, dim))
        rhs = np.zeros(dim)
        rhs[0] = 1.0
        for j, idx in enumerate(combo):
            system[j + 1] = all_rows[idx][1]
        try:
            raw = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.max(np.abs(system @ raw - rhs)) > 1e-7:
            continue
        w = _clean_simplex_point(raw)
        if w is None:
            continue
        dots = vals @ w.array
        top = float(dots.max())
        active = True
        for idx in combo:
            kind, _, a, b = all_rows[idx]
            if kind == "pair" and (
                dots[a] < top - WEIGHT_MATCH_ATOL or dots[b] < top - WEIGHT_MATCH_ATOL
            ):
                active = False
                break
        if not active:
            continue
        if not _near_any(w, corners, WEIGHT_MATCH_ATOL):
            corners.append(w)

    corners.sort(key=lambda wv: wv.weights)
    return corners


def optimistic_bound(
    wv: Sequence[tuple[WeightVector, float]], w: WeightVector, epsilon: float
) -> float:
    """Largest scalarized value at w consistent with every recorded
    observation being epsilon-accurate.

    Solves max w.u subject to w'.u <= v' + epsilon for all (w', v').
    The observation list must cover all simplex extrema or the program
    is unbounded (raised as ValueError).
    """
    if not wv:
        raise ValueError("optimistic_bound needs at least one observation")
    dim = w.dim
    # u is free: u = p - q with p, q >= 0.
    c = np.concatenate([w.array, -w.array])
    a_ub = []
    b_ub = []
    for w_obs, v_obs in wv:
        if w_obs.dim != dim:
            raise ValueError("observation dimension mismatch")
        a_ub.append(np.concatenate([w_obs.array, -w_obs.array]))
        b_ub.append(float(v_obs) + epsilon)
    try:
        _, value = solve_lp(c, a_ub=a_ub, b_ub=b_ub)
    except LpUnbounded as exc:
        raise ValueError(
            "optimistic bound is unbounded; observations must cover all simplex extrema"
        ) from exc
    return value


def relative_improvement(v_bound: float, v_star: float) -> float:
    """Relative gap (v_bound - v_star) / v_bound between an optimistic
    bound and the current surface value."""
    if v_bound == 0.0:
        raise ZeroDivisionError("relative improvement undefined for zero bound")
    return (v_bound - v_star) / v_bound


def _remaining_delta(queue: MarginalWeightQueue) -> tuple[float, float]:
    """Largest absolute and largest relative gap still promised by the queue.

    The queue itself is ordered by the absolute gap (the selection rule);
    the relative form used for convergence reporting maximizes over all
    queued entries since the two orders can differ.
    """
    if len(queue) == 0:
        return 0.0, 0.0
    best_abs = 0.0
    best_rel = 0.0
    for priority, bound in queue.entries():
        if math.isinf(priority):
            return math.inf, math.inf
        best_abs = max(best_abs, priority)
        try:
            rel = relative_improvement(bound, bound - priority)
        except ZeroDivisionError:
            log.warning("zero optimistic bound; logging absolute gap instead")
            rel = priority
        best_rel = max(best_rel, rel)
    return best_abs, best_rel


def aols(
    oracle: Oracle,
    objective_count: int,
    epsilon: float,
    max_iterations: int = 10_000,
) -> AolsResult:
    """Approximate optimistic linear support.

    Seeds a priority queue with all simplex extrema at infinite priority,
    then repeatedly pops the weight with the largest optimistic improvement
    bound, queries the oracle there, and, whenever a new value vector is
    found, recomputes corner weights and pushes the unexplored ones whose
    optimistic gap exceeds epsilon. Stops when the queue empties or the
    iteration cap is hit.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if objective_count < 1:
        raise ValueError("objective_count must be >= 1")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")

    queue = MarginalWeightQueue()
    for e in simplex_extrema(objective_count):
        queue.push(e, math.inf, math.inf)

    s: list[ValueVector] = []
    wv: list[tuple[WeightVector, float]] = []
    explored: list[WeightVector] = []
    history: list[AolsIteration] = []
    cache: dict[tuple[float, ...], ValueVector] = {}
    pending_extrema = objective_count
    iterations = 0
    cap_hit = False

    def query(weight: WeightVector) -> ValueVector:
        key = weight.weights
        if key not in cache:
            value = oracle(weight)
            if value.dim != objective_count:
                raise ValueError(
                    f"oracle returned dimension {value.dim}, expected {objective_count}"
                )
            cache[key] = value
        return cache[key]

    while len(queue) > 0:
        if iterations >= max_iterations:
            cap_hit = True
            break
        weight, priority, _ = queue.pop()
        iterations += 1
        value = query(weight)
        wv.append((weight, scalarize(weight, value)))
        explored.append(weight)
        seeding = pending_extrema > 0
        if math.isinf(priority):
            pending_extrema -= 1
        seeded_now = seeding and pending_extrema == 0

        inserted = False
        if all(_max_norm(value, member) > DUPLICATE_VALUE_ATOL for member in s):
            s.append(value)
            inserted = True

        if s and pending_extrema == 0 and (inserted or seeded_now):
            queued = queue.weights()
            for corner in corner_weights(s):
                if _near_any(corner, explored, WEIGHT_MATCH_ATOL):
                    continue
                if _near_any(corner, queued, WEIGHT_MATCH_ATOL):
                    continue
                surface, _ = scalarized_max(s, corner)
                bound = optimistic_bound(wv, corner, epsilon)
                gap = bound - surface
                if gap > epsilon:
                    queue.push(corner, gap, bound)
                    queued.append(corner)

        gap_left, rel_left = _remaining_delta(queue)
        history.append(
            AolsIteration(
                index=iterations,
                weight=weight,
                inserted=inserted,
                remaining_gap=gap_left,
                remaining_delta_r=rel_left,
            )
        )

    delta_max = 0.0
    if len(queue) > 0:
        delta_max, _ = queue.peek_priority()

    return AolsResult(
        ccs=PartialCcs(tuple(s), tuple(wv)),
        explored_weights=tuple(explored),
        delta_max=delta_max,
        history=tuple(history),
        hit_iteration_cap=cap_hit,
    )


def write_history_csv(result: AolsResult, path) -> None:
    """Dump the per-iteration log as iteration, weight components, delta_r."""
    lines = []
    if result.history:
        dim = result.history[0].weight.dim
        header = ["iteration"] + [f"w{k}" for k in range(dim)] + ["delta_r"]
        lines.append(",".join(header))
        for item in result.history:
            row = [str(item.index)]
            row += [repr(w) for w in item.weight.weights]
            row.append(repr(item.remaining_delta_r))
            lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
