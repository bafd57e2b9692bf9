"""Post-construction improvement of LHDs by level swaps.

A swap exchanges the levels of two points in a single dimension, the smallest
move that preserves the Latin hypercube property, so every intermediate design
stays a valid LHD.  Search is first-improvement over uniformly sampled moves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .criteria import CRITERIA
from .grid import Design


@dataclass(frozen=True)
class SwapMove:
    """Exchange of the dimension-s levels of points i and j (all 0-based)."""

    dimension: int
    i: int
    j: int
    effect: float = 0.0


def _sq_dists(points: np.ndarray) -> np.ndarray:
    m = squareform(pdist(points, "sqeuclidean"))
    np.fill_diagonal(m, np.inf)
    return m


def _value_from_sq(d2: np.ndarray, criterion: str) -> float:
    if criterion == "maximin":
        return float(np.sqrt(d2.min()))
    if criterion == "audze_eglais":
        iu = np.triu_indices_from(d2, k=1)
        return float(np.sum(1.0 / d2[iu]))
    raise ValueError(criterion)


def _swapped_rows_sq(points, d2, s, i, j, vi, vj):
    """Rows i and j of the squared-distance matrix after swapping levels vi, vj
    of dimension s.  The (i, j) entry is unchanged by a swap."""
    col = points[:, s]
    row_i = d2[i] + (vj - col) ** 2 - (vi - col) ** 2
    row_j = d2[j] + (vi - col) ** 2 - (vj - col) ** 2
    row_i[i] = np.inf
    row_j[j] = np.inf
    row_i[j] = d2[i, j]
    row_j[i] = d2[j, i]
    return row_i, row_j


def local_search(
    design: Design,
    criterion: str = "maximin",
    budget: int = 10_000,
    seed: Optional[int] = None,
) -> tuple[Design, list]:
    """First-improvement search over random level swaps.

    Evaluates up to ``budget`` uniformly sampled moves, accepting any that
    strictly improves the criterion (maximin up; the others down).  The result
    is never worse than the input and is always a valid LHD.  The trace lists
    the initial value and one entry per accepted move.

    Returns
    -------
    (Design, list of dict)
        Improved design and trace entries
        ``{"evaluated": int, "move": SwapMove, "value": float}``.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; choose from {sorted(CRITERIA)}")
    if budget < 0:
        raise ValueError("budget must be >= 0")
    rng = np.random.default_rng(seed)
    n, d = design.n, design.d
    evaluate = CRITERIA[criterion]
    maximize = criterion == "maximin"
    fast = criterion in ("maximin", "audze_eglais")

    indices = design.level_indices.copy()
    if n < 2 or budget == 0:
        return _rebuilt(design, indices, criterion, seed), []

    points = design.grid.to_real(indices)
    d2 = _sq_dists(points)
    value = evaluate(design).value
    trace = [{"evaluated": 0, "move": None, "value": value}]

    for evaluated in range(1, budget + 1):
        s = int(rng.integers(d))
        i = int(rng.integers(n))
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        vi, vj = points[i, s], points[j, s]
        if vi == vj:
            continue
        if fast:
            row_i, row_j = _swapped_rows_sq(points, d2, s, i, j, vi, vj)
            if criterion == "maximin":
                others = np.delete(np.arange(n), [i, j])
                rest = d2[np.ix_(others, others)]
                cand = np.sqrt(min(rest.min(), row_i.min(), row_j.min()))
                better = cand > value
            else:
                # inf diagonal maps to 0 under 1/x; the double-counted (i, j)
                # pair is unchanged by a swap, so it cancels in the difference
                delta = np.sum(1.0 / row_i) + np.sum(1.0 / row_j) - np.sum(1.0 / d2[i]) - np.sum(1.0 / d2[j])
                better = delta < 0
            if not better:
                continue
        # verify against the canonical evaluator before committing
        indices[i, s], indices[j, s] = indices[j, s], indices[i, s]
        trial = Design(design.grid, indices.copy(), design.provenance)
        new_value = evaluate(trial).value
        improved = new_value > value if maximize else new_value < value
        if improved:
            value = new_value
            points = design.grid.to_real(indices)
            d2 = _sq_dists(points)
            trace.append(
                {
                    "evaluated": evaluated,
                    "move": SwapMove(dimension=s, i=i, j=j, effect=new_value - trace[-1]["value"]),
                    "value": value,
                }
            )
        else:
            indices[i, s], indices[j, s] = indices[j, s], indices[i, s]

    return _rebuilt(design, indices, criterion, seed), trace


def _rebuilt(design: Design, indices: np.ndarray, criterion: str, seed) -> Design:
    prov = dict(design.provenance)
    prov.update({"improved_by": "local_search", "criterion": criterion, "improve_seed": seed})
    return Design(design.grid, indices, prov)


def simulated_annealing(
    design: Design,
    criterion: str = "maximin",
    budget: int = 10_000,
    seed: Optional[int] = None,
    t0: Optional[float] = None,
    cooling: float = 0.95,
    moves_per_temperature: int = 20,
) -> tuple[Design, list]:
    """Metropolis variant of the swap search with geometric cooling.

    Minimizes the criterion (maximin is negated internally).  The returned
    design is the best ever visited, so like :func:`local_search` it is never
    worse than the input.
    """
    if criterion not in CRITERIA:
        raise ValueError(f"unknown criterion {criterion!r}; choose from {sorted(CRITERIA)}")
    rng = np.random.default_rng(seed)
    n, d = design.n, design.d
    evaluate = CRITERIA[criterion]
    sign = -1.0 if criterion == "maximin" else 1.0

    indices = design.level_indices.copy()
    if n < 2 or budget == 0:
        return _rebuilt(design, indices, criterion, seed), []

    current = sign * evaluate(design).value
    best = current
    best_indices = indices.copy()
    trace = [{"evaluated": 0, "value": sign * current}]

    # calibrate the starting temperature from the typical uphill move
    if t0 is None:
        ups = []
        probe = indices.copy()
        for _ in range(30):
            s = int(rng.integers(d))
            i, j = rng.choice(n, size=2, replace=False)
            probe[i, s], probe[j, s] = probe[j, s], probe[i, s]
            delta = sign * evaluate(Design(design.grid, probe.copy(), {})).value - current
            probe[i, s], probe[j, s] = probe[j, s], probe[i, s]
            if delta > 0:
                ups.append(delta)
        t0 = float(np.mean(ups)) / -np.log(0.5) if ups else 1.0
    temperature = max(t0, 1e-12)

    evaluated = 0
    while evaluated < budget:
        for _ in range(moves_per_temperature):
            if evaluated >= budget:
                break
            evaluated += 1
            s = int(rng.integers(d))
            i = int(rng.integers(n))
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            indices[i, s], indices[j, s] = indices[j, s], indices[i, s]
            cand = sign * evaluate(Design(design.grid, indices.copy(), {})).value
            delta = cand - current
            if delta < 0 or rng.random() < np.exp(-delta / temperature):
                current = cand
                if current < best:
                    best = current
                    best_indices = indices.copy()
                    trace.append({"evaluated": evaluated, "value": sign * best})
            else:
                indices[i, s], indices[j, s] = indices[j, s], indices[i, s]
        temperature *= cooling
    return _rebuilt(design, best_indices, criterion, seed), trace
