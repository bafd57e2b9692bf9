"""Greedy construction of Latin hypercube designs with a prescribed minimum
inter-point Euclidean distance r.

The design grows one point at a time.  Each step draws a trial point z on
unused levels (one coordinate pulled toward the center), builds candidates by
projecting z onto the radius-r spheres around the existing points and snapping
to unused levels, and inserts the best candidate lying strictly outside all
spheres.  Persistent failure triggers a restart from scratch while budget
remains, then a multiplicative shrink of r that keeps the partial design, so
construction always ends in a valid LHD whose minimum inter-point distance
exceeds the final (possibly reduced) radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from time import perf_counter
from typing import Optional

import numpy as np

from .criteria import nn_summary
from .errors import ConstructionFailedError, ExhaustedLevelsError, InfeasibleSeedError
from .grid import Design, GridSpec, PartialDesign, random_lhd

R_FLOOR_FRACTION = 0.01  # construction fails once r drops below this share of the request


@dataclass
class LevelUsage:
    """Boolean d x n matrix marking which grid levels each dimension has used."""

    grid: GridSpec
    b: np.ndarray

    @classmethod
    def empty(cls, grid: GridSpec) -> "LevelUsage":
        return cls(grid, np.zeros((grid.d, grid.n), dtype=bool))

    @classmethod
    def from_partial(cls, partial: PartialDesign) -> "LevelUsage":
        usage = cls.empty(partial.grid)
        for point in partial.level_indices:
            usage.mark(point)
        return usage

    def mark(self, point: np.ndarray):
        """Record one inserted point (a vector of d level indices)."""
        self.b[np.arange(self.grid.d), point] = True

    def unused(self, dim: int) -> np.ndarray:
        """Sorted unused level indices of one dimension (0-based)."""
        return np.flatnonzero(~self.b[dim])

    @property
    def column_sums(self) -> np.ndarray:
        """Per-level usage counts across dimensions."""
        return self.b.sum(axis=0)

    @property
    def m_star(self) -> int:
        return int(self.column_sums.min())

    def matches(self, partial: PartialDesign) -> bool:
        """Consistency check: does b equal the usage rebuilt from scratch?"""
        return bool(np.array_equal(self.b, LevelUsage.from_partial(partial).b))


@dataclass(frozen=True)
class SlhdConfig:
    """Tuning knobs of the greedy construction.

    r is the target minimum inter-point distance.  When a point cannot be
    placed within ``max_attempts_per_point`` trial draws, the builder first
    restarts from scratch (up to ``restarts`` times, radius restored) and then
    falls back to shrinking r by the relative factor ``r_decrement`` while
    keeping the partial design.  ``center_band`` is the half-width around 0.5
    from which the centered coordinate of each trial point is drawn.  With
    ``allow_decrement=False`` exhaustion raises instead of shrinking.
    """

    r: float
    seed: Optional[int] = None
    max_attempts_per_point: int = 30
    r_decrement: float = 0.05
    center_band: float = 0.15
    restarts: int = 0
    allow_decrement: bool = True

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError(f"r must be positive, got {self.r}")
        if not 0 < self.r_decrement < 1:
            raise ValueError(f"r_decrement must be in (0, 1), got {self.r_decrement}")
        if not 0 < self.center_band <= 0.5:
            raise ValueError(f"center_band must be in (0, 0.5], got {self.center_band}")
        if self.max_attempts_per_point < 1:
            raise ValueError("max_attempts_per_point must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


@dataclass(frozen=True)
class SlhdResult:
    design: Design
    r_requested: float
    r_effective: float
    attempts: int
    decrements: int
    restarts_used: int
    trace: Optional[tuple] = None


def seed_point(grid: GridSpec, rng: np.random.Generator) -> np.ndarray:
    """First point: distinct level indices drawn from the central half of the grid.

    The band [ceil((n-1)/4), floor(3(n-1)/4)] widens to the full grid when it
    holds fewer than d levels.  Raises :class:`InfeasibleSeedError` when the
    grid has fewer levels than dimensions.
    """
    n, d = grid.n, grid.d
    if d > n:
        raise InfeasibleSeedError(f"cannot pick {d} distinct levels from a {n}-level grid")
    lo = int(np.ceil((n - 1) / 4))
    hi = int(np.floor(3 * (n - 1) / 4))
    band = np.arange(lo, hi + 1)
    if band.size < d:
        band = np.arange(n)
    return rng.choice(band, size=d, replace=False).astype(np.int64)


def draw_z(
    grid: GridSpec,
    usage: LevelUsage,
    rng: np.random.Generator,
    center_band: float = 0.15,
) -> np.ndarray:
    """Trial point with every coordinate on an unused level.

    One uniformly chosen dimension takes an unused level within
    ``center_band`` of 0.5 (falling back to the unused level closest to 0.5);
    the rest draw uniformly from their unused levels.
    """
    d = grid.d
    z = np.empty(d, dtype=np.int64)
    special = int(rng.integers(d))
    for i in range(d):
        unused = usage.unused(i)
        if unused.size == 0:
            raise ExhaustedLevelsError(f"dimension {i + 1} has no unused level")
        if i == special:
            lev = grid.to_real(unused)
            near = unused[np.abs(lev - 0.5) <= center_band]
            if near.size:
                z[i] = near[rng.integers(near.size)]
            else:
                z[i] = unused[np.argmin(np.abs(lev - 0.5))]
        else:
            z[i] = unused[rng.integers(unused.size)]
    return z


def _snap_to_unused(values: np.ndarray, unused: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Per-coordinate nearest unused level for a vector of reals; ties toward 0.5."""
    ulev = grid.to_real(unused)
    pos = np.searchsorted(ulev, values)
    lo = np.clip(pos - 1, 0, unused.size - 1)
    hi = np.clip(pos, 0, unused.size - 1)
    dlo = np.abs(ulev[lo] - values)
    dhi = np.abs(ulev[hi] - values)
    pick_hi = (dhi < dlo) | ((dhi == dlo) & (np.abs(ulev[hi] - 0.5) < np.abs(ulev[lo] - 0.5)))
    return np.where(pick_hi, unused[hi], unused[lo])


def candidate_set(
    z: np.ndarray,
    partial: PartialDesign,
    usage: LevelUsage,
    r: float,
    rng: Optional[np.random.Generator] = None,
    trace: Optional[list] = None,
) -> np.ndarray:
    """Candidate insertion points derived from z and the existing spheres.

    For every existing point x_j the two sphere points x_j +- r*u (u the unit
    vector from x_j toward z, i.e. the points of the radius-r sphere nearest
    to and farthest from z) are snapped coordinate-wise to the nearest unused
    levels; z itself always joins the set.  Rows are deduplicated and sorted
    lexicographically.  A z coinciding with an existing point gets a random
    direction instead (recorded in the trace when one is supplied).
    """
    grid = partial.grid
    X = partial.points
    zr = grid.to_real(z)
    diff = zr - X
    norms = np.sqrt(np.sum(diff * diff, axis=1))
    degenerate = norms == 0.0
    if degenerate.any():
        if rng is None:
            rng = np.random.default_rng(0)
        for j in np.flatnonzero(degenerate):
            v = rng.standard_normal(grid.d)
            diff[j] = v / np.linalg.norm(v)
            norms[j] = 1.0
        if trace is not None:
            trace.append({"event": "degenerate_direction", "count": int(degenerate.sum())})
    unit = diff / norms[:, None]
    spheres = np.vstack([X + r * unit, X - r * unit])
    snapped = np.empty(spheres.shape, dtype=np.int64)
    for i in range(grid.d):
        snapped[:, i] = _snap_to_unused(spheres[:, i], usage.unused(i), grid)
    return np.unique(np.vstack([snapped, z[None, :]]), axis=0)


def select_candidate(
    candidates: np.ndarray,
    partial: PartialDesign,
    usage: LevelUsage,
    r: float,
) -> Optional[np.ndarray]:
    """Best candidate strictly farther than r from every existing point.

    Returns None when no candidate qualifies.  Among qualifiers the choice
    minimizes, after tentatively adding the candidate, the number of levels
    at minimal usage; remaining ties prefer candidates nearer the center of
    the cube, then larger minimum distance to the existing points, then
    lexicographically smallest level indices.  The centrality key keeps the
    growth center-out so the forced cells of the end-game land near the
    boundary, where they have room; completion rates collapse without it.
    """
    grid = partial.grid
    X = partial.points
    creal = grid.to_real(candidates)
    d2 = np.sum((creal[:, None, :] - X[None, :, :]) ** 2, axis=2)
    feasible = np.all(d2 > r * r, axis=1)
    if not feasible.any():
        return None
    cand = candidates[feasible]
    d2 = d2[feasible]
    m = cand.shape[0]
    sums = np.tile(usage.column_sums, (m, 1))
    rows = np.arange(m)
    for i in range(grid.d):
        sums[rows, cand[:, i]] += 1
    m_star = sums.min(axis=1)
    tie_usage = (sums == m_star[:, None]).sum(axis=1)
    tie_center = np.sum((grid.to_real(cand) - 0.5) ** 2, axis=1)
    tie_dist = -d2.min(axis=1)
    lex = tuple(cand[:, i] for i in range(grid.d - 1, -1, -1))
    order = np.lexsort(lex + (tie_dist, tie_center, tie_usage))
    return cand[order[0]]


def slhd_construct(grid: GridSpec, config: SlhdConfig, collect_trace: bool = False) -> SlhdResult:
    """Grow a complete LHD whose points are pairwise farther apart than r.

    The returned design stores its rows in insertion order and always
    satisfies the Latin hypercube property; its minimum inter-point distance
    strictly exceeds ``r_effective``, the requested radius after any shrinks.
    Identical (grid, config) pairs give identical results.

    Raises
    ------
    ConstructionFailedError
        When r would fall below 1% of the request (or, with
        ``allow_decrement=False``, when attempts and restarts are exhausted).
        The error carries the partial design and the trace.
    """
    n, d = grid.n, grid.d
    if n < 2:
        raise ValueError("construction needs a grid with n >= 2")
    if d > n:
        raise InfeasibleSeedError(f"need n >= d, got n={n}, d={d}")
    rng = np.random.default_rng(config.seed)
    trace: Optional[list] = [] if collect_trace else None
    floor = R_FLOOR_FRACTION * config.r

    attempts_total = 0
    restarts_used = 0
    decrements = 0
    indices = np.empty((n, d), dtype=np.int64)
    k = 0
    r_eff = config.r
    usage = LevelUsage.empty(grid)

    while True:
        if k == 0:
            indices[0] = seed_point(grid, rng)
            usage = LevelUsage.empty(grid)
            usage.mark(indices[0])
            k = 1
            if trace is not None:
                trace.append({"event": "insert", "k": 1, "point": indices[0].tolist(), "attempts": 0})
        if k == n:
            break
        partial = PartialDesign(grid, indices[:k])
        # a fully forced step (one unused level everywhere) cannot profit from redraws
        forced = all(usage.unused(i).size == 1 for i in range(d))
        budget = 1 if forced else config.max_attempts_per_point
        chosen = None
        spent = 0
        for _ in range(budget):
            spent += 1
            z = draw_z(grid, usage, rng, config.center_band)
            cands = candidate_set(z, partial, usage, r_eff, rng=rng, trace=trace)
            chosen = select_candidate(cands, partial, usage, r_eff)
            if chosen is not None:
                break
        attempts_total += spent
        if chosen is not None:
            indices[k] = chosen
            usage.mark(chosen)
            k += 1
            if trace is not None:
                trace.append({"event": "insert", "k": k, "point": chosen.tolist(), "attempts": spent})
            continue
        # stalled at this point
        if restarts_used < config.restarts:
            restarts_used += 1
            k = 0
            r_eff = config.r
            if trace is not None:
                trace.append({"event": "restart", "number": restarts_used})
            continue
        if not config.allow_decrement:
            raise ConstructionFailedError(
                f"no completion at r={config.r} after {restarts_used} restarts "
                "(decrement disabled)",
                partial=partial,
                trace=tuple(trace) if trace is not None else (),
            )
        new_r = r_eff * (1 - config.r_decrement)
        if new_r < floor:
            raise ConstructionFailedError(
                f"radius fell below floor {floor:.6g} before completion",
                partial=partial,
                trace=tuple(trace) if trace is not None else (),
            )
        decrements += 1
        if trace is not None:
            trace.append({"event": "decrement", "r_old": r_eff, "r_new": new_r})
        r_eff = new_r
        # the partial design is kept: only the radius shrinks

    prov = {
        "generator": "slhd",
        "seed": config.seed,
        "rng": "PCG64",
        "r_requested": config.r,
        "r_effective": r_eff,
        "insertion_order": list(range(n)),
    }
    design = Design(grid, indices, prov)
    return SlhdResult(
        design=design,
        r_requested=config.r,
        r_effective=r_eff,
        attempts=attempts_total,
        decrements=decrements,
        restarts_used=restarts_used,
        trace=tuple(trace) if trace is not None else None,
    )


def estimate_random_q75(grid: GridSpec, seed: Optional[int], reps: int = 30) -> float:
    """Mean per-design 0.75-quantile of nearest-neighbor distances of random LHDs.

    The recommended starting radius for the greedy construction.  Replication
    seeds derive from ``SeedSequence([seed, rep])``.
    """
    vals = np.empty(reps)
    for rep in range(reps):
        rng = np.random.default_rng(_subseed(seed, rep))
        vals[rep] = nn_summary(random_lhd(grid, rng)).quantile(0.75)
    return float(vals.mean())


def _subseed(seed: Optional[int], *path: int) -> np.random.SeedSequence:
    if seed is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence(entropy=[int(seed), *map(int, path)])


@dataclass(frozen=True)
class ScheduleStep:
    r: float
    result: Optional[SlhdResult]
    error: Optional[str]
    elapsed_s: float

    @property
    def clean(self) -> bool:
        """Completed at the requested radius, without any shrink."""
        return self.result is not None and self.result.decrements == 0

    @property
    def min_distance(self) -> Optional[float]:
        if self.result is None:
            return None
        return nn_summary(self.result.design).min_interpoint


@dataclass(frozen=True)
class ScheduleResult:
    q75_estimate: float
    steps: tuple
    best_index: Optional[int]
    best_clean_index: Optional[int]

    @property
    def best(self) -> Optional[SlhdResult]:
        if self.best_index is None:
            return None
        return self.steps[self.best_index].result


def radius_schedule(
    grid: GridSpec,
    seed: Optional[int],
    steps: int = 5,
    delta: float = 0.05,
    q75_reps: int = 30,
    first_restarts: int = 40,
    later_restarts: int = 8,
    max_attempts_per_point: int = 30,
    r_decrement: float = 0.05,
    center_band: float = 0.15,
) -> ScheduleResult:
    """Run the construction over an increasing ladder of radii.

    The ladder starts at an estimate of the random-LHD Q_0.75 nearest-neighbor
    quantile and climbs by the relative increment ``delta``.  The first rung
    may shrink its radius to guarantee a design; higher rungs must complete
    cleanly and the ladder stops at the first rung that cannot, since rungs
    only get harder.  ``best_index`` marks the step whose design achieved the
    largest minimum inter-point distance, ``best_clean_index`` the largest
    radius that completed without shrinking.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    q75 = estimate_random_q75(grid, seed, reps=q75_reps)
    outcomes = []
    for k in range(steps):
        r_k = q75 * (1 + delta * k)
        cfg = SlhdConfig(
            r=r_k,
            seed=None,
            max_attempts_per_point=max_attempts_per_point,
            r_decrement=r_decrement,
            center_band=center_band,
            restarts=first_restarts if k == 0 else later_restarts,
            allow_decrement=(k == 0),
        )
        # each rung draws from its own deterministic stream
        rng_seed = _subseed(seed, 1 + k)
        t0 = perf_counter()
        try:
            result = _construct_with_seedseq(grid, cfg, rng_seed)
            outcomes.append(ScheduleStep(r=r_k, result=result, error=None,
                                         elapsed_s=perf_counter() - t0))
        except ConstructionFailedError as err:
            outcomes.append(ScheduleStep(r=r_k, result=None, error=str(err),
                                         elapsed_s=perf_counter() - t0))
            if k > 0:
                break
    best_index = None
    best_clean_index = None
    best_min = -np.inf
    for i, step in enumerate(outcomes):
        md = step.min_distance
        if md is not None and md > best_min:
            best_min = md
            best_index = i
        if step.clean:
            best_clean_index = i
    return ScheduleResult(
        q75_estimate=q75,
        steps=tuple(outcomes),
        best_index=best_index,
        best_clean_index=best_clean_index,
    )


def _construct_with_seedseq(grid, config, seedseq, collect_trace=False):
    """slhd_construct with the rng drawn from a SeedSequence (schedule internal)."""
    # SlhdConfig carries plain ints for serializability; the schedule needs
    # derived streams, so it routes here.
    rng_seed = int(seedseq.generate_state(1)[0]) if seedseq is not None else None
    cfg = SlhdConfig(
        r=config.r,
        seed=rng_seed,
        max_attempts_per_point=config.max_attempts_per_point,
        r_decrement=config.r_decrement,
        center_band=config.center_band,
        restarts=config.restarts,
        allow_decrement=config.allow_decrement,
    )
    return slhd_construct(grid, cfg, collect_trace=collect_trace)
