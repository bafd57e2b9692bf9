"""Grid-based Latin hypercube designs: data model, random generation, validation.

A design lives on the grid R = {0, 1/(n-1), ..., 1} in each of d dimensions.
Coordinates are stored as integer level indices 0..n-1 so that grid membership
and the Latin hypercube property are exact; real coordinates are derived views.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist, squareform


@dataclass(frozen=True)
class GridSpec:
    """An n-level grid in d dimensions.

    Levels are the n equidistant values {(j-1)/(n-1) : j = 1..n} on [0, 1].
    The degenerate n = 1 grid has the single level 0.5.
    """

    n: int
    d: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")

    @property
    def levels(self) -> np.ndarray:
        if self.n == 1:
            return np.array([0.5])
        return np.arange(self.n) / (self.n - 1)

    def to_real(self, indices: np.ndarray) -> np.ndarray:
        """Map integer level indices to real coordinates in [0, 1]."""
        if self.n == 1:
            return np.full(np.shape(indices), 0.5)
        return np.asarray(indices) / (self.n - 1)


def _check_indices(grid: GridSpec, indices: np.ndarray, rows: int | None = None):
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if indices.ndim != 2 or indices.shape[1] != grid.d:
        raise ValueError(f"expected a (k, {grid.d}) index array, got shape {indices.shape}")
    if rows is not None and indices.shape[0] != rows:
        raise ValueError(f"expected {rows} rows, got {indices.shape[0]}")
    if indices.size and (indices.min() < 0 or indices.max() >= grid.n):
        raise ValueError(f"level indices must lie in 0..{grid.n - 1}")
    indices.setflags(write=False)
    return indices


@dataclass(frozen=True)
class Design:
    """A complete n-point design on a grid.

    ``level_indices`` has one row per point and one column per dimension.
    The Latin hypercube property (each column a permutation of 0..n-1) is
    checked by :func:`validate_lhd`, not enforced at construction, so that
    externally loaded, possibly invalid designs can still be inspected.
    """

    grid: GridSpec
    level_indices: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "level_indices", _check_indices(self.grid, self.level_indices, self.grid.n)
        )

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def points(self) -> np.ndarray:
        """Real coordinates, shape (n, d)."""
        return self.grid.to_real(self.level_indices)


@dataclass(frozen=True)
class PartialDesign:
    """The first k <= n points of a design under construction.

    Unlike :class:`Design`, the partial Latin hypercube property (no level
    used twice in any dimension) is enforced here: the greedy builder relies
    on it.
    """

    grid: GridSpec
    level_indices: np.ndarray

    def __post_init__(self):
        idx = _check_indices(self.grid, self.level_indices)
        if idx.shape[0] > self.grid.n:
            raise ValueError("more points than grid levels")
        for s in range(self.grid.d):
            col = idx[:, s]
            if np.unique(col).size != col.size:
                raise ValueError(f"level reused in dimension {s + 1}")
        object.__setattr__(self, "level_indices", idx)

    @property
    def k(self) -> int:
        return self.level_indices.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self.grid.to_real(self.level_indices)


PointSet = Union[Design, PartialDesign, np.ndarray]


def as_points(obj: PointSet) -> np.ndarray:
    """Real coordinate matrix of a design, partial design, or raw array."""
    if isinstance(obj, (Design, PartialDesign)):
        return obj.points
    pts = np.asarray(obj, dtype=float)
    if pts.ndim != 2:
        raise ValueError(f"expected a 2-d point array, got shape {pts.shape}")
    return pts


def random_lhd(grid: GridSpec, seed) -> Design:
    """Generate a random Latin hypercube design.

    Each dimension receives an independent uniform random permutation of the
    level indices 0..n-1 (Fisher-Yates via numpy's PCG64 generator), so every
    one of the (n!)^d designs is equally likely.  The same seed always yields
    the same design.

    Parameters
    ----------
    grid : GridSpec
        Number of points/levels and dimensions.
    seed : int, sequence of int, or numpy.random.Generator
        Seed for the permutation draws.

    Returns
    -------
    Design
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    idx = np.column_stack([rng.permutation(grid.n) for _ in range(grid.d)])
    prov = {
        "generator": "random_lhd",
        "seed": None if isinstance(seed, np.random.Generator) else seed,
        "rng": "PCG64",
    }
    return Design(grid, idx, prov)


@dataclass(frozen=True)
class DimensionViolation:
    """LHD violation in one dimension (1-based), with the offending levels."""

    dimension: int
    duplicated: tuple
    missing: tuple


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    violations: tuple

    def __bool__(self) -> bool:
        return self.ok


def validate_lhd(design: Design) -> ValidityReport:
    """Check the Latin hypercube property of a design.

    Every column of level indices must be a permutation of 0..n-1.  Invalid
    designs yield a report naming, per dimension, the duplicated and missing
    levels; they never raise.
    """
    violations = []
    n = design.grid.n
    for s in range(design.grid.d):
        counts = np.bincount(design.level_indices[:, s], minlength=n)
        if np.all(counts == 1):
            continue
        violations.append(
            DimensionViolation(
                dimension=s + 1,
                duplicated=tuple(np.flatnonzero(counts > 1).tolist()),
                missing=tuple(np.flatnonzero(counts == 0).tolist()),
            )
        )
    return ValidityReport(ok=not violations, violations=tuple(violations))


def pairwise_distances(design: PointSet, p: float = 2) -> np.ndarray:
    """Full symmetric matrix of L_p distances between design points.

    Parameters
    ----------
    design : Design, PartialDesign, or (k, d) array of real coordinates
    p : float, optional
        Minkowski order, >= 1.  Defaults to the Euclidean p = 2.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    pts = as_points(design)
    if pts.shape[0] < 1:
        raise ValueError("need at least one point")
    if pts.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(pts, "minkowski", p=p))
