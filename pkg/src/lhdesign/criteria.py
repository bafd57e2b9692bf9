"""Design quality criteria: maximin, Audze-Eglais, centered L2 discrepancy,
and nearest-neighbor distance summaries.

All criteria are pure functions of the point coordinates, invariant under
reordering of points and relabeling of dimensions, and use a fixed summation
order so results are bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import SingularCriterionError, UndefinedCriterionError
from .grid import PointSet, as_points


@dataclass(frozen=True)
class CriterionValue:
    """A named criterion evaluation with its optimization direction."""

    name: str
    value: float
    direction: str  # "maximize" or "minimize"
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class NNDistanceSummary:
    """Per-point nearest-neighbor Euclidean distances and their quantiles."""

    nn: np.ndarray

    def quantile(self, alpha: float) -> float:
        """Linear-interpolation quantile of the nearest-neighbor sample.

        Uses the type-7 rule (position (n-1)*alpha + 1), numpy's default.
        """
        if not 0 < alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        return float(np.quantile(self.nn, alpha))

    @property
    def min_interpoint(self) -> float:
        """Minimum distance over all point pairs; equals min of nn."""
        return float(self.nn.min())


def _condensed_to_pair(idx: int, n: int) -> tuple[int, int]:
    # condensed pdist order is (0,1), (0,2), ..., (1,2), ... : lexicographic
    row_starts = np.concatenate(([0], np.cumsum(np.arange(n - 1, 0, -1))))
    i = int(np.searchsorted(row_starts, idx, side="right")) - 1
    j = int(idx - row_starts[i] + i + 1)
    return i, j


def _require_pairs(pts: np.ndarray):
    if pts.shape[0] < 2:
        raise UndefinedCriterionError(
            f"criterion needs at least 2 points, got {pts.shape[0]}"
        )


def maximin(design: PointSet, p: float = 2) -> CriterionValue:
    """Minimum L_p inter-point distance (larger is better).

    The attaining pair, lexicographically smallest on ties, is reported in
    ``details["pair"]``.
    """
    pts = as_points(design)
    _require_pairs(pts)
    dists = pdist(pts, "minkowski", p=p)
    k = int(np.argmin(dists))
    return CriterionValue(
        name="maximin",
        value=float(dists[k]),
        direction="maximize",
        details={"pair": _condensed_to_pair(k, pts.shape[0]), "p": p},
    )


def audze_eglais(design: PointSet) -> CriterionValue:
    """Sum of inverse squared Euclidean distances over all point pairs.

    Smaller is better (potential energy of unit charges).  Coincident points
    make the criterion singular and raise, naming the offending pair.
    """
    pts = as_points(design)
    _require_pairs(pts)
    sq = pdist(pts, "sqeuclidean")
    zero = np.flatnonzero(sq == 0.0)
    if zero.size:
        i, j = _condensed_to_pair(int(zero[0]), pts.shape[0])
        raise SingularCriterionError(i, j)
    return CriterionValue(
        name="audze_eglais", value=float(np.sum(1.0 / sq)), direction="minimize"
    )


def centered_l2_discrepancy(design: PointSet) -> CriterionValue:
    """Centered L2 discrepancy CD2 of the point set in [0, 1]^d.

    Evaluates the standard closed form

        CD2^2 = (13/12)^d
                - (2/n) sum_i prod_k (1 + |x_ik - 1/2|/2 - |x_ik - 1/2|^2/2)
                + (1/n^2) sum_ij prod_k (1 + |x_ik - 1/2|/2 + |x_jk - 1/2|/2
                                           - |x_ik - x_jk|/2)

    and reports CD2 (the square root) as the value, with the squared form in
    ``details["squared"]``.  Smaller is better.
    """
    pts = as_points(design)
    n, d = pts.shape
    if n < 1:
        raise UndefinedCriterionError("criterion needs at least 1 point")
    a = np.abs(pts - 0.5)
    term1 = np.sum(np.prod(1.0 + 0.5 * a - 0.5 * a**2, axis=1))
    cross = np.abs(pts[:, None, :] - pts[None, :, :])
    term2 = np.sum(np.prod(1.0 + 0.5 * (a[:, None, :] + a[None, :, :]) - 0.5 * cross, axis=2))
    sq = (13.0 / 12.0) ** d - (2.0 / n) * term1 + term2 / n**2
    # roundoff can push tiny positive values below zero
    sq = max(sq, 0.0)
    return CriterionValue(
        name="centered_l2",
        value=float(np.sqrt(sq)),
        direction="minimize",
        details={"squared": float(sq)},
    )


def nn_summary(design: PointSet) -> NNDistanceSummary:
    """Nearest-neighbor Euclidean distance of every point.

    Raises :class:`UndefinedCriterionError` for fewer than 2 points.
    """
    pts = as_points(design)
    _require_pairs(pts)
    dm = squareform(pdist(pts))
    np.fill_diagonal(dm, np.inf)
    nn = dm.min(axis=1)
    nn.setflags(write=False)
    return NNDistanceSummary(nn=nn)


CRITERIA = {
    "maximin": maximin,
    "audze_eglais": audze_eglais,
    "centered_l2": centered_l2_discrepancy,
}
