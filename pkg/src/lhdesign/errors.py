"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LhdError(Exception):
    """Base class; the CLI maps these to exit status 1."""


class UndefinedCriterionError(LhdError):
    """A criterion was requested for a design too small to define it."""


class SingularCriterionError(LhdError):
    """A criterion diverges because two points coincide.

    Carries the offending pair of point indices.
    """

    def __init__(self, i: int, j: int):
        self.pair = (i, j)
        super().__init__(f"points {i} and {j} coincide; criterion is singular")


class InfeasibleSeedError(LhdError):
    """The seed point needs d distinct levels but the grid has fewer than d."""


class ExhaustedLevelsError(LhdError):
    """Some dimension has no unused level left; the design is complete there."""


class ConstructionFailedError(LhdError):
    """Greedy construction hit the radius floor without completing.

    Carries the partial design and the attempt trace accumulated so far.
    """

    def __init__(self, message, partial=None, trace=None):
        self.partial = partial
        self.trace = trace if trace is not None else []
        super().__init__(message)


class DesignFormatError(LhdError):
    """A design file could not be parsed; names the offending location."""
