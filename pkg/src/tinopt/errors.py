"""Exception hierarchy shared by every module."""


class TinOptError(Exception):
    """Base class for all library errors."""


class ShapeError(TinOptError, ValueError):
    """Matrix or vector dimensions do not agree."""


class InvalidInstanceError(TinOptError, ValueError):
    """A channel parameter is outside its admissible range (e.g. P <= 1)."""


class ResourceLimitError(TinOptError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, what, value, cap):
        super().__init__(f"{what}={value} exceeds the enumeration cap {cap}")
        self.what = what
        self.value = value
        self.cap = cap


class InfeasibleError(TinOptError):
    """A linear program has an empty feasible set."""


class ConsistencyError(TinOptError, AssertionError):
    """An internal invariant that the theory guarantees was violated."""
