"""Exception types shared across the package."""

from __future__ import annotations


class PolyregretError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PolyregretError, ValueError):
    """Invalid configuration, argument, or input value."""


class DimensionMismatchError(ConfigError):
    """A point or cost vector does not match the domain's ambient dimension."""


class VertexCountError(ConfigError):
    """Vertex enumeration refused because the count exceeds the cap."""

    def __init__(self, count: int, cap: int, what: str = "vertices"):
        self.count = count
        self.cap = cap
        super().__init__(f"{what}: count {count} exceeds cap {cap}")


class ConvergenceError(PolyregretError, RuntimeError):
    """An iterative routine stopped without meeting its tolerance.

    Carries the best iterate found so the caller can inspect partial results.
    """

    def __init__(self, message: str, best_point=None, residual: float | None = None,
                 iterations: int | None = None):
        self.best_point = best_point
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class DegenerateGapError(PolyregretError):
    """The cost vector is constant on the domain: every suboptimality gap is zero."""
