"""
Optional Doob Core - Exceptions

Exception hierarchy. Every error derives from ``DoobError`` and keeps the
context needed to explain it as attributes. Mathematical verdicts that are
expected outcomes (a failed condition, an infeasible cell) are reports,
not exceptions; only ``NotRegularError`` wraps such a report for callers
that asked for a decomposition.
"""

from typing import Any, Optional


class DoobError(Exception):
    """Base class for all Optional Doob Core errors."""


class TreeConstructionError(DoobError):
    """Raised when a filtration tree cannot be built from the given shape."""


class AtomLookupError(DoobError):
    """Raised when an atom does not belong to a tree."""

    def __init__(self, atom: Any, message: Optional[str] = None):
        self.atom = atom
        super().__init__(message or f"Unknown atom {atom}")


class MeasureFamilyError(DoobError):
    """Raised when measure rows do not fit the tree or are not normalized."""


class EquivalenceError(MeasureFamilyError):
    """Raised when a measure gives a leaf zero (or negative) mass."""

    def __init__(self, measure: int, leaf: int, value: float):
        self.measure = measure
        self.leaf = leaf
        self.value = value
        super().__init__(
            f"Measure {measure} assigns non-positive probability {value!r} to leaf {leaf}"
        )


class WeightError(DoobError):
    """Raised for invalid convex weights."""

    def __init__(self, weights: Any, reason: str):
        self.weights = weights
        self.reason = reason
        super().__init__(f"Invalid weights {list(weights)}: {reason}")


class StructureError(DoobError):
    """Raised when values do not match the tree's level sizes."""


class StoppingLevelError(DoobError):
    """Raised when a stopping level is outside 0..depth."""

    def __init__(self, level: int, depth: int):
        self.level = level
        self.depth = depth
        super().__init__(f"Stopping level {level} outside 0..{depth}")


class ConsistencyError(DoobError):
    """Raised when two independent computations of the same quantity disagree."""

    def __init__(self, name: str, deviation: float):
        self.name = name
        self.deviation = deviation
        super().__init__(f"Self-check '{name}' failed: deviation {deviation:.3e}")


class SingularityError(DoobError):
    """Raised when a basis is rank deficient."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"Vector {index} is linearly dependent on the preceding basis vectors")


class ConeMembershipError(DoobError):
    """Raised when the target is not strictly inside the cone of any usable basis."""

    def __init__(self, reason: str, margins: Optional[list[float]] = None):
        self.reason = reason
        self.margins = margins or []
        super().__init__(reason)


class NoKernelError(DoobError):
    """Raised when the moment vectors have a trivial kernel."""

    def __init__(self, rank: int, count: int):
        self.rank = rank
        self.count = count
        super().__init__(f"No nonzero kernel: rank {rank} equals vector count {count}")


class PreconditionError(DoobError):
    """Raised when an operation's input violates a stated precondition."""

    def __init__(self, reason: str, atom: Any = None):
        self.reason = reason
        self.atom = atom
        suffix = f" at atom {atom}" if atom is not None else ""
        super().__init__(f"{reason}{suffix}")


class NotRegularError(DoobError):
    """Raised when a decomposition is requested for a process that is not regular."""

    def __init__(self, report: Any):
        self.report = report
        cells = ", ".join(f"(level {c.level}, atom {c.parent})" for c in report.failing_cells)
        super().__init__(f"Process is not regular; failing cells: {cells or 'none'}")


class DegenerateInputError(DoobError):
    """Raised when an input makes an operation undefined (e.g. f_0 = 0)."""


class InstanceSpecError(DoobError):
    """Raised for an invalid example-instance description."""


class InstanceFormatError(DoobError):
    """Raised when an instance or process file cannot be parsed."""

    def __init__(self, source: Any, reason: str):
        self.source = source
        self.reason = reason
        super().__init__(f"{source}: {reason}")
