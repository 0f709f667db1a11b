"""
Optional Doob Core - Reports

Status enum and report dataclasses shared by the condition checks and the
verification harness. Every report converts to a plain dictionary with
rounded floats so JSON output is stable across runs.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

ROUND_DIGITS = 12


class CheckStatus(Enum):
    """Outcome of a check."""

    PASS = "pass"
    FAIL = "fail"
    HYPOTHESIS_FAILS = "hypothesis_fails"  # Conclusion evaluated but not asserted
    UNTESTABLE = "untestable"  # Input does not meet the check's precondition
    SKIPPED = "skipped"


def rounded(value: Any) -> Any:
    """Recursively round floats (and numpy values) for reporting."""
    if isinstance(value, dict):
        return {str(k): rounded(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [rounded(v) for v in value]
    if isinstance(value, np.ndarray):
        return rounded(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        result = round(float(value), ROUND_DIGITS)
        return 0.0 if result == 0 else result
    if isinstance(value, Enum):
        return value.value
    return value


@dataclass
class ClauseResult:
    """Verdict of one clause of a condition at one level."""

    clause: str
    level: Optional[int]
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        """Convert to dictionary for reporting."""
        return {
            "clause": self.clause,
            "level": self.level,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class Violation:
    """A one-step ratio that exceeds the candidate dominating measure's ratio."""

    measure: int
    parent: tuple[int, int]
    child: tuple[int, int]
    ratio: float
    dominating_ratio: float

    def to_dict(self) -> dict:
        """Convert to dictionary for reporting."""
        return {
            "measure": self.measure,
            "parent": list(self.parent),
            "child": list(self.child),
            "ratio": rounded(self.ratio),
            "dominating_ratio": rounded(self.dominating_ratio),
        }


@dataclass
class ConditionReport:
    """
    Report of a structural condition.

    For the filtration condition ``clauses`` holds one entry per clause and
    level. For the domination condition ``violations`` maps each candidate
    index to its violating triples and ``passing_candidates`` lists the
    candidates without violations.
    """

    condition: str
    passed: bool
    clauses: list[ClauseResult] = field(default_factory=list)
    violations: dict[int, list[Violation]] = field(default_factory=dict)
    passing_candidates: list[int] = field(default_factory=list)
    start_level: Optional[int] = None
    notes: list[str] = field(default_factory=list)

    @property
    def failed_clauses(self) -> list[ClauseResult]:
        """Clauses that did not pass."""
        return [c for c in self.clauses if not c.passed]

    def to_dict(self) -> dict:
        """Convert to dictionary for reporting."""
        result: dict[str, Any] = {
            "condition": self.condition,
            "passed": self.passed,
            "notes": list(self.notes),
        }
        if self.clauses:
            result["clauses"] = [c.to_dict() for c in self.clauses]
        if self.violations or self.start_level is not None:
            result["start_level"] = self.start_level
            result["passing_candidates"] = list(self.passing_candidates)
            result["violations"] = {
                str(candidate): [v.to_dict() for v in items]
                for candidate, items in sorted(self.violations.items())
            }
        return result


@dataclass
class CheckResult:
    """
    One line of the verification harness.

    ``conclusion_holds`` is filled whenever the conclusion was evaluated,
    including when the hypothesis failed and the result is only reported.
    """

    name: str
    status: CheckStatus
    conclusion_holds: Optional[bool] = None
    max_deviation: float = 0.0
    cases: int = 0
    detail: str = ""

    @property
    def failed(self) -> bool:
        """True when an asserted conclusion did not hold."""
        return self.status == CheckStatus.FAIL

    def to_dict(self) -> dict:
        """Convert to dictionary for reporting."""
        return {
            "name": self.name,
            "status": self.status.value,
            "conclusion_holds": self.conclusion_holds,
            "max_deviation": rounded(self.max_deviation),
            "cases": self.cases,
            "detail": self.detail,
        }
