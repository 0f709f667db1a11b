"""
Optional Doob Core - Measure Families

A finite family of equivalent probability measures P_0..P_{k-1} stored as
leaf probabilities. Atom probabilities at coarser levels are derived by
summation; equivalence bounds and the one-step domination condition are
computed from them. Convex mixtures of the family are plain leaf rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import EquivalenceError, MeasureFamilyError, WeightError
from .filtration import Atom, FiltrationTree, check_condition_A
from .logging import get_logger
from .reports import ConditionReport, Violation, rounded

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class MeasureFamily:
    """
    Extreme measures of a convex family, as rows of leaf probabilities.

    Usage:
        tree = build_tree([2, 2])
        family = MeasureFamily(tree, [[0.25] * 4, [0.3, 0.2, 0.3, 0.2]])
        family.level_probabilities(1)   # [[0.5, 0.5], [0.5, 0.5]]

    Raises:
        MeasureFamilyError: If the tree fails the atomic-filtration check,
            the rows have the wrong shape or do not sum to one.
        EquivalenceError: If some measure gives a leaf non-positive mass.
    """

    tree: FiltrationTree
    leaf_probabilities: np.ndarray
    tolerances: Tolerances = DEFAULT_TOLERANCES
    _levels: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        report = check_condition_A(self.tree)
        if not report.passed:
            failed = ", ".join(f"{c.clause}@{c.level}" for c in report.failed_clauses)
            raise MeasureFamilyError(f"Tree fails the filtration condition: {failed}")

        rows = np.array(self.leaf_probabilities, dtype=float, ndmin=2)
        if rows.ndim != 2 or rows.shape[1] != self.tree.num_leaves or rows.shape[0] < 1:
            raise MeasureFamilyError(
                f"Expected k x {self.tree.num_leaves} leaf probabilities, got shape {rows.shape}"
            )
        if not np.isfinite(rows).all():
            raise MeasureFamilyError("Leaf probabilities must be finite")
        bad = np.argwhere(rows <= 0)
        if bad.size:
            i, leaf = (int(x) for x in bad[0])
            raise EquivalenceError(i, leaf, float(rows[i, leaf]))
        sums = rows.sum(axis=1)
        off = np.flatnonzero(np.abs(sums - 1.0) > self.tolerances.input)
        if off.size:
            raise MeasureFamilyError(
                f"Measure {int(off[0])} sums to {sums[off[0]]!r}, expected 1"
            )
        rows.setflags(write=False)
        object.__setattr__(self, "leaf_probabilities", rows)

    @property
    def k(self) -> int:
        """Number of extreme measures."""
        return int(self.leaf_probabilities.shape[0])

    def check_measure(self, index: int) -> int:
        """Validate a 0-based measure index."""
        if not isinstance(index, (int, np.integer)) or not 0 <= index < self.k:
            raise MeasureFamilyError(f"Measure index {index!r} outside 0..{self.k - 1}")
        return int(index)

    def level_probabilities(self, level: int) -> np.ndarray:
        """Array of shape (k, atoms at ``level``) with P_i(A) for every atom."""
        if level not in self._levels:
            probs = self.tree.aggregate(self.leaf_probabilities, self.tree.depth, level)
            probs.setflags(write=False)
            self._levels[level] = probs
        return self._levels[level]

    def transition_probabilities(self, level: int) -> np.ndarray:
        """
        One-step conditional probabilities P_i(child | parent) for children at ``level``.

        Shape (k, atoms at ``level``); ``level`` must be at least 1.
        """
        parent = self.tree.parent_index(level)
        return self.level_probabilities(level) / self.level_probabilities(level - 1)[:, parent]

    def to_dict(self) -> dict:
        """JSON-ready representation (measures only)."""
        return {"measures": self.leaf_probabilities.tolist()}


@dataclass(frozen=True)
class EquivalenceBounds:
    """
    Bounds l <= dQ1/dQ2 <= L over ordered pairs of extreme measures.

    ``eps_bar`` is L/(1+L), the largest mixing weight for which the drift
    bound is guaranteed, and ``drift_factor`` is l/(1+L), the fraction of a
    base-measure drift that survives under every such mixture.
    """

    lower: float
    upper: float
    eps_bar: float
    drift_factor: float

    def to_dict(self) -> dict:
        """Convert to dictionary for reporting."""
        return rounded({
            "l": self.lower,
            "L": self.upper,
            "eps_bar": self.eps_bar,
            "drift_factor": self.drift_factor,
        })


def atom_probability(family: MeasureFamily, measure_index: int, atom: Sequence[int]) -> float:
    """
    P_i(A) for one atom.

    Raises:
        AtomLookupError: If the atom is not in the family's tree.
    """
    i = family.check_measure(measure_index)
    atom = family.tree.check_atom(atom)
    return float(family.level_probabilities(atom.level)[i, atom.position])


def equivalence_bounds(family: MeasureFamily) -> EquivalenceBounds:
    """
    Compute l, L, eps_bar and the drift factor from leafwise density ratios.

    Ratios include every ordered pair and the identity pair, so l <= 1 <= L.

    Raises:
        EquivalenceError: If a leaf probability is not strictly positive.
    """
    rows = family.leaf_probabilities
    bad = np.argwhere(rows <= 0)
    if bad.size:
        i, leaf = (int(x) for x in bad[0])
        raise EquivalenceError(i, leaf, float(rows[i, leaf]))

    ratios = rows[:, None, :] / rows[None, :, :]
    lower = float(ratios.min())
    upper = float(ratios.max())
    return EquivalenceBounds(
        lower=lower,
        upper=upper,
        eps_bar=upper / (1.0 + upper),
        drift_factor=lower / (1.0 + upper),
    )


def check_condition_B(
    family: MeasureFamily,
    start_level: int = 1,
    tolerances: Optional[Tolerances] = None,
) -> ConditionReport:
    """
    Check one-step domination by a distinguished measure.

    For every candidate ``i0`` and every transition from level ``n >= start_level``
    to ``n + 1``, every measure's conditional child probability must not
    exceed the candidate's. All violating (measure, parent, child) triples
    are recorded per candidate; the condition holds iff some candidate has
    none. Violations are data, never errors.

    Args:
        family: The measure family.
        start_level: First parent level whose transitions are constrained.
        tolerances: Comparison tolerances (``inequality`` is used).

    Returns:
        ConditionReport with ``violations`` keyed by candidate index.
    """
    tol = (tolerances or family.tolerances).inequality
    tree = family.tree
    violations: dict[int, list[Violation]] = {i0: [] for i0 in range(family.k)}

    for n in range(max(start_level, 0), tree.depth):
        ratios = family.transition_probabilities(n + 1)
        parents = tree.parent_index(n + 1)
        for i0 in range(family.k):
            mask = ratios > ratios[i0] + tol
            for i, j in zip(*np.nonzero(mask)):
                violations[i0].append(Violation(
                    measure=int(i),
                    parent=Atom(n, int(parents[j])),
                    child=Atom(n + 1, int(j)),
                    ratio=float(ratios[i, j]),
                    dominating_ratio=float(ratios[i0, j]),
                ))

    passing = [i0 for i0, items in violations.items() if not items]
    notes = []
    if start_level >= tree.depth:
        notes.append(f"no transitions from level {start_level} at depth {tree.depth}")
    logger.debug(
        "Domination check: %d candidates pass, violations per candidate %s",
        len(passing), [len(v) for v in violations.values()],
    )
    return ConditionReport(
        condition="B",
        passed=bool(passing),
        violations=violations,
        passing_candidates=passing,
        start_level=start_level,
        notes=notes,
    )


def condition_b_archive(report: ConditionReport) -> dict:
    """Index-only projection of a domination report, stable enough to commit as a fixture."""
    return {
        "condition": report.condition,
        "passed": report.passed,
        "start_level": report.start_level,
        "passing_candidates": list(report.passing_candidates),
        "violations": {
            str(i0): [[v.measure, list(v.parent), list(v.child)] for v in items]
            for i0, items in sorted(report.violations.items())
        },
    }


def check_weights(family: MeasureFamily, weights: Sequence[float]) -> np.ndarray:
    """
    Validate convex weights for the family.

    Raises:
        WeightError: Wrong length, negative entry or sum different from one.
    """
    alpha = np.asarray(weights, dtype=float)
    tol = family.tolerances.input
    if alpha.shape != (family.k,):
        raise WeightError(weights, f"expected {family.k} weights")
    if not np.isfinite(alpha).all():
        raise WeightError(weights, "weights must be finite")
    if (alpha < -tol).any():
        raise WeightError(weights, "negative weight")
    if abs(alpha.sum() - 1.0) > tol:
        raise WeightError(weights, f"weights sum to {alpha.sum()!r}")
    return np.clip(alpha, 0.0, None)


def mixture(family: MeasureFamily, weights: Sequence[float]) -> np.ndarray:
    """Leaf row of the mixture sum_i alpha_i P_i."""
    alpha = check_weights(family, weights)
    return alpha @ family.leaf_probabilities


def sample_weights(rng: np.random.Generator, k: int, size: Optional[int] = None) -> np.ndarray:
    """Uniform draws from the probability simplex."""
    return rng.dirichlet(np.ones(k), size=size)


def rn_conditional(family: MeasureFamily, i: int, other: int, level: int) -> np.ndarray:
    """
    E^{P_other}{dP_i/dP_other | F_level} on every atom of ``level``: P_i(A)/P_other(A).
    """
    i = family.check_measure(i)
    other = family.check_measure(other)
    probs = family.level_probabilities(level)
    return probs[i] / probs[other]
