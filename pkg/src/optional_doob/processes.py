"""
Optional Doob Core - Adapted Processes

Adapted processes on a filtration tree, their classification relative to
a measure family (martingale, supermartingale or neither), deterministic
stopping, and the drift bound that survives small mixing towards other
members of the family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .conditional import cond_exp_values, expect_under, leaf_values
from .exceptions import ConsistencyError, StoppingLevelError, StructureError
from .filtration import Atom, FiltrationTree
from .logging import get_logger
from .measures import MeasureFamily, equivalence_bounds, sample_weights
from .reports import CheckStatus, rounded

logger = get_logger(__name__)

# Depth up to which the multi-step recomputation runs as an oracle
MULTI_STEP_MAX_DEPTH = 3


@dataclass(frozen=True, eq=False)
class AdaptedProcess:
    """
    Process f_0..f_N with f_m given by one value per atom of level m.

    Usage:
        f = AdaptedProcess.from_lists(tree, [[1.0], [1.0, 1.0], [0.8, 1.0, 0.9, 1.0]])
        f[2]            # array([0.8, 1. , 0.9, 1. ])
        (f + f)[0]      # array([2.])
    """

    tree: FiltrationTree
    slices: tuple

    def __post_init__(self):
        if len(self.slices) != self.tree.depth + 1:
            raise StructureError(
                f"Process has {len(self.slices)} levels, tree has {self.tree.depth + 1}"
            )
        frozen = []
        for m, values in enumerate(self.slices):
            values = np.array(values, dtype=float).reshape(-1)
            if values.size != self.tree.level_sizes[m]:
                raise StructureError(
                    f"Level {m} has {values.size} values, expected {self.tree.level_sizes[m]}"
                )
            if not np.isfinite(values).all():
                raise StructureError(f"Level {m} contains non-finite values")
            values.setflags(write=False)
            frozen.append(values)
        object.__setattr__(self, "slices", tuple(frozen))

    @classmethod
    def from_lists(cls, tree: FiltrationTree, levels: Sequence[Sequence[float]]) -> AdaptedProcess:
        return cls(tree, tuple(np.asarray(level, dtype=float) for level in levels))

    @classmethod
    def constant(cls, tree: FiltrationTree, value: float) -> AdaptedProcess:
        return cls(tree, tuple(np.full(size, float(value)) for size in tree.level_sizes))

    @classmethod
    def zeros(cls, tree: FiltrationTree) -> AdaptedProcess:
        return cls.constant(tree, 0.0)

    @property
    def depth(self) -> int:
        return self.tree.depth

    def __getitem__(self, level: int) -> np.ndarray:
        return self.slices[level]

    def __add__(self, other: AdaptedProcess) -> AdaptedProcess:
        self._check_same_tree(other)
        return AdaptedProcess(self.tree, tuple(a + b for a, b in zip(self.slices, other.slices)))

    def __sub__(self, other: AdaptedProcess) -> AdaptedProcess:
        self._check_same_tree(other)
        return AdaptedProcess(self.tree, tuple(a - b for a, b in zip(self.slices, other.slices)))

    def __neg__(self) -> AdaptedProcess:
        return self.scale(-1.0)

    def scale(self, factor: float) -> AdaptedProcess:
        return AdaptedProcess(self.tree, tuple(factor * s for s in self.slices))

    def max_abs_difference(self, other: AdaptedProcess) -> float:
        """Largest slicewise deviation from ``other``."""
        self._check_same_tree(other)
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.slices, other.slices))

    def to_lists(self) -> list[list[float]]:
        return [s.tolist() for s in self.slices]

    def _check_same_tree(self, other: AdaptedProcess) -> None:
        if other.tree.level_sizes != self.tree.level_sizes:
            raise StructureError("Processes live on different trees")


class ProcessKind(Enum):
    """Classification relative to a measure family."""

    MARTINGALE = "martingale"
    SUPERMARTINGALE = "supermartingale"
    NEITHER = "neither"


@dataclass
class Witness:
    """First one-step violation: E^{P_measure}{f_level | parent} > f_{level-1}(parent)."""

    measure: int
    level: int
    parent: Atom
    conditional: float
    previous: float

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "level": self.level,
            "parent": list(self.parent),
            "conditional": rounded(self.conditional),
            "previous": rounded(self.previous),
        }


@dataclass
class Classification:
    """Result of ``classify``."""

    kind: ProcessKind
    witness: Optional[Witness] = None
    multi_step_checked: bool = False

    @property
    def is_supermartingale(self) -> bool:
        """True for supermartingales, martingales included."""
        return self.kind != ProcessKind.NEITHER

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "witness": self.witness.to_dict() if self.witness else None,
            "multi_step_checked": self.multi_step_checked,
        }


def _check_family_tree(family: MeasureFamily, f: AdaptedProcess) -> None:
    if f.tree.level_sizes != family.tree.level_sizes or f.tree.children != family.tree.children:
        raise StructureError("Process and measure family live on different trees")


def classify(
    family: MeasureFamily,
    f: AdaptedProcess,
    tolerance: Optional[float] = None,
) -> Classification:
    """
    Classify ``f`` as martingale, supermartingale or neither for the family.

    One-step conditions E^{P_i}{f_m | F_{m-1}} <= f_{m-1} are checked for
    every extreme measure; equality throughout means martingale. The first
    violation (ordered by level, measure, atom) is returned as the witness.
    On trees of depth at most 3 every multi-step condition is recomputed
    directly from the leaves as an oracle.

    Raises:
        StructureError: If ``f`` does not live on the family's tree.
        ConsistencyError: If the one-step verdict and the multi-step oracle disagree.
    """
    _check_family_tree(family, f)
    tol = family.tolerances.inequality if tolerance is None else tolerance
    tree = family.tree
    martingale = True

    for m in range(1, tree.depth + 1):
        for i in range(family.k):
            conditional = cond_exp_values(family, i, f[m], m, m - 1)
            excess = conditional - f[m - 1]
            bad = np.flatnonzero(excess > tol)
            if bad.size:
                s = int(bad[0])
                witness = Witness(i, m, Atom(m - 1, s), float(conditional[s]), float(f[m - 1][s]))
                logger.debug("Classified as neither; witness %s", witness)
                return Classification(ProcessKind.NEITHER, witness)
            if (excess < -tol).any():
                martingale = False

    kind = ProcessKind.MARTINGALE if martingale else ProcessKind.SUPERMARTINGALE
    checked = tree.depth <= MULTI_STEP_MAX_DEPTH
    if checked:
        _multi_step_oracle(family, f, kind, tol)
    return Classification(kind, multi_step_checked=checked)


def _multi_step_oracle(family: MeasureFamily, f: AdaptedProcess, kind: ProcessKind, tol: float):
    tree = family.tree
    for m in range(2, tree.depth + 1):
        lifted = tree.lift(f[m], m, tree.depth)
        for k in range(m - 1):
            allowed = tol * (m - k)
            for i in range(family.k):
                conditional = cond_exp_values(family, i, lifted, tree.depth, k)
                excess = conditional - f[k]
                if excess.max() > allowed:
                    raise ConsistencyError(f"multi-step condition E[f_{m}|F_{k}]", float(excess.max()))
                if kind == ProcessKind.MARTINGALE and np.abs(excess).max() > allowed:
                    raise ConsistencyError(f"multi-step equality E[f_{m}|F_{k}]", float(np.abs(excess).max()))


def is_supermartingale_for_mixtures(
    family: MeasureFamily,
    f: AdaptedProcess,
    samples: int = 50,
    seed: int = 0,
) -> bool:
    """
    Check the supermartingale inequalities under randomly sampled mixtures.

    Mixtures of measures under which ``f`` is a supermartingale keep the
    property; this samples the convex hull rather than relying on vertices.
    """
    _check_family_tree(family, f)
    tree = family.tree
    tol = family.tolerances.inequality
    rng = np.random.default_rng(seed)
    for weights in sample_weights(rng, family.k, size=samples):
        row = weights @ family.leaf_probabilities
        for m in range(1, tree.depth + 1):
            if (expect_under(tree, row, f[m], m, m - 1) - f[m - 1] > tol).any():
                return False
    return True


def stop(f: AdaptedProcess, level: int) -> AdaptedProcess:
    """
    The process stopped at the deterministic time ``level``.

    Slices after ``level`` repeat the level-``level`` values on descendants.

    Raises:
        StoppingLevelError: If ``level`` is outside 0..depth.
    """
    tree = f.tree
    if not 0 <= level <= tree.depth:
        raise StoppingLevelError(level, tree.depth)
    slices = [f[m] if m <= level else tree.lift(f[level], level, m) for m in range(tree.depth + 1)]
    return AdaptedProcess(tree, tuple(slices))


def martingale_of(family: MeasureFamily, measure_index: int, xi) -> AdaptedProcess:
    """The martingale E^{P_i}{xi | F_m}, m = 0..N."""
    tree = family.tree
    values = leaf_values(tree, xi)
    return AdaptedProcess(tree, tuple(
        cond_exp_values(family, measure_index, values, tree.depth, m)
        for m in range(tree.depth + 1)
    ))


def expectations(family: MeasureFamily, f: AdaptedProcess) -> np.ndarray:
    """Array (k, N+1) of E^{P_i} f_m."""
    _check_family_tree(family, f)
    return np.array([
        [float(cond_exp_values(family, i, f[m], m, 0)[0]) for m in range(f.depth + 1)]
        for i in range(family.k)
    ])


@dataclass
class ExpectationCriterion:
    """Equal-expectation martingale criterion versus direct classification."""

    equal_expectations: bool
    classified: ProcessKind
    predicts_martingale: bool
    consistent: bool

    def to_dict(self) -> dict:
        return {
            "equal_expectations": self.equal_expectations,
            "classified": self.classified.value,
            "predicts_martingale": self.predicts_martingale,
            "consistent": self.consistent,
        }


def equal_expectation_criterion(family: MeasureFamily, f: AdaptedProcess) -> ExpectationCriterion:
    """
    A supermartingale for the family with E^{P_i} f_m = f_0 for all m and i
    is a martingale; compare that prediction with ``classify``.
    """
    classification = classify(family, f)
    values = expectations(family, f)
    equal = bool(np.all(np.abs(values - f[0][0]) <= family.tolerances.inequality))
    predicts = equal and classification.is_supermartingale
    is_martingale = classification.kind == ProcessKind.MARTINGALE
    return ExpectationCriterion(
        equal_expectations=equal,
        classified=classification.kind,
        predicts_martingale=predicts,
        consistent=(not predicts) or is_martingale,
    )


@dataclass
class DriftBoundReport:
    """Result of ``check_drift_bound``."""

    status: CheckStatus
    level: int
    drift_factor: float
    eps_bar: float
    trials: int
    seed: int
    min_margin: Optional[float] = None
    worst_atom: Optional[Atom] = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return rounded({
            "status": self.status,
            "level": self.level,
            "drift_factor": self.drift_factor,
            "eps_bar": self.eps_bar,
            "trials": self.trials,
            "seed": self.seed,
            "min_margin": self.min_margin,
            "worst_atom": list(self.worst_atom) if self.worst_atom else None,
            "notes": self.notes,
        })


def check_drift_bound(
    family: MeasureFamily,
    f: AdaptedProcess,
    level: int,
    phi: Sequence[float],
    trials: int = 200,
    seed: int = 0,
    base: int = 0,
) -> DriftBoundReport:
    """
    Check that a base-measure drift survives mixing with weight up to eps_bar.

    If f is a supermartingale for the family and
    f_{m-1} - E^{P_base}{f_m | F_{m-1}} >= phi on every atom, then for every
    Q = (1 - alpha) P_base + alpha P with alpha in [0, eps_bar] and P in the
    family, f_{m-1} - E^Q{f_m | F_{m-1}} >= l/(1+L) * phi. The first k
    samples put alpha = eps_bar on each vertex; the rest are random.

    Args:
        family: The measure family.
        f: The process.
        level: The step m (1..N) whose drift is tested.
        phi: Lower bound of the base drift, one value per atom of level m-1.
        trials: Number of sampled Q.
        seed: Seed for the sampler.
        base: Index of the base measure.

    Returns:
        DriftBoundReport; unmet preconditions give status ``untestable``.
    """
    _check_family_tree(family, f)
    tree = family.tree
    if not 1 <= level <= tree.depth:
        raise StructureError(f"Drift level {level} outside 1..{tree.depth}")
    phi = np.asarray(phi, dtype=float).reshape(-1)
    if phi.size != tree.level_sizes[level - 1]:
        raise StructureError(
            f"phi has {phi.size} values, level {level - 1} has {tree.level_sizes[level - 1]} atoms"
        )
    base = family.check_measure(base)
    tol = family.tolerances.inequality
    bounds = equivalence_bounds(family)
    report = DriftBoundReport(
        status=CheckStatus.PASS,
        level=level,
        drift_factor=bounds.drift_factor,
        eps_bar=bounds.eps_bar,
        trials=trials,
        seed=seed,
    )

    if not classify(family, f).is_supermartingale:
        report.status = CheckStatus.UNTESTABLE
        report.notes.append("process is not a supermartingale for the family")
        return report
    if (phi < -tol).any():
        report.status = CheckStatus.UNTESTABLE
        report.notes.append("phi has negative entries")
        return report
    base_drift = f[level - 1] - cond_exp_values(family, base, f[level], level, level - 1)
    if (base_drift < phi - tol).any():
        report.status = CheckStatus.UNTESTABLE
        report.notes.append("base drift does not dominate phi")
        return report
    if not (phi > tol).any():
        report.notes.append("zero right-hand side")

    rng = np.random.default_rng(seed)
    rows = family.leaf_probabilities
    target = bounds.drift_factor * phi
    worst = np.inf
    worst_atom = None
    for t in range(trials):
        if t < family.k:
            alpha, other = bounds.eps_bar, rows[t]
        else:
            alpha = rng.uniform(0.0, bounds.eps_bar)
            other = sample_weights(rng, family.k) @ rows
        q = (1.0 - alpha) * rows[base] + alpha * other
        deficit = f[level - 1] - expect_under(tree, q, f[level], level, level - 1)
        margin = deficit - target
        s = int(np.argmin(margin))
        if margin[s] < worst:
            worst, worst_atom = float(margin[s]), Atom(level - 1, s)

    report.min_margin = worst if trials else None
    report.worst_atom = worst_atom
    if trials and worst < -tol:
        report.status = CheckStatus.FAIL
    logger.info("Drift bound at level %d: %s (min margin %.3e)", level, report.status.value, worst)
    return report
