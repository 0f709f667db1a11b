"""
Optional Doob Core - Optional Decomposition

Constructive regularity test and the optional Doob decomposition
f = M - g of a supermartingale relative to a measure family.

For each step m and each parent atom A at level m-1 the increments of g
on the children of A must solve the moment system

    sum_j P_i(child_j | A) xi_j = f_{m-1}(A) - E^{P_i}{f_m | A},   i = 0..k-1,

with xi >= 0. The process is regular iff every such cell is feasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .conditional import RandomVariable, cond_exp_all, cond_exp_values, expect_under, leaf_values
from .cone_solver import (
    ConeSolver,
    ConeSystem,
    SolutionFamily,
    distance_to_feasibility,
    nonnegative_solution,
)
from .exceptions import ConeMembershipError, ConsistencyError, NotRegularError, PreconditionError
from .filtration import Atom
from .logging import get_logger
from .measures import MeasureFamily, check_condition_B, sample_weights
from .processes import AdaptedProcess, ProcessKind, classify, stop
from .reports import CheckStatus, rounded

logger = get_logger(__name__)


class CellStatus(Enum):
    """Verdict for one (step, parent atom) moment system."""

    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    NOT_SUPERMARTINGALE = "not_supermartingale"


class SolutionMethod(Enum):
    """How a feasible cell's increments were chosen."""

    ZERO = "zero"  # No drift
    CONSTANT = "constant"  # Same drift under every measure
    BASIC = "basic"  # Basis solution z_r of the solution family
    VERTEX = "vertex"  # Linear-programming vertex on the cone boundary


@dataclass
class CellResult:
    """
    One moment system of the regularity test.

    ``vectors`` has one column per child (a_j) and ``drift`` is a_0.
    """

    level: int
    parent: Atom
    children: tuple[int, ...]
    status: CellStatus
    drift: np.ndarray
    vectors: np.ndarray
    solution: Optional[np.ndarray] = None
    method: Optional[SolutionMethod] = None
    solution_family: Optional[SolutionFamily] = None

    @property
    def feasible(self) -> bool:
        return self.status == CellStatus.FEASIBLE

    def to_dict(self) -> dict:
        result = {
            "level": self.level,
            "parent": list(self.parent),
            "children": list(self.children),
            "status": self.status,
            "drift": self.drift,
            "method": self.method,
            "solution": self.solution,
            "basis_indices": (
                list(self.solution_family.basis_indices) if self.solution_family else None
            ),
        }
        if not self.feasible:
            result["vectors"] = self.vectors.T
        return rounded(result)


@dataclass
class RegularityReport:
    """
    Per-step, per-parent-atom feasibility verdicts.

    ``increments`` is filled only when every cell is feasible.
    """

    kind: ProcessKind
    cells: list[CellResult] = field(default_factory=list)
    increments: Optional[AdaptedProcess] = None

    @property
    def regular(self) -> bool:
        return all(c.feasible for c in self.cells)

    @property
    def failing_cells(self) -> list[CellResult]:
        return [c for c in self.cells if not c.feasible]

    def to_dict(self) -> dict:
        return {
            "classification": self.kind.value,
            "regular": self.regular,
            "failing_cells": [[c.level, list(c.parent)] for c in self.failing_cells],
            "cells": [c.to_dict() for c in self.cells],
        }


@dataclass
class OptionalDecomposition:
    """
    f = M - g with M a martingale for every measure and g nondecreasing, g_0 = 0.

    ``schedule`` lists the deterministic stopping levels and ``stopped_martingale``
    whether stop(M, s) is again a martingale for each of them.
    """

    process: AdaptedProcess
    martingale_part: AdaptedProcess
    increments: AdaptedProcess
    cumulative: AdaptedProcess
    schedule: tuple[int, ...]
    stopped_martingale: tuple[bool, ...]
    report: RegularityReport

    def to_dict(self) -> dict:
        return rounded({
            "process": self.process.to_lists(),
            "martingale_part": self.martingale_part.to_lists(),
            "increments": self.increments.to_lists(),
            "cumulative": self.cumulative.to_lists(),
            "schedule": list(self.schedule),
            "stopped_martingale": list(self.stopped_martingale),
        })


def _drifts(family: MeasureFamily, f: AdaptedProcess, m: int) -> np.ndarray:
    """Array (k, atoms at m-1) of f_{m-1} - E^{P_i}{f_m | F_{m-1}}."""
    return np.stack([
        f[m - 1] - cond_exp_values(family, i, f[m], m, m - 1) for i in range(family.k)
    ])


def _solve_cell(
    family: MeasureFamily,
    solver: ConeSolver,
    level: int,
    parent: int,
    children: tuple[int, ...],
    drift: np.ndarray,
    vectors: np.ndarray,
) -> CellResult:
    tol = family.tolerances
    cell = CellResult(level, Atom(level - 1, parent), children, CellStatus.INFEASIBLE, drift, vectors)

    if (drift < -tol.inequality).any():
        cell.status = CellStatus.NOT_SUPERMARTINGALE
        return cell

    if float(np.max(np.abs(drift))) <= tol.inequality:
        cell.solution, cell.method = np.zeros(len(children)), SolutionMethod.ZERO
    elif float(drift.max() - drift.min()) <= tol.inequality:
        # Each row of ``vectors`` sums to one
        cell.solution = np.full(len(children), float(drift.mean()))
        cell.method = SolutionMethod.CONSTANT
    else:
        system = ConeSystem(vectors, np.clip(drift, 0.0, None), tol)
        try:
            solutions = solver.solve(system)
            cell.solution = solutions.basic_solutions[0]
            cell.method = SolutionMethod.BASIC
            cell.solution_family = solutions
        except ConeMembershipError:
            vertex = nonnegative_solution(system)
            if vertex is not None:
                cell.solution, cell.method = vertex, SolutionMethod.VERTEX

    if cell.solution is not None:
        cell.status = CellStatus.FEASIBLE
    logger.debug(
        "Cell (level %d, %s): %s %s", level, cell.parent, cell.status.value,
        cell.solution.tolist() if cell.solution is not None else drift.tolist(),
    )
    return cell


def test_regularity(family: MeasureFamily, f: AdaptedProcess) -> RegularityReport:
    """
    Build and solve the moment system of every (step, parent atom) cell.

    Cells are solved independently and reported in level order, then by
    parent position. A cell with a negative drift component is reported as
    ``not_supermartingale`` rather than infeasible. When several
    nonnegative solutions exist the preference is: zero, constant, the
    basis solution z_r, an LP vertex.

    Returns:
        RegularityReport; ``increments`` holds the chosen xi on level-m atoms
        when the process is regular.
    """
    classification = classify(family, f)
    tree = family.tree
    solver = ConeSolver()
    report = RegularityReport(kind=classification.kind)
    slices = [np.zeros(1)]

    for m in range(1, tree.depth + 1):
        transitions = family.transition_probabilities(m)
        drifts = _drifts(family, f, m)
        increments = np.zeros(tree.level_sizes[m])
        for s, kids in enumerate(tree.children[m - 1]):
            kids = tuple(kids)
            cell = _solve_cell(
                family, solver, m, s, kids, drifts[:, s], transitions[:, list(kids)]
            )
            report.cells.append(cell)
            if cell.solution is not None:
                increments[list(kids)] = cell.solution
        slices.append(increments)

    if report.regular:
        report.increments = AdaptedProcess(tree, tuple(slices))
    logger.info(
        "Regularity test: %s, %d/%d cells feasible",
        "regular" if report.regular else "not regular",
        sum(c.feasible for c in report.cells), len(report.cells),
    )
    return report


# not a pytest test
test_regularity.__test__ = False  # type: ignore[attr-defined]


def cumulate(increments: AdaptedProcess) -> AdaptedProcess:
    """g_m = sum over i <= m of the increments, lifted to level-m atoms."""
    tree = increments.tree
    slices = [np.asarray(increments[0], dtype=float)]
    for m in range(1, tree.depth + 1):
        slices.append(tree.lift(slices[-1], m - 1, m) + increments[m])
    return AdaptedProcess(tree, tuple(slices))


def decompose(family: MeasureFamily, f: AdaptedProcess) -> OptionalDecomposition:
    """
    Optional Doob decomposition f = M - g.

    Raises:
        NotRegularError: Carrying the regularity report when some cell fails.
        ConsistencyError: If M = f + g is not a martingale for every measure.
    """
    report = test_regularity(family, f)
    if not report.regular or report.increments is None:
        raise NotRegularError(report)

    increments = report.increments
    cumulative = cumulate(increments)
    martingale = f + cumulative

    kind = classify(family, martingale, family.tolerances.residual * max(1.0, _scale(f))).kind
    if kind != ProcessKind.MARTINGALE:
        raise ConsistencyError("martingale part of the decomposition", martingale_defect(family, martingale))

    schedule = tuple(range(1, f.depth + 1))
    stopped = tuple(
        classify(family, stop(martingale, s), family.tolerances.residual * max(1.0, _scale(f))).kind
        == ProcessKind.MARTINGALE
        for s in schedule
    )
    logger.info("Decomposed process of depth %d; max increment %.6g", f.depth, _scale(increments))
    return OptionalDecomposition(
        process=f,
        martingale_part=martingale,
        increments=increments,
        cumulative=cumulative,
        schedule=schedule,
        stopped_martingale=stopped,
        report=report,
    )


def _scale(f: AdaptedProcess) -> float:
    return max(float(np.max(np.abs(s))) for s in f.slices)


def martingale_defect(family: MeasureFamily, martingale: AdaptedProcess) -> float:
    """Largest |f_{m-1} - E^{P_i}{f_m | F_{m-1}}| over steps, measures and atoms."""
    return max(
        float(np.max(np.abs(_drifts(family, martingale, m)))) for m in range(1, martingale.depth + 1)
    )


def psi_residuals(
    family: MeasureFamily,
    decomposition: OptionalDecomposition,
    measure_index: int,
) -> AdaptedProcess:
    """
    Psi_m = (g_m - g_{m-1}) - E^{P_j}{g_m - g_{m-1} | F_{m-1}}, with Psi_0 = 0.

    Asserts E^{P_j}{Psi_m | F_{m-1}} = 0 and
    g_m - g_{m-1} = f_{m-1} - E^{P_j}{f_m | F_{m-1}} + Psi_m atomwise.

    Raises:
        ConsistencyError: If either identity fails.
    """
    j = family.check_measure(measure_index)
    tree = family.tree
    f = decomposition.process
    increments = decomposition.increments
    tol = family.tolerances
    scale = max(1.0, _scale(f), _scale(increments))

    slices = [np.zeros(1)]
    for m in range(1, tree.depth + 1):
        conditional = cond_exp_values(family, j, increments[m], m, m - 1)
        psi = increments[m] - tree.lift(conditional, m - 1, m)

        centred = float(np.max(np.abs(cond_exp_values(family, j, psi, m, m - 1))))
        if centred > tol.identity * scale:
            raise ConsistencyError(f"conditional mean of Psi_{m}", centred)

        drift = f[m - 1] - cond_exp_values(family, j, f[m], m, m - 1)
        gap = float(np.max(np.abs(increments[m] - tree.lift(drift, m - 1, m) - psi)))
        if gap > tol.residual * scale:
            raise ConsistencyError(f"increment identity at step {m}", gap)
        slices.append(psi)
    return AdaptedProcess(tree, tuple(slices))


def sup_process(family: MeasureFamily, xi) -> AdaptedProcess:
    """f_m = max_i E^{P_i}{xi | F_m}, m = 0..N."""
    tree = family.tree
    values = leaf_values(tree, xi)
    return AdaptedProcess(tree, tuple(
        cond_exp_all(family, values, m).max(axis=0) for m in range(tree.depth + 1)
    ))


@dataclass
class SupProcessVerdict:
    """
    Equal expectations of xi versus regularity of its upper-envelope process.

    Regularity always forces equal expectations; the converse is asserted
    only when the domination condition holds, otherwise it is reported.
    """

    status: CheckStatus
    expectations: np.ndarray
    equal_expectations: bool
    regular: bool
    zero_increments: bool
    condition_b: bool
    failing_cells: list[tuple[int, Atom]]

    @property
    def iff_holds(self) -> bool:
        return self.equal_expectations == (self.regular and self.zero_increments)

    def to_dict(self) -> dict:
        return rounded({
            "status": self.status,
            "expectations": self.expectations,
            "equal_expectations": self.equal_expectations,
            "regular": self.regular,
            "zero_increments": self.zero_increments,
            "condition_b": self.condition_b,
            "iff_holds": self.iff_holds,
            "failing_cells": [[level, list(atom)] for level, atom in self.failing_cells],
        })


def check_sup_process_regularity(family: MeasureFamily, xi) -> SupProcessVerdict:
    """
    Compare "all E^{P_i} xi are equal" with "the upper-envelope process of xi
    decomposes with g = 0".

    Raises:
        PreconditionError: If xi has a negative value.
    """
    values = leaf_values(family.tree, xi.values if isinstance(xi, RandomVariable) else xi)
    tol = family.tolerances
    if (values < -tol.input).any():
        leaf = int(np.flatnonzero(values < -tol.input)[0])
        raise PreconditionError("xi must be nonnegative", Atom(family.tree.depth, leaf))

    means = cond_exp_all(family, values, 0)[:, 0]
    equal = bool(means.max() - means.min() <= tol.inequality * max(1.0, float(np.abs(means).max())))
    report = test_regularity(family, sup_process(family, values))
    zero = report.regular and report.increments is not None and all(
        float(np.max(np.abs(s))) <= tol.residual for s in report.increments.slices
    )
    condition_b = check_condition_B(family).passed

    regular_and_flat = report.regular and zero
    if regular_and_flat and not equal:
        status = CheckStatus.FAIL
    elif condition_b:
        status = CheckStatus.PASS if equal == regular_and_flat else CheckStatus.FAIL
    else:
        status = CheckStatus.PASS if equal == regular_and_flat else CheckStatus.HYPOTHESIS_FAILS
    return SupProcessVerdict(
        status=status,
        expectations=means,
        equal_expectations=equal,
        regular=report.regular,
        zero_increments=bool(zero),
        condition_b=condition_b,
        failing_cells=[(c.level, c.parent) for c in report.failing_cells],
    )


def check_martingale_equalities(
    family: MeasureFamily,
    decomposition: OptionalDecomposition,
    samples: int = 100,
    seed: int = 0,
) -> float:
    """
    Largest deviation of E^Q{f_m + g_m | F_k} from f_k + g_k over k <= m.

    Q runs over the vertices and ``samples`` random mixtures of the family.
    """
    tree = family.tree
    martingale = decomposition.martingale_part
    rng = np.random.default_rng(seed)
    rows = np.vstack([family.leaf_probabilities, sample_weights(rng, family.k, size=samples) @ family.leaf_probabilities])

    deviation = 0.0
    for row in rows:
        for m in range(1, tree.depth + 1):
            for k in range(m):
                conditional = expect_under(tree, row, martingale[m], m, k)
                deviation = max(deviation, float(np.max(np.abs(conditional - martingale[k]))))
    return deviation


def check_stopped_regularity(family: MeasureFamily, f: AdaptedProcess) -> list[bool]:
    """Regularity of stop(f, s) for s = 1..N."""
    return [test_regularity(family, stop(f, s)).regular for s in range(1, f.depth + 1)]


class OracleAgreement(Enum):
    """Agreement between the solver verdict and the lattice search."""

    AGREE = "agree"
    NEAR_BOUNDARY = "near_boundary"
    DISAGREE = "disagree"


@dataclass
class OracleCell:
    """Lattice comparison for one supermartingale cell."""

    level: int
    parent: Atom
    solver_feasible: bool
    lattice_residual: float
    distance: float
    agreement: OracleAgreement


def _lattice_residual(vectors: np.ndarray, target: np.ndarray, step: float) -> float:
    """
    Smallest max-norm residual over xi on the lattice step * N^c.

    All coordinates but the last are enumerated up to the largest value any
    nonnegative solution can take. The residual is convex and piecewise
    linear in the last coordinate, so its lattice minimum sits next to a
    breakpoint: a row's exact fit or a crossing of two rows.
    """
    k, c = vectors.shape
    caps = []
    for j in range(c - 1):
        positive = vectors[:, j] > 0
        cap = float(np.min(target[positive] / vectors[positive, j])) if positive.any() else 0.0
        caps.append(int(np.ceil(max(cap, 0.0) / step)) + 1)

    if c > 1:
        grids = np.meshgrid(*[np.arange(n + 1) * step for n in caps], indexing="ij")
        free = np.stack([g.reshape(-1) for g in grids], axis=1)
        offsets = free @ vectors[:, :-1].T - target[None, :]
    else:
        offsets = -target[None, :]

    last = vectors[:, -1]
    breakpoints = [np.zeros(offsets.shape[0])]
    for i in range(k):
        if last[i] > 0:
            breakpoints.append(-offsets[:, i] / last[i])
        for other in range(i + 1, k):
            for sign in (1.0, -1.0):
                denominator = last[i] - sign * last[other]
                if abs(denominator) > 1e-15:
                    breakpoints.append((sign * offsets[:, other] - offsets[:, i]) / denominator)

    best = np.inf
    for point in breakpoints:
        point = np.clip(point, 0.0, None)
        for values in (np.floor(point / step) * step, np.ceil(point / step) * step):
            residual = np.abs(offsets + values[:, None] * last[None, :]).max(axis=1)
            best = min(best, float(residual.min()))
    return best


def lattice_oracle(
    family: MeasureFamily,
    f: AdaptedProcess,
    step: float = 1.0 / 64,
) -> list[OracleCell]:
    """
    Cross-check every supermartingale cell of ``test_regularity`` by lattice search.

    A lattice point within ``step / 2`` of the target exists whenever an exact
    nonnegative solution exists. Solver-infeasible cells where the lattice
    still comes that close are accepted only if the exact distance to
    feasibility is within one lattice step.
    """
    report = test_regularity(family, f)
    results = []
    for cell in report.cells:
        if cell.status == CellStatus.NOT_SUPERMARTINGALE:
            continue
        residual = _lattice_residual(cell.vectors, cell.drift, step)
        lattice_feasible = residual <= step / 2 + family.tolerances.inequality
        distance = 0.0 if cell.feasible else distance_to_feasibility(
            ConeSystem(cell.vectors, cell.drift, family.tolerances)
        )
        if cell.feasible == lattice_feasible:
            agreement = OracleAgreement.AGREE
        elif not cell.feasible and distance <= step:
            agreement = OracleAgreement.NEAR_BOUNDARY
        else:
            agreement = OracleAgreement.DISAGREE
        results.append(OracleCell(cell.level, cell.parent, cell.feasible, residual, distance, agreement))
    return results
