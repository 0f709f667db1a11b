"""
Optional Doob Core - Normalized Densities and Class K

The set G0 of nonnegative variables with expectation one under every
measure of the family, the martingales they generate, the generators
h_m = f_m * E{xi | F_m} of local regular supermartingales, their
nonnegative combinations, and the representation of a nonnegative
regular supermartingale through an element of G0 and a nonincreasing
process.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cone_solver import ConeSolver, ConeSystem, SolutionFamily, combine
from .decomposition import (
    OptionalDecomposition,
    RegularityReport,
    cumulate,
    decompose,
    martingale_defect,
    test_regularity,
)
from .exceptions import (
    ConsistencyError,
    DegenerateInputError,
    NotRegularError,
    PreconditionError,
    StructureError,
)
from .filtration import Atom
from .logging import get_logger
from .measures import MeasureFamily, check_condition_B
from .processes import AdaptedProcess, ProcessKind, classify, martingale_of
from .reports import rounded

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class GZeroElement:
    """
    A nonnegative F_level-measurable xi with E^{P_i} xi = 1 for every i.

    Build through ``g0_element`` so that the moment identities are checked.
    """

    level: int
    values: np.ndarray
    gamma: Optional[tuple[float, ...]] = None
    basis_indices: Optional[tuple[int, ...]] = None

    def leaf_values(self, family: MeasureFamily) -> np.ndarray:
        """xi on the leaves of the family's tree."""
        return family.tree.lift(self.values, self.level, family.tree.depth)

    def to_dict(self) -> dict:
        return rounded({
            "level": self.level,
            "values": self.values,
            "gamma": list(self.gamma) if self.gamma is not None else None,
            "basis_indices": list(self.basis_indices) if self.basis_indices is not None else None,
        })


def moment_residual(family: MeasureFamily, level: int, values: np.ndarray) -> float:
    """max_i |sum_j P_i(A_j) xi_j - 1| over the measures."""
    return float(np.max(np.abs(family.level_probabilities(level) @ values - 1.0)))


def g0_element(
    family: MeasureFamily,
    level: int,
    values: Sequence[float],
    gamma: Optional[Sequence[float]] = None,
    basis_indices: Optional[Sequence[int]] = None,
) -> GZeroElement:
    """
    Validate and wrap an element of G0.

    Raises:
        StructureError: Wrong number of values for the level.
        PreconditionError: Negative value or a measure with expectation other than one.
    """
    tree = family.tree
    tree.atoms(level)
    values = np.array(values, dtype=float).reshape(-1)
    if values.size != tree.level_sizes[level]:
        raise StructureError(
            f"Level {level} has {tree.level_sizes[level]} atoms, got {values.size} values"
        )
    tol = family.tolerances
    if (values < -tol.input).any():
        position = int(np.flatnonzero(values < -tol.input)[0])
        raise PreconditionError("G0 element must be nonnegative", Atom(level, position))
    residual = moment_residual(family, level, values)
    if residual > tol.residual:
        expectations = family.level_probabilities(level) @ values
        raise PreconditionError(f"expectations {expectations.round(12).tolist()} are not all one")

    values = np.clip(values, 0.0, None)
    values.setflags(write=False)
    return GZeroElement(
        level=level,
        values=values,
        gamma=tuple(float(g) for g in gamma) if gamma is not None else None,
        basis_indices=tuple(int(i) for i in basis_indices) if basis_indices is not None else None,
    )


@dataclass
class GZeroFamily:
    """Basic solutions of the normalization system at one level, as G0 elements."""

    level: int
    solutions: SolutionFamily
    elements: list[GZeroElement]

    def element(self, gamma: Sequence[float], family: MeasureFamily) -> GZeroElement:
        """The G0 element ``combine(solutions, gamma)``."""
        combined = combine(self.solutions, gamma)
        return g0_element(family, self.level, combined.vector, gamma, self.solutions.basis_indices)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "solution_family": self.solutions.to_dict(),
            "elements": [e.to_dict() for e in self.elements],
        }


def solve_g0(family: MeasureFamily, level: int) -> GZeroFamily:
    """
    Solve sum_j P_i(A_j) xi_j = 1 (i = 0..k-1) over the atoms of ``level``.

    Raises:
        ConeMembershipError: If the all-ones target is not strictly inside
            the cone of any basis.
    """
    family.tree.atoms(level)
    system = ConeSystem(family.level_probabilities(level), np.ones(family.k), family.tolerances)
    solutions = ConeSolver().solve(system)
    elements = [
        g0_element(family, level, row, basis_indices=solutions.basis_indices)
        for row in solutions.basic_solutions
    ]
    logger.info(
        "G0 at level %d: rank %d, %d basic solutions", level, solutions.rank, len(elements)
    )
    return GZeroFamily(level=level, solutions=solutions, elements=elements)


@dataclass
class XiMartingale:
    """
    E^{P_0}{xi | F_m} together with its cross-measure deviation.

    The process is asserted measure independent when the domination
    condition holds; otherwise the deviation is only reported.
    """

    process: AdaptedProcess
    deviation: float
    measure_independent: bool
    condition_b: bool
    kind: ProcessKind

    def to_dict(self) -> dict:
        return rounded({
            "process": self.process.to_lists(),
            "deviation": self.deviation,
            "measure_independent": self.measure_independent,
            "condition_b": self.condition_b,
            "classification": self.kind,
        })


def martingale_from_xi(family: MeasureFamily, xi: GZeroElement) -> XiMartingale:
    """
    The martingale generated by an element of G0.

    Raises:
        ConsistencyError: If the domination condition holds and the
            conditional expectations still depend on the measure.
    """
    leaves = xi.leaf_values(family)
    processes = [martingale_of(family, i, leaves) for i in range(family.k)]
    base = processes[0]
    deviation = max((p.max_abs_difference(base) for p in processes[1:]), default=0.0)
    tol = family.tolerances.residual * max(1.0, float(np.max(np.abs(leaves))))
    independent = deviation <= tol
    condition_b = check_condition_B(family).passed

    if condition_b and not independent:
        raise ConsistencyError("measure-independent martingale of a G0 element", deviation)
    if not independent:
        logger.info("Martingale of xi depends on the measure (deviation %.3e)", deviation)
    return XiMartingale(
        process=base,
        deviation=deviation,
        measure_independent=independent,
        condition_b=condition_b,
        kind=classify(family, base, tol).kind,
    )


def check_nonincreasing(f: AdaptedProcess, tolerance: float) -> None:
    """
    Raises:
        PreconditionError: Naming the first atom whose value exceeds its parent's.
    """
    tree = f.tree
    for m in range(1, tree.depth + 1):
        excess = f[m] - tree.lift(f[m - 1], m - 1, m)
        bad = np.flatnonzero(excess > tolerance)
        if bad.size:
            raise PreconditionError("process increases along a path", Atom(m, int(bad[0])))


@dataclass
class Generator:
    """
    h_m = f_m * E{xi | F_m} with increments (f_{m-1} - f_m) * E{xi | F_m}.

    ``martingale_part`` is h plus the cumulative increments;
    ``decomposition`` is the independent decomposition of h, or None
    when h is not regular.
    """

    process: AdaptedProcess
    increments: AdaptedProcess
    martingale_part: AdaptedProcess
    martingale_verified: bool
    xi_martingale: XiMartingale
    decomposition: Optional[OptionalDecomposition] = None

    def to_dict(self) -> dict:
        return rounded({
            "process": self.process.to_lists(),
            "increments": self.increments.to_lists(),
            "martingale_part": self.martingale_part.to_lists(),
            "martingale_verified": self.martingale_verified,
            "regular": self.decomposition is not None,
        })


def local_regular_generator(
    family: MeasureFamily,
    f: AdaptedProcess,
    xi: GZeroElement,
) -> Generator:
    """
    The generator h = f * E{xi | F} of a nonincreasing f and xi in G0.

    Raises:
        PreconditionError: If f increases from some atom's parent to the atom.
        ConsistencyError: If the martingale of xi is measure independent but
            h fails to decompose or the increment formula does not give a martingale.
    """
    tree = family.tree
    tol = family.tolerances
    check_nonincreasing(f, tol.input)
    xi_martingale = martingale_from_xi(family, xi)
    density = xi_martingale.process

    process = AdaptedProcess(tree, tuple(f[m] * density[m] for m in range(tree.depth + 1)))
    increments = AdaptedProcess(tree, (np.zeros(1),) + tuple(
        (tree.lift(f[m - 1], m - 1, m) - f[m]) * density[m] for m in range(1, tree.depth + 1)
    ))
    martingale = process + cumulate(increments)
    scale = max(1.0, max(float(np.max(np.abs(s))) for s in martingale.slices))
    verified = classify(family, martingale, tol.residual * scale).kind == ProcessKind.MARTINGALE

    try:
        decomposition: Optional[OptionalDecomposition] = decompose(family, process)
    except NotRegularError:
        decomposition = None

    if xi_martingale.measure_independent and (decomposition is None or not verified):
        raise ConsistencyError("generator decomposition", martingale_defect(family, martingale))
    return Generator(
        process=process,
        increments=increments,
        martingale_part=martingale,
        martingale_verified=verified,
        xi_martingale=xi_martingale,
        decomposition=decomposition,
    )


@dataclass
class ClassKCombination:
    """sum_i C_i h_i with its regularity report."""

    process: AdaptedProcess
    coefficients: list[float]
    report: RegularityReport = field(repr=False)

    def to_dict(self) -> dict:
        return rounded({
            "process": self.process.to_lists(),
            "coefficients": self.coefficients,
            "regular": self.report.regular,
        })


def combine_class_k(
    family: MeasureFamily,
    terms: Sequence[tuple[float, AdaptedProcess]],
) -> ClassKCombination:
    """
    Nonnegative combination of generators, checked to be regular.

    Raises:
        PreconditionError: Empty term list or a negative coefficient.
        StructureError: Terms on different trees.
        NotRegularError: If the combination fails the regularity test.
    """
    if not terms:
        raise PreconditionError("class K combination needs at least one term")
    coefficients = []
    total: Optional[AdaptedProcess] = None
    for c, h in terms:
        c = float(c)
        if c < 0:
            raise PreconditionError(f"coefficient {c} is negative")
        coefficients.append(c)
        scaled = h.scale(c)
        total = scaled if total is None else total + scaled

    assert total is not None
    report = test_regularity(family, total)
    if not report.regular:
        raise NotRegularError(report)
    return ClassKCombination(process=total, coefficients=coefficients, report=report)


@dataclass
class Representation:
    """
    f = f_bar_1 + f_bar_2 with f_bar_1 = f_0 * E{xi | F} and f_bar_2 = -g nonincreasing.
    """

    xi: GZeroElement
    martingale_part: AdaptedProcess
    nonincreasing_part: AdaptedProcess
    decomposition: OptionalDecomposition
    reconstruction_error: float

    def to_dict(self) -> dict:
        return rounded({
            "xi": self.xi.to_dict(),
            "martingale_part": self.martingale_part.to_lists(),
            "nonincreasing_part": self.nonincreasing_part.to_lists(),
            "reconstruction_error": self.reconstruction_error,
        })


def represent_supermartingale(family: MeasureFamily, f: AdaptedProcess) -> Representation:
    """
    Represent a nonnegative regular supermartingale through G0.

    xi = (f_N + g_N) / f_0 on the leaves, at the truncation horizon N.

    Raises:
        PreconditionError: If f takes a negative value.
        DegenerateInputError: If f_0 = 0.
        NotRegularError: If f does not decompose.
        ConsistencyError: If xi misses G0 or the reconstruction fails.
    """
    tree = family.tree
    tol = family.tolerances
    for m in range(tree.depth + 1):
        negative = np.flatnonzero(f[m] < -tol.input)
        if negative.size:
            raise PreconditionError("process must be nonnegative", Atom(m, int(negative[0])))
    f0 = float(f[0][0])
    if f0 <= tol.input:
        raise DegenerateInputError("f_0 = 0 leaves the normalized density undefined")

    decomposition = decompose(family, f)
    horizon = tree.depth
    leaves = (f[horizon] + decomposition.cumulative[horizon]) / f0
    try:
        xi = g0_element(family, horizon, leaves)
    except PreconditionError as e:
        raise ConsistencyError("normalized terminal value in G0", moment_residual(family, horizon, leaves)) from e

    martingale = martingale_of(family, 0, leaves).scale(f0)
    nonincreasing = -decomposition.cumulative
    error = (martingale + nonincreasing).max_abs_difference(f)
    if error > tol.residual * max(1.0, f0):
        raise ConsistencyError("representation round trip", error)
    return Representation(
        xi=xi,
        martingale_part=martingale,
        nonincreasing_part=nonincreasing,
        decomposition=decomposition,
        reconstruction_error=error,
    )
