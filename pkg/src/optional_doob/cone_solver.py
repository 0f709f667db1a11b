"""
Optional Doob Core - Cone Solver

Nonnegative and strictly positive solutions of moment systems

    sum_j a_j xi_j = a_0,    a_j in R^k_{>=0},  j = 1..m.

Provides cone-interior membership by linear programming, dual bases for
linearly independent subsets, the finite family of basic nonnegative
solutions spanning every strictly positive solution, convex recombination
of that family, and bounded kernel directions of the homogeneous system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import (
    ConeMembershipError,
    ConsistencyError,
    NoKernelError,
    PreconditionError,
    SingularityError,
    StructureError,
    WeightError,
)
from .logging import LoggerMixin
from .reports import rounded

# HiGHS rejects feasibility tolerances below this value
_HIGHS_MIN_TOLERANCE = 1e-10


def numerical_rank(matrix: np.ndarray, cutoff: float = DEFAULT_TOLERANCES.rank_cutoff) -> int:
    """Rank with singular values below ``cutoff * max singular value`` treated as zero."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    singular = np.linalg.svd(matrix, compute_uv=False)
    if singular.size == 0 or singular[0] == 0:
        return 0
    return int(np.sum(singular > cutoff * singular[0]))


@dataclass(frozen=True, eq=False)
class ConeSystem:
    """
    Moment system with columns a_1..a_m and target a_0.

    Usage:
        system = ConeSystem.from_vectors([[0.5, 0.6], [0.5, 0.4]], [0.1, 0.12])
        system.rank     # 2
    """

    vectors: np.ndarray  # shape (k, m); column j is a_j
    target: np.ndarray  # shape (k,)
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=float, ndmin=2)
        target = np.array(self.target, dtype=float).reshape(-1)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise StructureError("A cone system needs at least one vector")
        if vectors.shape[0] != target.size:
            raise StructureError(
                f"Vectors have dimension {vectors.shape[0]}, target has {target.size}"
            )
        if not (np.isfinite(vectors).all() and np.isfinite(target).all()):
            raise StructureError("Cone system entries must be finite")
        if (vectors < -self.tolerances.input).any():
            raise PreconditionError("moment vectors must be componentwise nonnegative")
        vectors.setflags(write=False)
        target.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "target", target)

    @classmethod
    def from_vectors(
        cls,
        vectors: Sequence[Sequence[float]],
        target: Sequence[float],
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> ConeSystem:
        """Build from a list of vectors a_j (each of dimension k)."""
        return cls(np.array(vectors, dtype=float, ndmin=2).T, target, tolerances)

    @property
    def dimension(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def size(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def rank(self) -> int:
        return numerical_rank(self.vectors, self.tolerances.rank_cutoff)

    def residual(self, solution: np.ndarray) -> float:
        """Max-norm residual of the moment equations."""
        return float(np.max(np.abs(self.vectors @ np.asarray(solution, dtype=float) - self.target)))

    def residual_tolerance(self) -> float:
        return self.tolerances.residual * max(1.0, float(np.max(np.abs(self.target))))

    def to_dict(self) -> dict:
        return {"vectors": self.vectors.T.tolist(), "target": self.target.tolist()}


class MembershipStatus(Enum):
    """Position of the target relative to the cone of the vectors."""

    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass
class MembershipResult:
    """Verdict of ``cone_membership`` with its certificate."""

    status: MembershipStatus
    coefficients: Optional[np.ndarray] = None
    min_coefficient: Optional[float] = None

    def to_dict(self) -> dict:
        return rounded({
            "status": self.status,
            "coefficients": self.coefficients,
            "min_coefficient": self.min_coefficient,
        })


def _highs_options(tolerances: Tolerances) -> dict:
    tol = max(tolerances.feasibility, _HIGHS_MIN_TOLERANCE)
    return {"primal_feasibility_tolerance": tol, "dual_feasibility_tolerance": tol}


def cone_membership(
    target: Sequence[float],
    vectors: Sequence[Sequence[float]],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MembershipResult:
    """
    Decide whether ``target`` lies in the interior of the cone of ``vectors``.

    Maximizes delta subject to sum_j alpha_j a_j = a_0 and alpha_j >= delta,
    with delta capped at 1. Infeasible means outside; an optimal delta above
    the tolerance means interior (all coefficients strictly positive);
    otherwise boundary.
    """
    system = ConeSystem.from_vectors(vectors, target, tolerances)
    k, m = system.vectors.shape

    c = np.zeros(m + 1)
    c[-1] = -1.0  # maximize delta
    a_eq = np.hstack([system.vectors, np.zeros((k, 1))])
    a_ub = np.hstack([-np.eye(m), np.ones((m, 1))])  # delta - alpha_j <= 0
    res = linprog(
        c=c,
        A_ub=a_ub, b_ub=np.zeros(m),
        A_eq=a_eq, b_eq=system.target,
        bounds=[(0, None)] * m + [(0, 1)],
        method="highs",
        options=_highs_options(tolerances),
    )
    if not res.success:
        return MembershipResult(MembershipStatus.OUTSIDE)

    alpha = np.clip(res.x[:m], 0.0, None)
    delta = float(res.x[-1])
    status = (
        MembershipStatus.INTERIOR if delta > tolerances.feasibility else MembershipStatus.BOUNDARY
    )
    return MembershipResult(status, alpha, float(alpha.min()))


def nonnegative_solution(system: ConeSystem) -> Optional[np.ndarray]:
    """
    A basic nonnegative solution of the system, or None if none exists.

    Feasibility is decided by the HiGHS simplex with equality tolerance
    ``tolerances.feasibility``; the returned vertex is re-solved exactly on
    its support.
    """
    tol = system.tolerances.feasibility
    res = linprog(
        c=np.zeros(system.size),
        A_eq=system.vectors, b_eq=system.target,
        bounds=[(0, None)],
        method="highs",
        options=_highs_options(system.tolerances),
    )
    if not res.success:
        return None

    solution = np.clip(res.x, 0.0, None)
    support = solution > tol
    if support.any():
        refined = np.zeros_like(solution)
        refined[support] = np.linalg.lstsq(system.vectors[:, support], system.target, rcond=None)[0]
        if (refined >= -tol).all() and system.residual(refined) <= system.residual(solution):
            solution = np.clip(refined, 0.0, None)
    if system.residual(solution) > tol * max(1.0, float(np.max(np.abs(system.target)))):
        return None
    return solution


def dual_basis(basis: np.ndarray, tolerances: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Dual vectors of a linearly independent basis.

    Args:
        basis: Array (k, r) whose columns are a_1..a_r.

    Returns:
        Array (k, k) whose rows f_1..f_k satisfy <f_i, a_j> = delta_ij for
        i, j <= r and <f_i, a_j> = 0 for i > r. Rows r+1..k are an
        orthonormal basis of the orthogonal complement of the span.

    Raises:
        SingularityError: Naming the first column dependent on its predecessors.
    """
    basis = np.array(basis, dtype=float, ndmin=2)
    k, r = basis.shape
    for j in range(r):
        if j >= k or numerical_rank(basis[:, : j + 1], tolerances.rank_cutoff) < j + 1:
            raise SingularityError(j)

    head = np.linalg.pinv(basis)
    complement = null_space(basis.T, rcond=tolerances.rank_cutoff)
    duals = np.vstack([head, complement.T]) if complement.size else head

    expected = np.vstack([np.eye(r), np.zeros((k - r, r))])
    deviation = float(np.max(np.abs(duals @ basis - expected)))
    if deviation > tolerances.residual:
        raise ConsistencyError("dual basis biorthogonality", deviation)
    return duals


@dataclass
class GammaConstraint:
    """
    Strict inequality on mixing weights for the basis coordinate ``index``:

        constant - sum_i slopes[i] * gamma_i > 0
    """

    index: int
    constant: float
    slopes: dict[int, float] = field(default_factory=dict)

    def margin(self, weights: dict[int, float]) -> float:
        return self.constant - sum(s * weights.get(i, 0.0) for i, s in self.slopes.items())

    def to_dict(self) -> dict:
        return rounded({
            "index": self.index,
            "constant": self.constant,
            "slopes": {str(i): s for i, s in sorted(self.slopes.items())},
        })


@dataclass
class SolutionFamily:
    """
    Basic nonnegative solutions of a moment system.

    ``basic_solutions[0]`` is the basis solution z_r; row ``t + 1`` is the
    solution z_i for ``non_basis_indices[t]``, which moves the largest
    admissible amount ``y_star[i]`` onto a_i. Every strictly positive
    solution is ``combine(family, gamma)`` for suitable weights.
    """

    system: ConeSystem
    basis_indices: tuple[int, ...]
    duals: np.ndarray
    coefficients: np.ndarray
    non_basis_indices: tuple[int, ...]
    y_star: dict[int, float]
    unit_branch: list[int]
    basic_solutions: np.ndarray
    gamma_constraints: list[GammaConstraint]

    @property
    def rank(self) -> int:
        return len(self.basis_indices)

    def dual_coordinates(self, index: int) -> np.ndarray:
        """<a_index, f_l> for l = 1..r."""
        return self.duals[: self.rank] @ self.system.vectors[:, index]

    def to_dict(self) -> dict:
        return rounded({
            "system": self.system.to_dict(),
            "rank": self.rank,
            "basis_indices": list(self.basis_indices),
            "duals": self.duals,
            "coefficients": self.coefficients,
            "non_basis_indices": list(self.non_basis_indices),
            "y_star": {str(i): y for i, y in sorted(self.y_star.items())},
            "unit_branch": list(self.unit_branch),
            "basic_solutions": self.basic_solutions,
            "gamma_constraints": [g.to_dict() for g in self.gamma_constraints],
            "summability": "finite system",
        })


class ConeSolver(LoggerMixin):
    """
    Builds the solution family of a moment system.

    The basis is the lexicographically first set of ``rank`` linearly
    independent columns in whose open cone the target lies.

    Usage:
        solver = ConeSolver()
        family = solver.solve(ConeSystem.from_vectors(vectors, target))
    """

    def select_basis(self, system: ConeSystem) -> tuple[tuple[int, ...], np.ndarray]:
        """
        Return the basis indices and the target's coordinates in that basis.

        Raises:
            ConeMembershipError: Target outside the span, or not strictly inside
                the cone of any independent subset.
        """
        tol = system.tolerances
        r = system.rank
        if r == 0:
            raise ConeMembershipError("all moment vectors are zero")

        coords = np.linalg.lstsq(system.vectors, system.target, rcond=None)[0]
        if system.residual(coords) > system.residual_tolerance():
            raise ConeMembershipError("target is outside the span of the moment vectors")

        first_margins: Optional[list[float]] = None
        for combo in combinations(range(system.size), r):
            basis = system.vectors[:, combo]
            if numerical_rank(basis, tol.rank_cutoff) < r:
                continue
            coefficients = np.linalg.pinv(basis) @ system.target
            if first_margins is None:
                first_margins = coefficients.tolist()
            if coefficients.min() > tol.residual:
                return combo, coefficients
        raise ConeMembershipError(
            "target is not strictly inside the cone of any independent subset",
            first_margins,
        )

    def solve(self, system: ConeSystem, basis: Optional[Sequence[int]] = None) -> SolutionFamily:
        """
        Compute z_r, the z_i for every non-basis index, and the weight constraints.

        Args:
            system: The moment system.
            basis: Optional explicit basis indices; checked for independence and
                for strictly positive target coordinates.

        Raises:
            ConeMembershipError: No admissible basis, or the given one fails.
            SingularityError: Given basis is dependent.
        """
        tol = system.tolerances
        if basis is None:
            chosen, coefficients = self.select_basis(system)
        else:
            chosen = tuple(int(i) for i in basis)
            if len(chosen) != system.rank:
                raise ConeMembershipError(
                    f"basis has {len(chosen)} vectors, system rank is {system.rank}"
                )
            coefficients = dual_basis(system.vectors[:, chosen], tol)[: len(chosen)] @ system.target
            if coefficients.min() <= tol.residual:
                raise ConeMembershipError(
                    "target is not strictly inside the cone of the given basis",
                    coefficients.tolist(),
                )

        duals = dual_basis(system.vectors[:, chosen], tol)
        r = len(chosen)
        non_basis = tuple(i for i in range(system.size) if i not in chosen)

        z_basis = np.zeros(system.size)
        z_basis[list(chosen)] = coefficients
        solutions = [z_basis]
        y_star: dict[int, float] = {}
        unit_branch: list[int] = []
        slopes: dict[int, dict[int, float]] = {b: {} for b in range(r)}

        for i in non_basis:
            c = duals[:r] @ system.vectors[:, i]
            positive = c > tol.residual
            if positive.any():
                y = float(np.min(coefficients[positive] / c[positive]))
            else:
                y = 1.0
                unit_branch.append(i)
            z = np.zeros(system.size)
            z[list(chosen)] = coefficients - c * y
            z[i] = y
            z[np.abs(z) <= tol.residual] = 0.0
            solutions.append(z)
            y_star[i] = y
            for b in range(r):
                slopes[b][i] = y * float(c[b])

        stacked = np.vstack(solutions)
        self._verify(system, stacked)
        if unit_branch:
            self.logger.info("Non-basis vectors with no positive dual coordinate: %s", unit_branch)

        return SolutionFamily(
            system=system,
            basis_indices=tuple(chosen),
            duals=duals,
            coefficients=np.asarray(coefficients, dtype=float),
            non_basis_indices=non_basis,
            y_star=y_star,
            unit_branch=unit_branch,
            basic_solutions=stacked,
            gamma_constraints=[
                GammaConstraint(b, float(coefficients[b]), slopes[b]) for b in range(r)
            ],
        )

    @staticmethod
    def _verify(system: ConeSystem, stacked: np.ndarray) -> None:
        limit = system.residual_tolerance()
        for row in stacked:
            if (row < 0).any():
                raise ConsistencyError("basic solution nonnegativity", float(-row.min()))
            residual = system.residual(row)
            if residual > limit:
                raise ConsistencyError("basic solution residual", residual)
        rank = numerical_rank(stacked, system.tolerances.rank_cutoff)
        if rank != stacked.shape[0]:
            raise ConsistencyError("basic solution independence", float(stacked.shape[0] - rank))


def solve(system: ConeSystem, basis: Optional[Sequence[int]] = None) -> SolutionFamily:
    """Module-level shortcut for ``ConeSolver().solve``."""
    return ConeSolver().solve(system, basis)


@dataclass
class CombinedSolution:
    """Result of ``combine``."""

    vector: np.ndarray
    strictly_positive: bool
    residual: float
    margins: list[float]
    violations: list[tuple[int, float]]

    def to_dict(self) -> dict:
        return rounded({
            "vector": self.vector,
            "strictly_positive": self.strictly_positive,
            "residual": self.residual,
            "margins": self.margins,
            "violations": [list(v) for v in self.violations],
        })


def combine(family: SolutionFamily, gamma: Sequence[float]) -> CombinedSolution:
    """
    Convex recombination z = sum_i gamma_i z_i of the basic solutions.

    ``gamma[0]`` weights z_r and may take any sign; the remaining weights
    follow ``non_basis_indices`` and must be nonnegative. Weight-constraint
    violations (a margin that is not strictly positive) are reported with
    the basis coordinate and margin, not raised.

    Raises:
        WeightError: Wrong length, negative non-basis weight, or sum other than one.
        ConsistencyError: If the combination misses the moment equations.
    """
    weights = np.asarray(gamma, dtype=float)
    tol = family.system.tolerances
    if weights.shape != (family.basic_solutions.shape[0],):
        raise WeightError(gamma, f"expected {family.basic_solutions.shape[0]} weights")
    if not np.isfinite(weights).all():
        raise WeightError(gamma, "weights must be finite")
    if (weights[1:] < -tol.input).any():
        raise WeightError(gamma, "negative weight on a non-basis solution")
    if abs(weights.sum() - 1.0) > tol.input:
        raise WeightError(gamma, f"weights sum to {weights.sum()!r}")

    vector = weights @ family.basic_solutions
    residual = family.system.residual(vector)
    if residual > family.system.residual_tolerance():
        raise ConsistencyError("combined solution residual", residual)

    by_index = dict(zip(family.non_basis_indices, weights[1:].tolist()))
    margins = [g.margin(by_index) for g in family.gamma_constraints]
    violations = [(g.index, m) for g, m in zip(family.gamma_constraints, margins) if m <= tol.residual]
    strictly_positive = bool((vector > tol.residual).all() and (weights[1:] > tol.residual).all())
    return CombinedSolution(vector, strictly_positive, residual, margins, violations)


def gamma_for(family: SolutionFamily, solution: Sequence[float]) -> np.ndarray:
    """
    Weights reproducing a given solution through ``combine``.

    gamma_i = xi_i / y_i* on non-basis indices and the basis weight closes the sum.
    """
    solution = np.asarray(solution, dtype=float)
    tail = np.array([solution[i] / family.y_star[i] for i in family.non_basis_indices])
    return np.concatenate([[1.0 - tail.sum()], tail])


@dataclass
class HomogeneousSolution:
    """Bounded kernel direction and the nonnegative solution built from it."""

    direction: np.ndarray
    step: float
    solution: np.ndarray
    scale: float

    def to_dict(self) -> dict:
        return rounded({
            "direction": self.direction,
            "step": self.step,
            "solution": self.solution,
            "scale": self.scale,
        })


def homogeneous_solution(
    vectors: Sequence[Sequence[float]],
    target: Optional[Sequence[float]] = None,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> HomogeneousSolution:
    """
    Nonzero u with sum_j a_j u_j = 0, normalized to max |u_j| = 1.

    The largest-magnitude entry is made positive, so xi_j = 1 - t u_j stays
    nonnegative for t up to 1; ``step`` is that bound minus the safety
    margin. When ``target`` is given and sum_j a_j = c * target, ``solution``
    is (1 - t u) / c, a nonnegative solution of sum_j a_j xi_j = target;
    otherwise it solves the system with right-hand side sum_j a_j.

    Raises:
        NoKernelError: If the vectors are linearly independent.
        PreconditionError: If ``target`` is not proportional to sum_j a_j.
    """
    matrix = np.array(vectors, dtype=float, ndmin=2).T
    k, m = matrix.shape
    rank = numerical_rank(matrix, tolerances.rank_cutoff)
    if m <= rank:
        raise NoKernelError(rank, m)

    kernel = null_space(matrix, rcond=tolerances.rank_cutoff)
    direction = kernel[:, 0] / np.max(np.abs(kernel[:, 0]))
    if direction[int(np.argmax(np.abs(direction)))] < 0:
        direction = -direction
    step = 1.0 / float(direction.max()) - tolerances.homogeneous_margin

    scale = 1.0
    if target is not None:
        target_arr = np.asarray(target, dtype=float).reshape(-1)
        totals = matrix.sum(axis=1)
        norm = float(target_arr @ target_arr)
        if norm == 0:
            raise PreconditionError("target must be nonzero")
        scale = float(totals @ target_arr) / norm
        if scale <= 0 or np.max(np.abs(totals - scale * target_arr)) > tolerances.residual:
            raise PreconditionError("sum of moment vectors is not a positive multiple of the target")
    solution = (1.0 - step * direction) / scale
    return HomogeneousSolution(direction, step, solution, scale)


def distance_to_feasibility(system: ConeSystem) -> float:
    """min over xi >= 0 of max_i |(A xi - a_0)_i|, by linear programming."""
    k, m = system.vectors.shape
    c = np.zeros(m + 1)
    c[-1] = 1.0
    ones = np.ones((k, 1))
    a_ub = np.vstack([
        np.hstack([system.vectors, -ones]),  # A xi - t <= a_0
        np.hstack([-system.vectors, -ones]),  # -A xi - t <= -a_0
    ])
    b_ub = np.concatenate([system.target, -system.target])
    res = linprog(
        c=c, A_ub=a_ub, b_ub=b_ub,
        bounds=[(0, None)] * (m + 1),
        method="highs",
        options=_highs_options(system.tolerances),
    )
    if not res.success:
        raise ConsistencyError("feasibility distance program", float("nan"))
    return float(res.x[-1])
