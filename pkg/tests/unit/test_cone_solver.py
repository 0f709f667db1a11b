"""
Unit tests for cone membership, dual bases and solution families.
"""

import numpy as np
import pytest

from optional_doob.cone_solver import (
    ConeSolver,
    ConeSystem,
    MembershipStatus,
    combine,
    cone_membership,
    distance_to_feasibility,
    dual_basis,
    gamma_for,
    homogeneous_solution,
    nonnegative_solution,
    numerical_rank,
    solve,
)
from optional_doob.exceptions import (
    ConeMembershipError,
    NoKernelError,
    PreconditionError,
    SingularityError,
    StructureError,
    WeightError,
)

CONE_VECTORS = [[0.5, 0.6], [0.5, 0.4], [0.25, 0.25]]
CONE_TARGET = [1.0, 1.0]


@pytest.fixture
def cone_system() -> ConeSystem:
    return ConeSystem.from_vectors(CONE_VECTORS, CONE_TARGET)


@pytest.mark.unit
class TestConeSystem:
    """Tests for moment system validation."""

    def test_shape(self, cone_system):
        assert cone_system.dimension == 2
        assert cone_system.size == 3
        assert cone_system.rank == 2

    def test_negative_vector_rejected(self):
        with pytest.raises(PreconditionError):
            ConeSystem.from_vectors([[0.5, -0.1]], [1.0, 1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(StructureError):
            ConeSystem.from_vectors([[0.5, 0.5]], [1.0, 1.0, 1.0])

    def test_numerical_rank(self):
        assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
        assert numerical_rank(np.zeros((2, 2))) == 0


@pytest.mark.unit
class TestConeMembership:
    """Tests for the interior/boundary/outside verdict."""

    def test_interior(self):
        result = cone_membership(CONE_TARGET, CONE_VECTORS)
        assert result.status == MembershipStatus.INTERIOR
        assert result.min_coefficient > 0

    def test_outside(self):
        assert cone_membership([1.0, 0.0], CONE_VECTORS).status == MembershipStatus.OUTSIDE

    def test_boundary(self):
        result = cone_membership([1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]])
        assert result.status == MembershipStatus.BOUNDARY


@pytest.mark.unit
class TestDualBasis:
    """Tests for biorthogonal dual vectors."""

    def test_square_basis(self):
        duals = dual_basis(np.array([[0.5, 0.5], [0.6, 0.4]]))
        np.testing.assert_allclose(duals, [[-4.0, 5.0], [6.0, -5.0]])

    def test_complement_rows(self):
        basis = np.array([[1.0], [1.0]])
        duals = dual_basis(basis)
        assert duals.shape == (2, 2)
        np.testing.assert_allclose(duals @ basis, [[1.0], [0.0]], atol=1e-12)

    def test_dependent_column_named(self):
        with pytest.raises(SingularityError) as exc_info:
            dual_basis(np.array([[1.0, 2.0], [1.0, 2.0]]))
        assert exc_info.value.index == 1


@pytest.mark.unit
class TestSolutionFamily:
    """Tests for basis selection and basic nonnegative solutions."""

    def test_basis_and_coefficients(self, cone_system):
        family = solve(cone_system)
        assert family.basis_indices == (0, 1)
        np.testing.assert_allclose(family.coefficients, [1.0, 1.0])
        np.testing.assert_allclose(family.duals, [[-4.0, 5.0], [6.0, -5.0]])
        assert family.y_star == pytest.approx({2: 4.0})
        np.testing.assert_allclose(family.basic_solutions, [[1.0, 1.0, 0.0], [0.0, 0.0, 4.0]], atol=1e-12)

    def test_dual_coordinates(self, cone_system):
        np.testing.assert_allclose(solve(cone_system).dual_coordinates(2), [0.25, 0.25])

    def test_explicit_basis_on_boundary(self, cone_system):
        with pytest.raises(ConeMembershipError):
            ConeSolver().solve(cone_system, basis=(0, 2))
        with pytest.raises(ConeMembershipError):
            ConeSolver().solve(cone_system, basis=(1, 2))

    def test_explicit_basis_wrong_size(self, cone_system):
        with pytest.raises(ConeMembershipError):
            ConeSolver().solve(cone_system, basis=(0,))

    def test_explicit_dependent_basis(self):
        system = ConeSystem.from_vectors([[1.0, 1.0], [2.0, 2.0], [1.0, 0.0]], [2.0, 1.0])
        with pytest.raises(SingularityError):
            ConeSolver().solve(system, basis=(0, 1))

    def test_zero_vector_goes_to_unit_branch(self):
        system = ConeSystem.from_vectors([[0.5, 0.6], [0.5, 0.4], [0.0, 0.0]], CONE_TARGET)
        family = solve(system)
        assert family.unit_branch == [2]
        assert family.y_star[2] == 1.0

    def test_target_outside_span(self):
        system = ConeSystem.from_vectors([[1.0, 0.0], [2.0, 0.0]], [0.0, 1.0])
        with pytest.raises(ConeMembershipError):
            solve(system)

    def test_all_zero_vectors(self):
        with pytest.raises(ConeMembershipError):
            solve(ConeSystem.from_vectors([[0.0, 0.0]], [1.0, 1.0]))

    def test_no_positive_basis_carries_margins(self):
        system = ConeSystem.from_vectors([[0.5, 0.5], [0.6, 0.4]], [0.1, 0.12])
        with pytest.raises(ConeMembershipError) as exc_info:
            solve(system)
        # 0.5a + 0.6b = 0.1, 0.5a + 0.4b = 0.12
        assert exc_info.value.margins == pytest.approx([0.32, -0.1], abs=1e-12)

    def test_margins_come_from_first_independent_basis(self):
        """(0, 1) is dependent and skipped; (0, 2) gives (1, -1), (1, 2) gives (0.5, -1)."""
        system = ConeSystem.from_vectors([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]], [1.0, -1.0])
        with pytest.raises(ConeMembershipError) as exc_info:
            solve(system)
        assert exc_info.value.margins == pytest.approx([1.0, -1.0], abs=1e-12)

    def test_to_dict(self, cone_system):
        data = solve(cone_system).to_dict()
        assert data["rank"] == 2
        assert data["y_star"] == {"2": 4.0}


@pytest.mark.unit
class TestCombine:
    """Tests for convex recombination of basic solutions."""

    def test_interior_weights(self, cone_system):
        result = combine(solve(cone_system), [0.5, 0.5])
        np.testing.assert_allclose(result.vector, [0.5, 0.5, 2.0])
        assert result.strictly_positive
        assert result.violations == []

    def test_vertex_weights_report_violations(self, cone_system):
        result = combine(solve(cone_system), [0.0, 1.0])
        assert not result.strictly_positive
        assert [index for index, _ in result.violations] == [0, 1]

    def test_weights_validated(self, cone_system):
        family = solve(cone_system)
        with pytest.raises(WeightError):
            combine(family, [1.0])
        with pytest.raises(WeightError):
            combine(family, [1.5, -0.5])
        with pytest.raises(WeightError):
            combine(family, [0.5, 0.6])

    def test_negative_basis_weight_allowed(self, cone_system):
        result = combine(solve(cone_system), [-0.25, 1.25])
        assert result.residual < 1e-9

    def test_gamma_for(self, cone_system):
        np.testing.assert_allclose(gamma_for(solve(cone_system), [0.5, 0.5, 2.0]), [0.5, 0.5])


@pytest.mark.unit
class TestHomogeneousSolution:
    """Tests for bounded kernel directions."""

    VECTORS = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]

    def test_direction_and_step(self):
        result = homogeneous_solution(self.VECTORS)
        np.testing.assert_allclose(result.direction, [1.0, 1.0, -1.0])
        assert result.step == pytest.approx(1.0 - 1e-6)
        assert (result.solution >= 0).all()

    def test_target_scale(self):
        result = homogeneous_solution(self.VECTORS, target=[1.0, 1.0])
        assert result.scale == pytest.approx(2.0)
        matrix = np.array(self.VECTORS).T
        np.testing.assert_allclose(matrix @ result.solution, [1.0, 1.0])

    def test_independent_vectors(self):
        with pytest.raises(NoKernelError):
            homogeneous_solution([[1.0, 0.0], [0.0, 1.0]])

    def test_target_not_proportional(self):
        with pytest.raises(PreconditionError):
            homogeneous_solution(self.VECTORS, target=[1.0, 0.0])


@pytest.mark.unit
class TestFeasibility:
    """Tests for LP feasibility and distance."""

    INFEASIBLE = ConeSystem(np.array([[0.5, 0.5], [0.6, 0.4]]), np.array([0.1, 0.0]))

    def test_nonnegative_solution(self, cone_system):
        solution = nonnegative_solution(cone_system)
        assert solution is not None
        assert (solution >= 0).all()
        assert cone_system.residual(solution) < 1e-9

    def test_infeasible(self):
        assert nonnegative_solution(self.INFEASIBLE) is None

    def test_distance(self):
        assert distance_to_feasibility(self.INFEASIBLE) == pytest.approx(0.04 / 0.9, abs=1e-9)

    def test_distance_zero_when_feasible(self, cone_system):
        assert distance_to_feasibility(cone_system) == pytest.approx(0.0, abs=1e-9)
