"""
Unit tests for filtration trees and the atomic-filtration condition.
"""

import numpy as np
import pytest

from optional_doob.exceptions import AtomLookupError, StructureError, TreeConstructionError
from optional_doob.filtration import Atom, FiltrationTree, build_tree, check_condition_A


@pytest.mark.unit
class TestBuildTree:
    """Tests for uniform tree construction."""

    def test_level_sizes(self):
        tree = build_tree([3, 2])
        assert tree.level_sizes == (1, 3, 6)
        assert tree.depth == 2
        assert tree.num_leaves == 6

    def test_children_are_contiguous(self):
        tree = build_tree([2, 2])
        assert tree.children[0] == ((0, 1),)
        assert tree.children[1] == ((0, 1), (2, 3))

    def test_empty_branching_rejected(self):
        with pytest.raises(TreeConstructionError):
            build_tree([])

    def test_zero_children_rejected(self):
        with pytest.raises(TreeConstructionError):
            build_tree([2, 0])

    def test_single_child_levels_allowed(self):
        tree = build_tree([1, 1])
        assert tree.level_sizes == (1, 1, 1)
        assert check_condition_A(tree).passed

    def test_per_atom_counts(self):
        """A level may give each atom its own child count."""
        tree = build_tree([3, [1, 2, 3]])
        assert tree.level_sizes == (1, 3, 6)
        assert tree.children[1] == ((0,), (1, 2), (3, 4, 5))
        assert tree.children_of(Atom(1, 2)) == (Atom(2, 3), Atom(2, 4), Atom(2, 5))
        assert check_condition_A(tree).passed

    def test_per_atom_counts_match_uniform(self):
        assert build_tree([2, [3, 3]]) == build_tree([2, 3])

    def test_per_atom_count_length_mismatch(self):
        with pytest.raises(TreeConstructionError):
            build_tree([2, [1, 2, 3]])

    def test_per_atom_zero_rejected(self):
        with pytest.raises(TreeConstructionError):
            build_tree([2, [1, 0]])

    def test_mixed_branching_from_dict(self):
        tree = FiltrationTree.from_dict({"branching": [2, [1, 3]]})
        assert tree.level_sizes == (1, 2, 4)
        assert tree.parent_of(Atom(2, 3)) == Atom(1, 1)


@pytest.mark.unit
class TestNavigation:
    """Tests for parent, child and ancestor lookups."""

    def test_parent_of(self):
        tree = build_tree([3, 2])
        assert tree.parent_of(Atom(2, 4)) == Atom(1, 2)
        assert tree.parent_of((1, 2)) == Atom(0, 0)

    def test_children_of(self):
        tree = build_tree([3, 2])
        assert tree.children_of(Atom(1, 2)) == (Atom(2, 4), Atom(2, 5))
        assert tree.children_of(Atom(2, 5)) == ()

    def test_root_has_no_parent(self):
        with pytest.raises(AtomLookupError):
            build_tree([2]).parent_of(Atom(0, 0))

    def test_unknown_atom(self):
        tree = build_tree([2, 2])
        with pytest.raises(AtomLookupError):
            tree.check_atom((3, 0))
        with pytest.raises(AtomLookupError):
            tree.check_atom((1, 2))
        with pytest.raises(AtomLookupError):
            tree.check_atom("x")

    def test_ancestor_index(self):
        tree = build_tree([2, 3])
        np.testing.assert_array_equal(tree.ancestor_index(2, 1), [0, 0, 0, 1, 1, 1])
        np.testing.assert_array_equal(tree.ancestor_index(2, 0), [0] * 6)

    def test_ancestor_must_be_coarser(self):
        with pytest.raises(StructureError):
            build_tree([2, 2]).ancestor_index(1, 2)

    def test_atoms(self):
        assert build_tree([2]).atoms(1) == [Atom(1, 0), Atom(1, 1)]
        with pytest.raises(StructureError):
            build_tree([2]).atoms(2)

    def test_atom_str(self):
        assert str(Atom(2, 3)) == "A(2,3)"


@pytest.mark.unit
class TestAggregateAndLift:
    """Tests for moving per-atom values between levels."""

    def test_aggregate_sums_children(self):
        tree = build_tree([2, 2])
        np.testing.assert_allclose(tree.aggregate([1.0, 2.0, 3.0, 4.0], 2, 1), [3.0, 7.0])
        np.testing.assert_allclose(tree.aggregate([1.0, 2.0, 3.0, 4.0], 2, 0), [10.0])

    def test_aggregate_rows(self):
        tree = build_tree([2, 2])
        rows = np.array([[1.0, 2.0, 3.0, 4.0], [0.0, 1.0, 0.0, 1.0]])
        np.testing.assert_allclose(tree.aggregate(rows, 2, 1), [[3.0, 7.0], [1.0, 1.0]])

    def test_lift_repeats_parent(self):
        tree = build_tree([2, 2])
        np.testing.assert_allclose(tree.lift([5.0, 6.0], 1, 2), [5.0, 5.0, 6.0, 6.0])


@pytest.mark.unit
class TestSerialization:
    """Tests for the JSON representation of trees."""

    def test_round_trip(self):
        tree = build_tree([3, 2])
        rebuilt = FiltrationTree.from_dict(tree.to_dict())
        assert rebuilt.level_sizes == tree.level_sizes
        assert rebuilt.children == tree.children

    def test_branching_shorthand(self):
        tree = FiltrationTree.from_dict({"branching": [2, 2]})
        assert tree.level_sizes == (1, 2, 4)

    def test_missing_children(self):
        with pytest.raises(TreeConstructionError):
            FiltrationTree.from_dict({"levels": [1, 2]})

    def test_depth_mismatch(self):
        with pytest.raises(TreeConstructionError):
            FiltrationTree.from_dict({"depth": 3, "levels": [1, 2], "children": [[[0, 1]]]})


@pytest.mark.unit
class TestConditionA:
    """Tests for the clause-by-clause filtration check."""

    def test_uniform_tree_passes(self):
        report = check_condition_A(build_tree([2, 3]))
        assert report.passed
        clauses = {c.clause for c in report.clauses}
        assert clauses == {
            "single_root", "refinement_nesting", "disjointness", "covering", "generated_sigma_algebra",
        }

    def test_generated_clause_is_vacuous(self):
        report = check_condition_A(build_tree([2]))
        generated = [c for c in report.clauses if c.clause == "generated_sigma_algebra"]
        assert generated[0].passed
        assert "vacuously" in generated[0].detail

    def test_shared_child_fails_disjointness(self):
        tree = FiltrationTree(level_sizes=(1, 2, 4), children=(((0, 1),), ((0, 1), (1, 2, 3))))
        report = check_condition_A(tree)
        assert not report.passed
        failed = [(c.clause, c.level) for c in report.failed_clauses]
        assert failed == [("disjointness", 1)]

    def test_uncovered_atom_fails_covering(self):
        tree = FiltrationTree(level_sizes=(1, 2, 4), children=(((0, 1),), ((0, 1), (2,))))
        report = check_condition_A(tree)
        failed = [(c.clause, c.level) for c in report.failed_clauses]
        assert failed == [("covering", 2)]

    def test_childless_atom_fails_nesting(self):
        tree = FiltrationTree(level_sizes=(1, 2, 2), children=(((0, 1),), ((0, 1), ())))
        report = check_condition_A(tree)
        assert ("refinement_nesting", 1) in [(c.clause, c.level) for c in report.failed_clauses]

    def test_two_roots_fail(self):
        tree = FiltrationTree(level_sizes=(2, 2), children=(((0,), (1,)),))
        report = check_condition_A(tree)
        assert ("single_root", 0) in [(c.clause, c.level) for c in report.failed_clauses]

    def test_report_to_dict(self):
        data = check_condition_A(build_tree([2])).to_dict()
        assert data["condition"] == "A"
        assert data["passed"] is True
        assert len(data["clauses"]) == 5
