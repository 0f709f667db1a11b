"""
Unit tests for adapted processes, classification, stopping and the drift bound.
"""

import numpy as np
import pytest

from optional_doob.exceptions import StoppingLevelError, StructureError
from optional_doob.filtration import Atom, build_tree
from optional_doob.processes import (
    AdaptedProcess,
    ProcessKind,
    check_drift_bound,
    classify,
    equal_expectation_criterion,
    expectations,
    is_supermartingale_for_mixtures,
    martingale_of,
    stop,
)
from optional_doob.reports import CheckStatus


@pytest.mark.unit
class TestAdaptedProcess:
    """Tests for construction and arithmetic."""

    def test_from_lists(self, d1_f):
        np.testing.assert_allclose(d1_f[2], [0.8, 1.0, 0.9, 1.0])
        assert d1_f.depth == 2

    def test_wrong_level_count(self):
        with pytest.raises(StructureError):
            AdaptedProcess.from_lists(build_tree([2]), [[1.0]])

    def test_wrong_level_size(self):
        with pytest.raises(StructureError):
            AdaptedProcess.from_lists(build_tree([2]), [[1.0], [1.0, 1.0, 1.0]])

    def test_non_finite_rejected(self):
        with pytest.raises(StructureError):
            AdaptedProcess.from_lists(build_tree([2]), [[1.0], [np.inf, 1.0]])

    def test_arithmetic(self, d1_f):
        doubled = d1_f + d1_f
        np.testing.assert_allclose(doubled[2], [1.6, 2.0, 1.8, 2.0])
        np.testing.assert_allclose((doubled - d1_f)[2], d1_f[2])
        np.testing.assert_allclose((-d1_f)[0], [-1.0])

    def test_max_abs_difference(self, d1_f):
        ones = AdaptedProcess.constant(d1_f.tree, 1.0)
        assert d1_f.max_abs_difference(ones) == pytest.approx(0.2)

    def test_different_trees_rejected(self, d1_f):
        with pytest.raises(StructureError):
            d1_f + AdaptedProcess.zeros(build_tree([3, 2]))


@pytest.mark.unit
class TestClassify:
    """Tests for martingale / supermartingale classification."""

    def test_d1_process_is_supermartingale(self, d1_family, d1_f):
        result = classify(d1_family, d1_f)
        assert result.kind == ProcessKind.SUPERMARTINGALE
        assert result.is_supermartingale
        assert result.multi_step_checked

    def test_constant_is_martingale(self, d1_family):
        result = classify(d1_family, AdaptedProcess.constant(d1_family.tree, 3.0))
        assert result.kind == ProcessKind.MARTINGALE

    def test_witness(self, d1_family):
        f = AdaptedProcess.from_lists(d1_family.tree, [[1.0], [1.1, 1.0], [1.1, 1.1, 1.0, 1.0]])
        result = classify(d1_family, f)
        assert result.kind == ProcessKind.NEITHER
        assert result.witness.measure == 0
        assert result.witness.level == 1
        assert result.witness.parent == Atom(0, 0)
        assert result.witness.conditional == pytest.approx(1.05)
        assert result.to_dict()["witness"]["parent"] == [0, 0]

    def test_tree_mismatch(self, d1_family):
        with pytest.raises(StructureError):
            classify(d1_family, AdaptedProcess.zeros(build_tree([2, 3])))

    def test_mixtures_keep_supermartingale(self, d1_family, d1_f):
        assert is_supermartingale_for_mixtures(d1_family, d1_f, samples=20, seed=3)


@pytest.mark.unit
class TestStopAndMartingales:
    """Tests for deterministic stopping and measure martingales."""

    def test_stop_repeats_values(self, d1_f):
        stopped = stop(d1_f, 1)
        np.testing.assert_allclose(stopped[2], [1.0, 1.0, 1.0, 1.0])
        np.testing.assert_allclose(stop(d1_f, 2)[2], d1_f[2])

    def test_stop_level_out_of_range(self, d1_f):
        with pytest.raises(StoppingLevelError):
            stop(d1_f, 3)

    def test_martingale_of_indicator(self, d1_family):
        xi = np.array([1.0, 0.0, 0.0, 0.0])
        process = martingale_of(d1_family, 1, xi)
        np.testing.assert_allclose(process[1], [0.6, 0.0])
        np.testing.assert_allclose(process[0], [0.3])

    def test_expectations(self, d1_family, d1_f):
        np.testing.assert_allclose(expectations(d1_family, d1_f), [[1.0, 1.0, 0.925], [1.0, 1.0, 0.91]])


@pytest.mark.unit
class TestEqualExpectationCriterion:
    """Tests for the equal-expectation martingale criterion."""

    def test_constant_process(self, d1_family):
        result = equal_expectation_criterion(d1_family, AdaptedProcess.constant(d1_family.tree, 1.0))
        assert result.equal_expectations
        assert result.predicts_martingale
        assert result.consistent

    def test_strict_supermartingale(self, d1_family, d1_f):
        result = equal_expectation_criterion(d1_family, d1_f)
        assert not result.equal_expectations
        assert not result.predicts_martingale
        assert result.classified == ProcessKind.SUPERMARTINGALE
        assert result.consistent


@pytest.mark.unit
class TestDriftBound:
    """Tests for the drift that survives small mixing."""

    def test_base_drift_passes(self, d1_family, d1_f):
        report = check_drift_bound(d1_family, d1_f, 2, [0.1, 0.05], trials=50, seed=1)
        assert report.status == CheckStatus.PASS
        assert report.min_margin >= -1e-9
        assert report.drift_factor == pytest.approx(0.8 / 2.25)

    def test_phi_above_base_drift_is_untestable(self, d1_family, d1_f):
        report = check_drift_bound(d1_family, d1_f, 2, [0.2, 0.05], trials=10)
        assert report.status == CheckStatus.UNTESTABLE
        assert report.notes == ["base drift does not dominate phi"]

    def test_zero_phi_is_accepted(self, d1_family, d1_f):
        report = check_drift_bound(d1_family, d1_f, 1, [0.0], trials=5)
        assert report.status == CheckStatus.PASS
        assert "zero right-hand side" in report.notes

    def test_non_supermartingale_is_untestable(self, d1_family):
        f = AdaptedProcess.from_lists(d1_family.tree, [[1.0], [1.1, 1.0], [1.1, 1.1, 1.0, 1.0]])
        assert check_drift_bound(d1_family, f, 1, [0.0]).status == CheckStatus.UNTESTABLE

    def test_phi_size_checked(self, d1_family, d1_f):
        with pytest.raises(StructureError):
            check_drift_bound(d1_family, d1_f, 2, [0.1])

    def test_level_checked(self, d1_family, d1_f):
        with pytest.raises(StructureError):
            check_drift_bound(d1_family, d1_f, 0, [0.0])
