"""
Integration tests for cross-module properties on seeded random instances.

Each class drives several modules together: random families from the
instance builders, processes classified and decomposed, and the harness
checks run one by one.
"""

from itertools import product

import numpy as np
import pytest

from optional_doob.cone_solver import ConeSolver, ConeSystem, numerical_rank
from optional_doob.conditional import cond_exp_values, sup_cond_exp
from optional_doob.config import Config, HarnessConfig
from optional_doob.decomposition import (
    CellStatus,
    OracleAgreement,
    check_sup_process_regularity,
    decompose,
    lattice_oracle,
)
from optional_doob.decomposition import test_regularity as regularity
from optional_doob.exceptions import NotRegularError
from optional_doob.filtration import build_tree, check_condition_A
from optional_doob.gzero import moment_residual, represent_supermartingale
from optional_doob.harness import LemmaHarness
from optional_doob.instances import (
    random_instance,
    random_supermartingale,
    shared_transition_instance,
)
from optional_doob.measures import MeasureFamily, check_condition_B
from optional_doob.processes import AdaptedProcess, ProcessKind, check_drift_bound, classify
from optional_doob.reports import CheckStatus

SEED = 20240101


def _families(count: int, seed: int = SEED, **kwargs):
    rng = np.random.default_rng(seed)
    return [random_instance(rng, **kwargs) for _ in range(count)]


GRID = np.arange(9) / 8

# Conditional transition rows for a cell with c children, one row per measure
CELL_TRANSITIONS = {
    1: {1: [[1.0]], 2: [[0.5, 0.5]], 3: [[1 / 3, 1 / 3, 1 / 3]]},
    2: {
        1: [[1.0], [1.0]],
        2: [[0.5, 0.5], [0.6, 0.4]],
        3: [[1 / 3, 1 / 3, 1 / 3], [0.5, 0.25, 0.25]],
    },
}


def _depth_two_family(counts: tuple[int, ...], k: int) -> MeasureFamily:
    """Root with len(counts) children; child s has counts[s] children."""
    tables = CELL_TRANSITIONS[k]
    root = np.asarray(tables[len(counts)])
    leaf = np.stack([
        np.concatenate([root[i, s] * np.asarray(tables[c][i]) for s, c in enumerate(counts)])
        for i in range(k)
    ])
    return MeasureFamily(build_tree([len(counts), list(counts)]), leaf)


def _depth_two_layouts():
    for r in (1, 2, 3):
        yield from product((1, 2, 3), repeat=r)


def _cell_configurations(k: int, c: int) -> list[tuple[float, tuple[float, ...]]]:
    """Every grid (parent, children) pair satisfying the one-step supermartingale inequality."""
    table = np.asarray(CELL_TRANSITIONS[k][c])
    configurations = []
    for children in product(GRID, repeat=c):
        envelope = float((table @ np.asarray(children)).max())
        configurations.extend((v, children) for v in GRID if v >= envelope - 1e-12)
    return configurations


def _snap_up(values: np.ndarray) -> np.ndarray:
    return np.ceil(values * 8 - 1e-9) / 8


def _assert_no_disagreement(cells):
    assert all(c.agreement != OracleAgreement.DISAGREE for c in cells), [
        (c.level, c.parent, c.lattice_residual, c.distance) for c in cells
        if c.agreement == OracleAgreement.DISAGREE
    ]


@pytest.fixture
def quick_config() -> Config:
    return Config(harness=HarnessConfig(
        seed=SEED, trials=5, mixtures=100, drift_samples=200, completeness_samples=1000,
    ))


@pytest.mark.integration
class TestConditionalIdentities:
    """Ratio, envelope and measure-change identities on random instances."""

    @pytest.mark.slow
    def test_identities_on_random_instances(self, quick_config):
        """Closed-form ratios, the vertex maximum and the measure change agree to 1e-12."""
        names = ("rn_ratio_identity", "sup_equals_vertex_max", "measure_change_identity")
        for family in _families(100):
            harness = LemmaHarness(family, quick_config)
            methods = dict(harness.checks)
            for name in names:
                result = methods[name]()
                assert result.status == CheckStatus.PASS, (name, result.to_dict())
                assert result.max_deviation <= 1e-12

    def test_envelope_attained_at_a_vertex(self):
        """The maximum over mixtures equals the maximum over the extreme measures."""
        family = _families(1, seed=4, branching=[3, 2], k=3)[0]
        xi = np.random.default_rng(9).uniform(size=family.tree.num_leaves)
        envelope = np.max([cond_exp_values(family, i, xi, 2, 1) for i in range(family.k)], axis=0)
        best = np.argmax([cond_exp_values(family, i, xi, 2, 1) for i in range(family.k)], axis=0)
        for s, i in enumerate(best):
            assert cond_exp_values(family, int(i), xi, 2, 1)[s] == pytest.approx(envelope[s], abs=1e-12)


@pytest.mark.integration
class TestDriftBound:
    """The mixing drift bound on instances meeting its hypothesis."""

    def test_sampled_mixtures_keep_the_drift(self):
        """Deficits under 200 sampled Q stay above l/(1+L) * phi."""
        rng = np.random.default_rng(SEED)
        for family in _families(20, seed=7, max_k=3):
            f = random_supermartingale(family, rng, slack=0.2)
            for m in range(1, family.tree.depth + 1):
                phi = np.clip(f[m - 1] - cond_exp_values(family, 0, f[m], m, m - 1), 0.0, None)
                report = check_drift_bound(family, f, m, phi, trials=200, seed=m)
                assert report.status == CheckStatus.PASS, report.to_dict()
                assert report.min_margin >= -1e-9


@pytest.mark.integration
class TestDecompositionCorrectness:
    """decompose output against its defining properties."""

    def test_martingale_part_and_increments(self):
        """M = f + g, increments nonnegative and M a martingale for every vertex."""
        rng = np.random.default_rng(SEED)
        decomposed = 0
        for family in _families(30, seed=11):
            f = random_supermartingale(family, rng)
            try:
                result = decompose(family, f)
            except NotRegularError as e:
                assert not e.report.regular
                continue
            decomposed += 1
            assert (f + result.cumulative).max_abs_difference(result.martingale_part) <= 1e-10
            assert min(float(s.min()) for s in result.increments.slices) >= -1e-10
            assert classify(family, result.martingale_part, 1e-10).kind == ProcessKind.MARTINGALE
        assert decomposed > 0

    def test_single_measure_is_classical(self):
        """With one measure the increments are the one-step drifts."""
        rng = np.random.default_rng(3)
        for family in _families(10, seed=5, k=1):
            f = random_supermartingale(family, rng)
            result = decompose(family, f)
            tree = family.tree
            for m in range(1, tree.depth + 1):
                drift = f[m - 1] - cond_exp_values(family, 0, f[m], m, m - 1)
                np.testing.assert_allclose(result.increments[m], tree.lift(drift, m - 1, m), atol=1e-12)

    def test_shared_transitions_decompose_envelopes(self):
        """Upper-envelope processes are regular when every transition is shared."""
        family = shared_transition_instance(np.random.default_rng(8), [2, 3, 2], k=3)
        assert check_condition_B(family).passed
        xi = np.random.default_rng(1).uniform(size=family.tree.num_leaves)
        verdict = check_sup_process_regularity(family, xi)
        assert verdict.status == CheckStatus.PASS


@pytest.mark.integration
class TestLatticeOracle:
    """Solver verdicts against lattice brute force on depth-2 trees."""

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2])
    def test_every_grid_cell_configuration(self, k):
        """Every grid-valued cell with 1 to 3 children, zero hard disagreements.

        Cell verdicts depend only on the cell's own values, so each
        configuration is placed in the tree with child counts (1, 2, 3) and
        f_0 = 1, which keeps the root cell a supermartingale cell too.
        """
        family = _depth_two_family((1, 2, 3), k)
        configurations = {c: _cell_configurations(k, c) for c in (1, 2, 3)}
        rounds = max(len(v) for v in configurations.values())
        for j in range(rounds):
            picked = [configurations[c][j % len(configurations[c])] for c in (1, 2, 3)]
            f = AdaptedProcess.from_lists(family.tree, [
                [1.0],
                [v for v, _ in picked],
                [x for _, children in picked for x in children],
            ])
            cells = lattice_oracle(family, f, step=1 / 64)
            assert len(cells) == 4
            _assert_no_disagreement(cells)

    def test_cell_configurations_stay_on_grid(self):
        for k in (1, 2):
            for c in (1, 2, 3):
                for v, children in _cell_configurations(k, c):
                    assert 0.0 <= v <= 1.0 and all(0.0 <= x <= 1.0 for x in children)
                    assert v * 8 == int(v * 8)
        # all-zero children admit every parent value
        assert len([1 for v, x in _cell_configurations(2, 3) if x == (0.0, 0.0, 0.0)]) == 9

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2])
    def test_every_depth_two_layout(self, k):
        """All 39 layouts with at most three children per atom, leaf-indicator envelopes."""
        layouts = list(_depth_two_layouts())
        assert len(layouts) == 39
        for counts in layouts:
            family = _depth_two_family(counts, k)
            tree = family.tree
            assert check_condition_A(tree).passed
            for leaf in range(tree.num_leaves):
                terminal = np.zeros(tree.num_leaves)
                terminal[leaf] = 1.0
                middle = _snap_up(sup_cond_exp(family, terminal, 1).values)
                top = _snap_up(np.max([cond_exp_values(family, i, middle, 1, 0) for i in range(k)], axis=0))
                f = AdaptedProcess(tree, (top, middle, terminal))
                cells = lattice_oracle(family, f, step=1 / 64)
                assert len(cells) == 1 + len(counts)
                _assert_no_disagreement(cells)

    def test_infeasible_cells_are_far_from_the_lattice(self, d1_family, sup_indicator):
        """The binary instance's infeasible cell is rejected by both methods."""
        report = regularity(d1_family, sup_indicator)
        assert [c.status for c in report.cells].count(CellStatus.INFEASIBLE) == 1
        cells = lattice_oracle(d1_family, sup_indicator)
        assert all(c.agreement == OracleAgreement.AGREE for c in cells)


@pytest.mark.integration
class TestSupProcessCriterion:
    """Equal expectations versus a flat decomposition of the envelope."""

    def test_random_variables(self):
        """No asserted contradiction on 50 variables per instance."""
        rng = np.random.default_rng(SEED)
        for family in _families(5, seed=13):
            for xi in rng.uniform(size=(50, family.tree.num_leaves)):
                verdict = check_sup_process_regularity(family, xi)
                assert verdict.status != CheckStatus.FAIL, verdict.to_dict()

    def test_iff_with_domination(self, quick_config):
        """With shared transitions both truth values coincide, G0 samples included."""
        family = shared_transition_instance(np.random.default_rng(21), [2, 2], k=2)
        result = LemmaHarness(family, quick_config).check_sup_process_regularity_iff()
        assert result.status == CheckStatus.PASS
        assert result.conclusion_holds


@pytest.mark.integration
class TestConeSolver:
    """Solution families of random small systems."""

    def test_basic_solutions(self):
        """Residuals within 1e-10 and linearly independent rows."""
        rng = np.random.default_rng(SEED)
        solver = ConeSolver()
        for m in range(2, 6):
            for _ in range(10):
                vectors = rng.uniform(0.05, 1.0, size=(2, m))
                system = ConeSystem(vectors, vectors @ rng.uniform(0.1, 1.0, size=m))
                family = solver.solve(system)
                for row in family.basic_solutions:
                    assert system.residual(row) <= 1e-10
                    assert (row >= 0).all()
                assert numerical_rank(family.basic_solutions) == family.basic_solutions.shape[0]

    @pytest.mark.slow
    def test_completeness(self, d1_family, quick_config):
        """1000 sampled strictly positive solutions are reproduced by combine."""
        result = LemmaHarness(d1_family, quick_config).check_cone_solution_family()
        assert result.status == CheckStatus.PASS
        assert result.cases >= 1000 - 5


@pytest.mark.integration
class TestRepresentation:
    """Round trip through G0 for nonnegative regular supermartingales."""

    def test_round_trip(self):
        """Reconstruction within 1e-10 and the normalized density in G0."""
        rng = np.random.default_rng(SEED)
        represented = 0
        for family in _families(30, seed=17):
            f = random_supermartingale(family, rng)
            try:
                result = represent_supermartingale(family, f)
            except NotRegularError:
                continue
            represented += 1
            assert result.reconstruction_error <= 1e-10
            assert moment_residual(family, family.tree.depth, result.xi.values) <= 1e-10
            assert (result.xi.values >= 0).all()
        assert represented > 0
