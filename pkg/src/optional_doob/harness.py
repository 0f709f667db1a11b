"""
Optional Doob Core - Verification Harness

Runs every property check of the library on one measure family and
collects one ``CheckResult`` per property. Conclusions that rest on the
domination condition are asserted only when it holds; otherwise they are
evaluated and reported with status ``hypothesis_fails``.

All randomness is derived from the configured seed and the check name,
so identical inputs and seed give identical reports.
"""

from __future__ import annotations

import zlib
from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional

import numpy as np
from scipy.linalg import null_space

from .conditional import (
    cond_exp_all,
    cond_exp_mixture,
    cond_exp_values,
    expect_under,
    measure_change_kernel,
)
from .cone_solver import ConeSolver, ConeSystem, combine, gamma_for
from .config import Config, load_config
from .decomposition import (
    OptionalDecomposition,
    RegularityReport,
    check_martingale_equalities,
    check_stopped_regularity,
    check_sup_process_regularity,
    decompose,
    psi_residuals,
    sup_process,
    test_regularity,
)
from .exceptions import ConeMembershipError, ConsistencyError, DoobError, NotRegularError
from .gzero import (
    GZeroFamily,
    combine_class_k,
    local_regular_generator,
    martingale_from_xi,
    represent_supermartingale,
    solve_g0,
)
from .instances import random_supermartingale
from .logging import LoggerMixin
from .measures import (
    MeasureFamily,
    check_condition_B,
    equivalence_bounds,
    sample_weights,
)
from .processes import (
    AdaptedProcess,
    ProcessKind,
    check_drift_bound,
    classify,
    equal_expectation_criterion,
    martingale_of,
)
from .reports import CheckResult, CheckStatus, ConditionReport, rounded


@dataclass
class DecompositionCase:
    """One process of the harness pool with its regularity verdicts."""

    name: str
    process: AdaptedProcess
    report: RegularityReport
    decomposition: Optional[OptionalDecomposition] = None
    error: Optional[str] = None


@dataclass
class HarnessReport:
    """One line per property, plus the instance summary."""

    instance: dict
    seed: int
    condition_b: ConditionReport
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any(c.failed for c in self.checks)

    def summary(self) -> dict[str, int]:
        counts = Counter(c.status.value for c in self.checks)
        return {status.value: counts.get(status.value, 0) for status in CheckStatus}

    def to_dict(self) -> dict:
        return {
            "instance": rounded(self.instance),
            "seed": self.seed,
            "condition_b": {
                "passed": self.condition_b.passed,
                "start_level": self.condition_b.start_level,
                "passing_candidates": list(self.condition_b.passing_candidates),
            },
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary(),
        }


class LemmaHarness(LoggerMixin):
    """
    Property checks on one measure family.

    Usage:
        harness = LemmaHarness(family, config)
        report = harness.run()
        report.failed
    """

    def __init__(
        self,
        family: MeasureFamily,
        config: Optional[Config] = None,
        processes: Optional[dict[str, AdaptedProcess]] = None,
    ):
        self.family = family
        self.config = config or load_config()
        self.extra_processes = dict(processes or {})
        self.tol = family.tolerances
        self.condition = check_condition_B(family)
        self.tree = family.tree
        self._cases: Optional[list[DecompositionCase]] = None
        self._g0_cache: dict[int, Optional[GZeroFamily]] = {}

    # ------------------------------------------------------------------
    # Plumbing
    # ------------------------------------------------------------------

    @property
    def checks(self) -> list[tuple[str, Callable[[], CheckResult]]]:
        return [
            ("rn_ratio_identity", self.check_rn_ratio_identity),
            ("condition_b_domination", self.check_condition_b_domination),
            ("sup_equals_vertex_max", self.check_sup_equals_vertex_max),
            ("max_convexity", self.check_max_convexity),
            ("measure_change_identity", self.check_measure_change_identity),
            ("max_tower", self.check_max_tower),
            ("max_swap", self.check_max_swap),
            ("sup_supermartingale", self.check_sup_supermartingale),
            ("sup_mixture_supermartingale", self.check_sup_mixture_supermartingale),
            ("sup_martingale_equal_means", self.check_sup_martingale_equal_means),
            ("drift_bound", self.check_drift_bound),
            ("equal_expectation_criterion", self.check_equal_expectation_criterion),
            ("decomposition_regularity", self.check_decomposition_regularity),
            ("psi_structure", self.check_psi_structure),
            ("chain_martingale_equalities", self.check_chain_martingale_equalities),
            ("stopped_regularity", self.check_stopped_regularity),
            ("sup_process_regularity_iff", self.check_sup_process_regularity_iff),
            ("g0_martingale", self.check_g0_martingale),
            ("generator_regularity", self.check_generator_regularity),
            ("class_k_representation", self.check_class_k_representation),
            ("cone_solution_family", self.check_cone_solution_family),
        ]

    def run(self) -> HarnessReport:
        """Run every check; an unexpected library error fails only its own check."""
        report = HarnessReport(
            instance=self._instance_summary(),
            seed=self.config.harness.seed,
            condition_b=self.condition,
        )
        for name, check in self.checks:
            try:
                result = check()
            except DoobError as e:
                self.logger.warning("Check %s raised %s: %s", name, type(e).__name__, e)
                result = CheckResult(name, CheckStatus.FAIL, False, detail=f"{type(e).__name__}: {e}")
            self.logger.info("%s: %s", name, result.status.value)
            report.checks.append(result)
        return report

    def _instance_summary(self) -> dict:
        bounds = equivalence_bounds(self.family)
        return {
            "depth": self.tree.depth,
            "level_sizes": list(self.tree.level_sizes),
            "measures": self.family.k,
            "bounds": bounds.to_dict(),
        }

    def _rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.config.harness.seed, zlib.crc32(name.encode())])

    def _random_xi(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(0.0, 1.0, size=(count, self.tree.num_leaves))

    def _mixture_rows(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return sample_weights(rng, self.family.k, size=count) @ self.family.leaf_probabilities

    def _gated(self, name: str, holds: bool, deviation: float, cases: int, detail: str = "") -> CheckResult:
        if self.condition.passed:
            status = CheckStatus.PASS if holds else CheckStatus.FAIL
        else:
            status = CheckStatus.HYPOTHESIS_FAILS
            detail = detail or "domination condition fails; conclusion evaluated"
        return CheckResult(name, status, holds, deviation, cases, detail)

    @staticmethod
    def _asserted(name: str, holds: bool, deviation: float, cases: int, detail: str = "") -> CheckResult:
        status = CheckStatus.PASS if holds else CheckStatus.FAIL
        return CheckResult(name, status, holds, deviation, cases, detail)

    @property
    def _levels(self) -> range:
        return range(self.tree.depth + 1)

    @property
    def _small_trials(self) -> int:
        return max(1, self.config.harness.trials // 5)

    def _kernels(self) -> dict[tuple[int, int, int], np.ndarray]:
        k = self.family.k
        return {
            (i, other, n): measure_change_kernel(self.family, i, other, n).values
            for i, other, n in product(range(k), range(k), self._levels)
        }

    # ------------------------------------------------------------------
    # Conditional expectations and the upper envelope
    # ------------------------------------------------------------------

    def check_rn_ratio_identity(self) -> CheckResult:
        """Density ratio between levels equals the closed form in atom probabilities."""
        name = "rn_ratio_identity"
        family, tree = self.family, self.tree
        depth = tree.depth
        leaf = family.level_probabilities(depth)
        deviation, cases = 0.0, 0

        for i, other, n in product(range(family.k), range(family.k), self._levels):
            phi = leaf[i] / leaf[other]
            coarse = cond_exp_values(family, other, phi, depth, n)
            direct = phi / tree.lift(coarse, n, depth)
            probs = family.level_probabilities(n)
            ancestor = tree.ancestor_index(depth, n)
            closed = leaf[i] * probs[other][ancestor] / (probs[i][ancestor] * leaf[other])
            scale = max(1.0, float(np.max(np.abs(closed))))
            deviation = max(deviation, float(np.max(np.abs(direct - closed))) / scale)
            cases += 1

        rng = self._rng(name)
        for xi in self._random_xi(rng, self._small_trials):
            for weights, n in product(sample_weights(rng, family.k, size=5), self._levels):
                cond_exp_mixture(family, weights, xi, n)
                cases += 1
        return self._asserted(name, deviation <= self.tol.identity, deviation, cases)

    def check_condition_b_domination(self) -> CheckResult:
        """Leaf-to-level density ratios are dominated by the distinguished measure's."""
        name = "condition_b_domination"
        family, tree = self.family, self.tree
        depth = tree.depth
        leaf = family.level_probabilities(depth)
        candidates = self.condition.passing_candidates or list(range(family.k))
        start = self.condition.start_level or 0

        best_excess = np.inf
        cases = 0
        for i0 in candidates:
            excess = -np.inf
            for i, other, n in product(range(family.k), range(family.k), range(start, depth + 1)):
                probs = family.level_probabilities(n)[:, tree.ancestor_index(depth, n)]
                ratios = (leaf / leaf[other]) / (probs / probs[other])
                excess = max(excess, float(np.max(ratios[i] - ratios[i0])))
                cases += 1
            best_excess = min(best_excess, excess)
        holds = best_excess <= self.tol.inequality
        return self._gated(name, holds, max(0.0, float(best_excess)), cases)

    def check_sup_equals_vertex_max(self) -> CheckResult:
        """Mixture conditional expectations never exceed the vertex maximum."""
        name = "sup_equals_vertex_max"
        rng = self._rng(name)
        family, tree = self.family, self.tree
        excess, cases = 0.0, 0
        for xi in self._random_xi(rng, self.config.harness.trials):
            rows = self._mixture_rows(rng, self.config.harness.mixtures)
            for n in self._levels:
                envelope = cond_exp_all(family, xi, n).max(axis=0)
                mixed = expect_under(tree, rows, xi, tree.depth, n)
                excess = max(excess, float(np.max(mixed - envelope)))
                cases += rows.shape[0]
        return self._asserted(name, excess <= self.tol.identity, max(0.0, excess), cases)

    def check_max_convexity(self) -> CheckResult:
        """E^P{max_j f_j | F_n} >= max_j E^P{f_j | F_n}."""
        name = "max_convexity"
        rng = self._rng(name)
        tree = self.tree
        rows = np.vstack([self.family.leaf_probabilities, self._mixture_rows(rng, 10)])
        shortfall, cases = 0.0, 0
        for _ in range(self._small_trials):
            values = self._random_xi(rng, 3)
            top = values.max(axis=0)
            for n in self._levels:
                lhs = expect_under(tree, rows, top, tree.depth, n)
                rhs = np.max([expect_under(tree, rows, v, tree.depth, n) for v in values], axis=0)
                shortfall = max(shortfall, float(np.max(rhs - lhs)))
                cases += rows.shape[0]
        return self._asserted(name, shortfall <= self.tol.identity, max(0.0, shortfall), cases)

    def check_measure_change_identity(self) -> CheckResult:
        """E^{P_i}{eta | F_n} = E^{P_l}{eta * kernel | F_n} for all i, l, n."""
        name = "measure_change_identity"
        rng = self._rng(name)
        family = self.family
        depth = self.tree.depth
        kernels = self._kernels()
        deviation, cases = 0.0, 0
        for eta in rng.normal(size=(self._small_trials, self.tree.num_leaves)):
            scale = max(1.0, float(np.max(np.abs(eta))))
            for (i, other, n), kernel in kernels.items():
                lhs = cond_exp_values(family, i, eta, depth, n)
                rhs = cond_exp_values(family, other, eta * kernel, depth, n)
                deviation = max(deviation, float(np.max(np.abs(lhs - rhs))) / scale)
                cases += 1
        return self._asserted(name, deviation <= self.tol.identity, deviation, cases)

    def _pairs(self) -> list[tuple[int, int]]:
        """(m, n) with 0 <= m < n <= N."""
        return [(m, n) for n in range(1, self.tree.depth + 1) for m in range(n)]

    def check_max_tower(self) -> CheckResult:
        """E^{P_l}{max_i E^{P_i}{xi|F_n} | F_m} = max_i E^{P_l}{xi * kernel_i | F_m}."""
        name = "max_tower"
        rng = self._rng(name)
        family = self.family
        depth = self.tree.depth
        kernels = self._kernels()
        deviation, cases = 0.0, 0
        for xi in self._random_xi(rng, self._small_trials):
            for (m, n), other in product(self._pairs(), range(family.k)):
                inner = cond_exp_all(family, xi, n).max(axis=0)
                lhs = cond_exp_values(family, other, inner, n, m)
                rhs = np.max([
                    cond_exp_values(family, other, xi * kernels[(i, other, n)], depth, m)
                    for i in range(family.k)
                ], axis=0)
                deviation = max(deviation, float(np.max(np.abs(lhs - rhs))))
                cases += 1
        return self._gated(name, deviation <= self.tol.inequality, deviation, cases)

    def check_max_swap(self) -> CheckResult:
        """E^{P_l}{xi * max_i kernel_i | F_n} = max_i E^{P_l}{xi * kernel_i | F_n}."""
        name = "max_swap"
        rng = self._rng(name)
        family = self.family
        depth = self.tree.depth
        kernels = self._kernels()
        start = self.condition.start_level or 0
        deviation, cases = 0.0, 0
        for xi in self._random_xi(rng, self._small_trials):
            for n, other in product(range(start, depth + 1), range(family.k)):
                stacked = np.stack([kernels[(i, other, n)] for i in range(family.k)])
                lhs = cond_exp_values(family, other, xi * stacked.max(axis=0), depth, n)
                rhs = np.max([cond_exp_values(family, other, xi * s, depth, n) for s in stacked], axis=0)
                deviation = max(deviation, float(np.max(np.abs(lhs - rhs))))
                cases += 1
        return self._gated(name, deviation <= self.tol.inequality, deviation, cases)

    def check_sup_supermartingale(self) -> CheckResult:
        """The upper-envelope process of a nonnegative xi is a supermartingale for every vertex."""
        name = "sup_supermartingale"
        rng = self._rng(name)
        family = self.family
        excess, cases = 0.0, 0
        for xi in self._random_xi(rng, self._small_trials):
            for (m, n), other in product(self._pairs(), range(family.k)):
                inner = cond_exp_all(family, xi, n).max(axis=0)
                lhs = cond_exp_values(family, other, inner, n, m)
                envelope = cond_exp_all(family, xi, m).max(axis=0)
                excess = max(excess, float(np.max(lhs - envelope)))
                cases += 1
        return self._gated(name, excess <= self.tol.inequality, max(0.0, excess), cases)

    def check_sup_mixture_supermartingale(self) -> CheckResult:
        """The same supermartingale inequality under sampled mixtures."""
        name = "sup_mixture_supermartingale"
        rng = self._rng(name)
        family, tree = self.family, self.tree
        excess, cases = 0.0, 0
        for xi in self._random_xi(rng, self._small_trials):
            rows = self._mixture_rows(rng, 10)
            for m, n in self._pairs():
                inner = cond_exp_all(family, xi, n).max(axis=0)
                lhs = expect_under(tree, rows, inner, n, m)
                envelope = cond_exp_all(family, xi, m).max(axis=0)
                excess = max(excess, float(np.max(lhs - envelope)))
                cases += rows.shape[0]
        return self._gated(name, excess <= self.tol.inequality, max(0.0, excess), cases)

    def _g0(self, level: int) -> Optional[GZeroFamily]:
        if level not in self._g0_cache:
            try:
                self._g0_cache[level] = solve_g0(self.family, level)
            except ConeMembershipError as e:
                self.logger.info("No G0 solution family at level %d: %s", level, e)
                self._g0_cache[level] = None
        return self._g0_cache[level]

    def _g0_samples(self, rng: np.random.Generator, level: int, count: int) -> list[np.ndarray]:
        """Leaf values of random convex combinations of the basic G0 solutions."""
        g0 = self._g0(level)
        if g0 is None:
            return []
        rows = g0.solutions.basic_solutions
        samples = []
        for weights in sample_weights(rng, rows.shape[0], size=count):
            element = g0.element(weights, self.family)
            samples.append(element.leaf_values(self.family))
        return samples

    def check_sup_martingale_equal_means(self) -> CheckResult:
        """If all E^{P_i} xi agree, the upper-envelope process is a martingale."""
        name = "sup_martingale_equal_means"
        rng = self._rng(name)
        samples = self._g0_samples(rng, self.tree.depth, self._small_trials)
        if not samples:
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no G0 element at the horizon")
        holds = True
        for xi in samples:
            scaled = xi * rng.uniform(0.5, 2.0)
            kind = classify(self.family, sup_process(self.family, scaled)).kind
            holds = holds and kind == ProcessKind.MARTINGALE
        return self._gated(name, holds, 0.0, len(samples))

    # ------------------------------------------------------------------
    # Supermartingales and their decomposition
    # ------------------------------------------------------------------

    def check_drift_bound(self) -> CheckResult:
        """A base-measure drift survives small mixing, scaled by l/(1+L)."""
        name = "drift_bound"
        rng = self._rng(name)
        family = self.family
        statuses, worst, cases = [], 0.0, 0
        for t in range(3):
            f = random_supermartingale(family, rng, slack=0.2)
            for m in range(1, self.tree.depth + 1):
                phi = np.clip(f[m - 1] - cond_exp_values(family, 0, f[m], m, m - 1), 0.0, None)
                report = check_drift_bound(
                    family, f, m, phi,
                    trials=self.config.harness.drift_samples,
                    seed=self.config.harness.seed + 31 * t + m,
                )
                statuses.append(report.status)
                if report.min_margin is not None:
                    worst = max(worst, -report.min_margin)
                cases += report.trials
        if CheckStatus.FAIL in statuses:
            return CheckResult(name, CheckStatus.FAIL, False, worst, cases)
        if all(s == CheckStatus.UNTESTABLE for s in statuses):
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no instance met the hypothesis")
        return CheckResult(name, CheckStatus.PASS, True, max(0.0, worst), cases)

    def _pool(self) -> list[AdaptedProcess]:
        rng = self._rng("pool")
        pool = [random_supermartingale(self.family, rng) for _ in range(self._small_trials)]
        pool += [sup_process(self.family, xi) for xi in self._random_xi(rng, 3)]
        return pool

    def _decomposition_cases(self) -> list[DecompositionCase]:
        if self._cases is None:
            named = list(self.extra_processes.items())
            named += [(f"random_{t}", f) for t, f in enumerate(self._pool())]
            cases = []
            for label, f in named:
                if not classify(self.family, f).is_supermartingale:
                    continue
                case = DecompositionCase(label, f, test_regularity(self.family, f))
                try:
                    case.decomposition = decompose(self.family, f)
                except NotRegularError as e:
                    case.error = str(e)
                cases.append(case)
            self._cases = cases
        return self._cases

    def _regular_cases(self) -> list[DecompositionCase]:
        return [c for c in self._decomposition_cases() if c.decomposition is not None]

    def check_equal_expectation_criterion(self) -> CheckResult:
        """Equal expectations of a supermartingale force a martingale."""
        name = "equal_expectation_criterion"
        rng = self._rng(name)
        processes = [c.process for c in self._decomposition_cases()]
        processes += [c.decomposition.martingale_part for c in self._regular_cases()]
        processes += [martingale_of(self.family, 0, xi) for xi in self._random_xi(rng, 3)]
        verdicts = [equal_expectation_criterion(self.family, f) for f in processes]
        holds = all(v.consistent for v in verdicts)
        return self._asserted(name, holds, 0.0, len(verdicts))

    def check_decomposition_regularity(self) -> CheckResult:
        """Feasibility, existence of the decomposition and the martingale part agree."""
        name = "decomposition_regularity"
        cases = self._decomposition_cases()
        holds, deviation = True, 0.0
        for case in cases:
            decomposition = case.decomposition
            if decomposition is None:
                holds = holds and not case.report.regular
                continue
            holds = holds and case.report.regular
            reconstructed = case.process + decomposition.cumulative
            deviation = max(deviation, reconstructed.max_abs_difference(decomposition.martingale_part))
            lowest = min(float(s.min()) for s in decomposition.increments.slices)
            holds = holds and lowest >= -self.tol.residual
            holds = holds and classify(self.family, decomposition.martingale_part, self.tol.residual * 10).kind == ProcessKind.MARTINGALE
        regular = sum(c.decomposition is not None for c in cases)
        detail = f"{regular} of {len(cases)} processes regular"
        return self._asserted(name, holds and deviation <= self.tol.residual, deviation, len(cases), detail)

    def check_psi_structure(self) -> CheckResult:
        """Increments split into the drift and a conditionally centred part under every measure."""
        name = "psi_structure"
        regular = self._regular_cases()
        if not regular:
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no regular process")
        family, tree = self.family, self.tree
        deviation, cases, failures = 0.0, 0, []
        for case, j in product(regular, range(family.k)):
            f, increments = case.decomposition.process, case.decomposition.increments
            allowed = self.tol.residual * max(1.0, *(float(np.max(np.abs(s))) for s in f.slices))
            cases += 1
            try:
                psi = psi_residuals(family, case.decomposition, j)
            except ConsistencyError as e:
                deviation = max(deviation, e.deviation)
                failures.append(f"{case.name}/P{j}: {e.name}")
                continue
            case_deviation = 0.0
            for m in range(1, tree.depth + 1):
                centred = cond_exp_values(family, j, psi[m], m, m - 1)
                drift = f[m - 1] - cond_exp_values(family, j, f[m], m, m - 1)
                gap = increments[m] - tree.lift(drift, m - 1, m) - psi[m]
                case_deviation = max(case_deviation, float(np.max(np.abs(centred))), float(np.max(np.abs(gap))))
            if case_deviation > allowed:
                failures.append(f"{case.name}/P{j}: deviation {case_deviation:.3e}")
            deviation = max(deviation, case_deviation)
        return self._asserted(name, not failures, deviation, cases, "; ".join(failures))

    def check_chain_martingale_equalities(self) -> CheckResult:
        """E^Q{f_m + g_m | F_k} = f_k + g_k for k <= m and sampled mixtures Q."""
        name = "chain_martingale_equalities"
        regular = self._regular_cases()
        if not regular:
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no regular process")
        deviation = 0.0
        for t, case in enumerate(regular):
            deviation = max(deviation, check_martingale_equalities(
                self.family, case.decomposition,
                samples=max(1, self.config.harness.mixtures // 10),
                seed=self.config.harness.seed + t,
            ))
        return self._asserted(name, deviation <= self.tol.residual * 10, deviation, len(regular))

    def check_stopped_regularity(self) -> CheckResult:
        """A decomposable supermartingale stays regular when stopped at every level."""
        name = "stopped_regularity"
        regular = self._regular_cases()
        if not regular:
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no regular process")
        holds = all(
            all(check_stopped_regularity(self.family, case.process))
            and all(case.decomposition.stopped_martingale)
            for case in regular
        )
        return self._asserted(name, holds, 0.0, len(regular))

    def check_sup_process_regularity_iff(self) -> CheckResult:
        """Equal expectations of xi iff its upper-envelope process decomposes with g = 0."""
        name = "sup_process_regularity_iff"
        rng = self._rng(name)
        samples = list(self._random_xi(rng, self._small_trials))
        samples += self._g0_samples(rng, self.tree.depth, self._small_trials)
        verdicts = [check_sup_process_regularity(self.family, xi) for xi in samples]
        holds = all(v.iff_holds for v in verdicts)
        statuses = {v.status for v in verdicts}
        if CheckStatus.FAIL in statuses:
            status = CheckStatus.FAIL
        elif CheckStatus.HYPOTHESIS_FAILS in statuses:
            status = CheckStatus.HYPOTHESIS_FAILS
        else:
            status = CheckStatus.PASS
        equal = sum(v.equal_expectations for v in verdicts)
        return CheckResult(name, status, holds, 0.0, len(verdicts), f"{equal} samples with equal expectations")

    # ------------------------------------------------------------------
    # G0, generators and the representation
    # ------------------------------------------------------------------

    def check_g0_martingale(self) -> CheckResult:
        """Elements of G0 generate one martingale for every measure."""
        name = "g0_martingale"
        rng = self._rng(name)
        deviation, cases, holds = 0.0, 0, True
        for level in range(1, self.tree.depth + 1):
            g0 = self._g0(level)
            if g0 is None:
                continue
            elements = list(g0.elements)
            for weights in sample_weights(rng, len(elements), size=3):
                elements.append(g0.element(weights, self.family))
            for element in elements:
                result = martingale_from_xi(self.family, element)
                deviation = max(deviation, result.deviation)
                holds = holds and result.measure_independent and result.kind == ProcessKind.MARTINGALE
                cases += 1
        if not cases:
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no level admits a G0 solution family")
        return self._gated(name, holds, deviation, cases)

    def _nonincreasing(self, rng: np.random.Generator) -> AdaptedProcess:
        tree = self.tree
        slices = [np.ones(1)]
        for m in range(1, tree.depth + 1):
            parent = tree.lift(slices[-1], m - 1, m)
            slices.append(parent * rng.uniform(0.6, 1.0, size=parent.size))
        return AdaptedProcess(tree, tuple(slices))

    def check_generator_regularity(self) -> CheckResult:
        """f * E{xi | F} is a local regular supermartingale for nonincreasing f and xi in G0."""
        name = "generator_regularity"
        rng = self._rng(name)
        g0 = self._g0(self.tree.depth)
        if g0 is None:
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no G0 element at the horizon")
        holds, generators = True, []
        for xi in g0.elements[: self._small_trials]:
            generator = local_regular_generator(self.family, self._nonincreasing(rng), xi)
            holds = holds and generator.decomposition is not None and generator.martingale_verified
            generators.append(generator)
        if holds and len(generators) >= 2:
            combine_class_k(self.family, [(0.5, generators[0].process), (2.0, generators[1].process)])
        return self._gated(name, holds, 0.0, len(generators))

    def check_class_k_representation(self) -> CheckResult:
        """A nonnegative regular supermartingale equals f_0 E{xi | F} minus its nondecreasing part."""
        name = "class_k_representation"
        candidates = [
            c for c in self._regular_cases()
            if min(float(s.min()) for s in c.process.slices) >= 0 and c.process[0][0] > self.tol.input
        ]
        if not candidates:
            return CheckResult(name, CheckStatus.UNTESTABLE, detail="no nonnegative regular process")
        error = 0.0
        for case in candidates:
            error = max(error, represent_supermartingale(self.family, case.process).reconstruction_error)
        return self._asserted(name, error <= self.tol.residual, error, len(candidates))

    def _random_systems(self, rng: np.random.Generator) -> list[ConeSystem]:
        systems = []
        for m in range(2, 6):
            vectors = rng.uniform(0.1, 1.0, size=(2, m))
            target = vectors @ rng.uniform(0.1, 1.0, size=m)
            systems.append(ConeSystem(vectors, target, self.tol))
        g0 = self._g0(self.tree.depth)
        if g0 is not None:
            systems.append(g0.solutions.system)
        return systems

    def check_cone_solution_family(self) -> CheckResult:
        """Every strictly positive solution is a recombination of the basic solutions."""
        name = "cone_solution_family"
        rng = self._rng(name)
        solver = ConeSolver()
        systems = self._random_systems(rng)
        per_system = max(1, self.config.harness.completeness_samples // len(systems))
        deviation, cases, holds = 0.0, 0, True

        for system in systems:
            solutions = solver.solve(system)
            centre = solutions.basic_solutions.mean(axis=0)
            kernel = null_space(system.vectors, rcond=self.tol.rank_cutoff)
            for _ in range(per_system):
                xi = centre
                if kernel.size:
                    direction = kernel @ rng.normal(size=kernel.shape[1])
                    up = [-c / d for c, d in zip(centre, direction) if d < 0]
                    down = [-c / d for c, d in zip(centre, direction) if d > 0]
                    t = rng.uniform(0.9 * max(down, default=0.0), 0.9 * min(up, default=0.0))
                    xi = centre + t * direction
                combined = combine(solutions, gamma_for(solutions, xi))
                deviation = max(deviation, float(np.max(np.abs(combined.vector - xi))))
                holds = holds and not combined.violations
                cases += 1
        holds = holds and deviation <= self.tol.residual
        return self._asserted(name, holds, deviation, cases, f"{len(systems)} systems")


def verify_lemmas(
    family: MeasureFamily,
    config: Optional[Config] = None,
    processes: Optional[dict[str, AdaptedProcess]] = None,
) -> HarnessReport:
    """Run every property check on ``family``; see ``LemmaHarness``."""
    return LemmaHarness(family, config, processes).run()
