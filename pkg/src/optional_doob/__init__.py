"""
Optional Doob Core

Supermartingales relative to a convex family of equivalent probability
measures on a finite atomic filtration: condition checks, conditional
expectations under measure change, the optional Doob decomposition, and
the solution family of positive moment systems behind G0.

Basic Usage:
    from optional_doob import build_tree, MeasureFamily, AdaptedProcess, decompose

    tree = build_tree([2, 2])
    family = MeasureFamily(tree, [[0.25] * 4, [0.3, 0.2, 0.3, 0.2]])
    f = AdaptedProcess.from_lists(tree, [[1.0], [1.0, 1.0], [0.8, 1.0, 0.9, 1.0]])
    result = decompose(family, f)
    result.increments[2]    # [0.2, 0.0, 0.1, 0.0]

Components:
    - filtration: FiltrationTree, atoms, condition A
    - measures: MeasureFamily, equivalence bounds, condition B
    - conditional: conditional expectations and measure change
    - processes: adapted processes and their classification
    - cone_solver: basic nonnegative solutions of moment systems
    - decomposition: regularity test and optional Doob decomposition
    - gzero: G0, generators and the class-K representation
    - harness: property checks over one instance
"""

__version__ = "0.1.0"
__author__ = "Optional Doob Core Team"

# Structure
from .conditional import (
    AdaptedValues,
    RandomVariable,
    cond_exp,
    cond_exp_mixture,
    measure_change_kernel,
    sup_cond_exp,
)
# Solving
from .cone_solver import (
    CombinedSolution,
    ConeSolver,
    ConeSystem,
    SolutionFamily,
    combine,
    gamma_for,
    homogeneous_solution,
)
from .config import Config, HarnessConfig, Tolerances, load_config
from .decomposition import (
    OptionalDecomposition,
    RegularityReport,
    check_sup_process_regularity,
    decompose,
    lattice_oracle,
    test_regularity,
)
from .exceptions import (
    ConeMembershipError,
    ConsistencyError,
    DoobError,
    InstanceFormatError,
    NotRegularError,
    PreconditionError,
)
from .filtration import Atom, FiltrationTree, build_tree, check_condition_A
from .gzero import (
    GZeroElement,
    combine_class_k,
    g0_element,
    local_regular_generator,
    represent_supermartingale,
    solve_g0,
)

# Verification and examples
from .harness import HarnessReport, LemmaHarness, verify_lemmas
from .instances import PowerDensitySpec, build_power_density_instance, d1_instance
from .logging import get_logger, setup_logging
from .measures import (
    MeasureFamily,
    check_condition_B,
    equivalence_bounds,
    mixture,
)
from .processes import (
    AdaptedProcess,
    ProcessKind,
    check_drift_bound,
    classify,
    stop,
)
from .reports import CheckResult, CheckStatus, ConditionReport
from .storage import InstanceFile, load_instance, save_instance

__all__ = [
    "__version__",
    # Structure
    "Atom",
    "FiltrationTree",
    "build_tree",
    "check_condition_A",
    "MeasureFamily",
    "equivalence_bounds",
    "check_condition_B",
    "mixture",
    "RandomVariable",
    "AdaptedValues",
    "cond_exp",
    "cond_exp_mixture",
    "sup_cond_exp",
    "measure_change_kernel",
    "AdaptedProcess",
    "ProcessKind",
    "classify",
    "stop",
    "check_drift_bound",
    # Solving
    "ConeSystem",
    "ConeSolver",
    "SolutionFamily",
    "CombinedSolution",
    "combine",
    "gamma_for",
    "homogeneous_solution",
    "RegularityReport",
    "OptionalDecomposition",
    "test_regularity",
    "decompose",
    "check_sup_process_regularity",
    "lattice_oracle",
    "GZeroElement",
    "g0_element",
    "solve_g0",
    "local_regular_generator",
    "combine_class_k",
    "represent_supermartingale",
    # Verification and examples
    "LemmaHarness",
    "HarnessReport",
    "verify_lemmas",
    "PowerDensitySpec",
    "build_power_density_instance",
    "d1_instance",
    "InstanceFile",
    "load_instance",
    "save_instance",
    # Reports, errors, plumbing
    "CheckStatus",
    "CheckResult",
    "ConditionReport",
    "DoobError",
    "ConsistencyError",
    "ConeMembershipError",
    "NotRegularError",
    "PreconditionError",
    "InstanceFormatError",
    "Config",
    "Tolerances",
    "HarnessConfig",
    "load_config",
    "setup_logging",
    "get_logger",
]
