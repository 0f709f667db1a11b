"""
Optional Doob Core - Example Instances

Builders for the power-density family on [0, 1), the two-measure binary
instance used throughout the tests, and seeded random instances for the
property checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .conditional import RandomVariable
from .config import DEFAULT_TOLERANCES, Tolerances
from .decomposition import sup_process
from .exceptions import InstanceSpecError
from .filtration import Atom, FiltrationTree, build_tree
from .logging import get_logger
from .measures import MeasureFamily
from .processes import AdaptedProcess

logger = get_logger(__name__)

D1_MEASURES = (
    (0.25, 0.25, 0.25, 0.25),
    (0.3, 0.2, 0.3, 0.2),
)
D1_PROCESS = ((1.0,), (1.0, 1.0), (0.8, 1.0, 0.9, 1.0))


@dataclass(frozen=True)
class PowerDensitySpec:
    """
    Measures P_i with density i * x^(i-1) on [0, 1), i = 1..k.

    Level-1 atoms are [x_{s-1}, x_s) for consecutive partition points and,
    with ``close_tail``, the tail [x_last, 1); without it the family is
    restricted to [0, x_last) and renormalized. Each deeper level halves
    every interval.
    """

    k: int
    partition_points: tuple[float, ...]
    depth: int
    close_tail: bool = True

    def validate(self) -> None:
        """
        Raises:
            InstanceSpecError: With the first problem found.
        """
        if int(self.k) != self.k or self.k < 1:
            raise InstanceSpecError(f"k must be a positive integer, got {self.k!r}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise InstanceSpecError(f"depth must be a positive integer, got {self.depth!r}")
        points = self.partition_points
        if not points or points[0] != 0:
            raise InstanceSpecError("partition points must start at 0")
        if any(b <= a for a, b in zip(points, points[1:])):
            raise InstanceSpecError(f"partition points {list(points)} are not strictly increasing")
        if points[-1] >= 1:
            raise InstanceSpecError("partition points must lie below 1")
        if not self.close_tail and len(points) < 2:
            raise InstanceSpecError("a truncated partition needs at least two points")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "partition_points": list(self.partition_points),
            "depth": self.depth,
            "close_tail": self.close_tail,
        }


@dataclass
class PowerDensityInstance:
    """Tree, family, leaf intervals and the per-measure renormalization constants."""

    spec: PowerDensitySpec
    tree: FiltrationTree
    family: MeasureFamily
    leaf_intervals: list[tuple[float, float]]
    normalization: list[float] = field(default_factory=list)

    def __iter__(self):
        yield self.tree
        yield self.family


def build_power_density_instance(
    spec: PowerDensitySpec,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> PowerDensityInstance:
    """
    Build the power-density instance, P_i([a, b)) = (b^i - a^i) / upper^i.

    Raises:
        InstanceSpecError: For an invalid spec.
    """
    spec.validate()
    points = [float(x) for x in spec.partition_points]
    upper = 1.0 if spec.close_tail else points[-1]
    edges = points + [1.0] if spec.close_tail else points
    intervals = list(zip(edges[:-1], edges[1:]))

    branching = [len(intervals)] + [2] * (spec.depth - 1)
    tree = build_tree(branching)
    for _ in range(spec.depth - 1):
        intervals = [half for a, b in intervals for half in ((a, (a + b) / 2), ((a + b) / 2, b))]

    lows = np.array([a for a, _ in intervals])
    highs = np.array([b for _, b in intervals])
    powers = np.arange(1, spec.k + 1)[:, None]
    normalization = [upper ** i for i in range(1, spec.k + 1)]
    rows = (highs[None, :] ** powers - lows[None, :] ** powers) / np.array(normalization)[:, None]

    family = MeasureFamily(tree, rows, tolerances)
    logger.info(
        "Power-density instance: k=%d, %d leaves, depth %d", spec.k, tree.num_leaves, tree.depth
    )
    return PowerDensityInstance(spec, tree, family, intervals, normalization)


def d1_instance(tolerances: Tolerances = DEFAULT_TOLERANCES) -> MeasureFamily:
    """Binary tree of depth 2 with P_0 uniform and P_1 = (0.3, 0.2, 0.3, 0.2)."""
    return MeasureFamily(build_tree([2, 2]), D1_MEASURES, tolerances)


def d1_process(family: MeasureFamily) -> AdaptedProcess:
    """The regular supermartingale f_2 = (0.8, 1, 0.9, 1) on the binary instance."""
    return AdaptedProcess.from_lists(family.tree, D1_PROCESS)


def sup_indicator_process(family: MeasureFamily, leaf: int = 0) -> AdaptedProcess:
    """f_m = max_i E^{P_i}{indicator of a leaf | F_m}."""
    tree = family.tree
    return sup_process(family, RandomVariable.indicator(tree, Atom(tree.depth, leaf)))


def random_branching(
    rng: np.random.Generator,
    max_depth: int = 3,
    max_branching: int = 4,
) -> list[int]:
    depth = int(rng.integers(1, max_depth + 1))
    return [int(b) for b in rng.integers(1, max_branching + 1, size=depth)]


def _random_rows(rng: np.random.Generator, k: int, n: int, floor: float) -> np.ndarray:
    rows = (1.0 - floor) * rng.dirichlet(np.ones(n), size=k) + floor / n
    return rows / rows.sum(axis=1, keepdims=True)


def random_instance(
    rng: np.random.Generator,
    max_depth: int = 3,
    max_branching: int = 4,
    max_k: int = 3,
    branching: Optional[Sequence[int]] = None,
    k: Optional[int] = None,
    floor: float = 0.2,
) -> MeasureFamily:
    """
    Random family of equivalent measures on a random uniform tree.

    ``floor`` mixes each Dirichlet draw with the uniform distribution so
    that density ratios stay moderate.
    """
    tree = build_tree(branching if branching is not None else random_branching(rng, max_depth, max_branching))
    k = int(k if k is not None else rng.integers(1, max_k + 1))
    return MeasureFamily(tree, _random_rows(rng, k, tree.num_leaves, floor))


def shared_transition_instance(
    rng: np.random.Generator,
    branching: Sequence[int],
    k: int,
    floor: float = 0.2,
) -> MeasureFamily:
    """
    Measures that differ only in their level-1 marginals.

    Every one-step transition from level 1 on is shared, so the domination
    condition holds with any candidate.
    """
    tree = build_tree(branching)
    marginals = _random_rows(rng, k, tree.level_sizes[1], floor)
    leaf = marginals[:, tree.ancestor_index(tree.depth, 1)]
    for m in range(2, tree.depth + 1):
        transitions = np.concatenate([
            _random_rows(rng, 1, len(kids), floor)[0] for kids in tree.children[m - 1]
        ])
        leaf = leaf * transitions[tree.ancestor_index(tree.depth, m)]
    return MeasureFamily(tree, leaf / leaf.sum(axis=1, keepdims=True))


def identical_instance(
    rng: np.random.Generator,
    branching: Sequence[int],
    k: int,
    floor: float = 0.2,
) -> MeasureFamily:
    """k copies of one random measure."""
    tree = build_tree(branching)
    row = _random_rows(rng, 1, tree.num_leaves, floor)
    return MeasureFamily(tree, np.repeat(row, k, axis=0))


def random_supermartingale(
    family: MeasureFamily,
    rng: np.random.Generator,
    slack: float = 0.1,
    grid: Optional[float] = None,
) -> AdaptedProcess:
    """
    A supermartingale for the family built backwards from random terminal values.

    f_{m-1} is the upper envelope of the conditional expectations of f_m
    plus a random nonnegative slack; with ``grid`` every value is rounded
    up to a multiple of the grid step, so values may exceed 1.
    """
    tree = family.tree

    def snap(values: np.ndarray) -> np.ndarray:
        return np.ceil(values / grid - 1e-9) * grid if grid else values

    terminal = snap(rng.uniform(0.0, 1.0, size=tree.num_leaves))
    slices = [terminal]
    for m in range(tree.depth, 0, -1):
        current = slices[0]
        envelope = np.stack([
            family.tree.aggregate(family.level_probabilities(m)[i] * current, m, m - 1)
            / family.level_probabilities(m - 1)[i]
            for i in range(family.k)
        ]).max(axis=0)
        slices.insert(0, snap(envelope + rng.uniform(0.0, slack, size=envelope.size)))
    return AdaptedProcess(tree, tuple(slices))
