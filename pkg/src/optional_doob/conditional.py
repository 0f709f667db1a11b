"""
Optional Doob Core - Conditional Expectations

Conditional expectations on atomic filtrations under a single measure, a
mixture of the family, the upper envelope over the family, and the
measure-change kernel relating two members of the family.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .exceptions import ConsistencyError, StructureError
from .filtration import FiltrationTree
from .measures import MeasureFamily, check_weights, rn_conditional


@dataclass(frozen=True, eq=False)
class RandomVariable:
    """F_N-measurable random variable: one value per leaf atom."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if not np.isfinite(values).all():
            raise StructureError("Random variable values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, tree: FiltrationTree, value: float) -> RandomVariable:
        return cls(np.full(tree.num_leaves, float(value)))

    @classmethod
    def indicator(cls, tree: FiltrationTree, atom: Sequence[int]) -> RandomVariable:
        """Indicator of an atom, as a leaf vector."""
        atom = tree.check_atom(atom)
        inside = tree.ancestor_index(tree.depth, atom.level) == atom.position
        return cls(inside.astype(float))


@dataclass(frozen=True, eq=False)
class AdaptedValues:
    """Values of an F_level-measurable variable, one per atom of ``level``."""

    level: int
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def at(self, position: int) -> float:
        return float(self.values[position])


VariableLike = Union[RandomVariable, np.ndarray, Sequence[float]]


def leaf_values(tree: FiltrationTree, xi: VariableLike) -> np.ndarray:
    """Leaf vector of a random variable, checked against the tree."""
    values = xi.values if isinstance(xi, RandomVariable) else np.asarray(xi, dtype=float)
    if values.shape != (tree.num_leaves,):
        raise StructureError(
            f"Random variable has {values.size} values, tree has {tree.num_leaves} leaves"
        )
    return values


def expect_under(
    tree: FiltrationTree,
    leaf_row: np.ndarray,
    values: np.ndarray,
    from_level: int,
    to_level: int,
) -> np.ndarray:
    """
    E^Q{X | F_to_level} for an F_from_level-measurable X under the leaf row Q.

    ``to_level`` must not exceed ``from_level``.
    """
    probs_from = tree.aggregate(leaf_row, tree.depth, from_level)
    numerator = tree.aggregate(probs_from * values, from_level, to_level)
    return numerator / tree.aggregate(leaf_row, tree.depth, to_level)


def cond_exp_values(
    family: MeasureFamily,
    measure_index: int,
    values: np.ndarray,
    from_level: int,
    to_level: int,
) -> np.ndarray:
    """E^{P_i}{X | F_to_level} for X given by its per-atom values at ``from_level``."""
    i = family.check_measure(measure_index)
    probs = family.level_probabilities(from_level)[i]
    numerator = family.tree.aggregate(probs * np.asarray(values, dtype=float), from_level, to_level)
    return numerator / family.level_probabilities(to_level)[i]


def cond_exp(
    family: MeasureFamily,
    measure_index: int,
    xi: VariableLike,
    level: int,
) -> AdaptedValues:
    """
    E^{P_i}{xi | F_level}.

    On atom A the value is sum over leaves e in A of P_i(e) xi(e) / P_i(A);
    at level 0 it is the plain expectation.
    """
    values = leaf_values(family.tree, xi)
    return AdaptedValues(
        level, cond_exp_values(family, measure_index, values, family.tree.depth, level)
    )


def cond_exp_all(family: MeasureFamily, xi: VariableLike, level: int) -> np.ndarray:
    """Array (k, atoms at ``level``) of E^{P_i}{xi | F_level} for every extreme measure."""
    values = leaf_values(family.tree, xi)
    depth = family.tree.depth
    return np.stack([cond_exp_values(family, i, values, depth, level) for i in range(family.k)])


def cond_exp_mixture(
    family: MeasureFamily,
    weights: Sequence[float],
    xi: VariableLike,
    level: int,
) -> AdaptedValues:
    """
    E^Q{xi | F_level} for Q = sum_i alpha_i P_i.

    Computed directly under the mixture row and again from the extreme
    measures' conditional expectations weighted by alpha_i E^{P_0}{dP_i/dP_0 | F_level};
    the two must agree.

    Raises:
        WeightError: Invalid weights.
        ConsistencyError: If the two computations disagree.
    """
    alpha = check_weights(family, weights)
    tree = family.tree
    values = leaf_values(tree, xi)
    direct = expect_under(tree, alpha @ family.leaf_probabilities, values, tree.depth, level)

    densities = np.stack([rn_conditional(family, i, 0, level) for i in range(family.k)])
    weighted = alpha[:, None] * densities
    via_ratio = (weighted * cond_exp_all(family, values, level)).sum(axis=0) / weighted.sum(axis=0)

    deviation = float(np.max(np.abs(direct - via_ratio)))
    scale = max(1.0, float(np.max(np.abs(values))))
    if deviation > family.tolerances.identity * scale:
        raise ConsistencyError("mixture conditional expectation", deviation)
    return AdaptedValues(level, direct)


def sup_cond_exp(family: MeasureFamily, xi: VariableLike, level: int) -> AdaptedValues:
    """Upper envelope max_i E^{P_i}{xi | F_level}, attained at a vertex of the family."""
    return AdaptedValues(level, cond_exp_all(family, xi, level).max(axis=0))


def measure_change_kernel(family: MeasureFamily, i: int, other: int, level: int) -> RandomVariable:
    """
    The kernel (dP_i/dP_other) / E^{P_other}{dP_i/dP_other | F_level} as a leaf vector.

    E^{P_i}{eta | F_level} = E^{P_other}{eta * kernel | F_level} for every eta.
    """
    tree = family.tree
    leaf_ratio = rn_conditional(family, i, other, tree.depth)
    coarse = tree.lift(rn_conditional(family, i, other, level), level, tree.depth)
    return RandomVariable(leaf_ratio / coarse)