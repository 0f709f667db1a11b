"""
Optional Doob Core - Filtration Trees

Finite-depth atomic filtrations. Level ``n`` is a partition of the sample
space into atoms; every atom at level ``n`` is the disjoint union of its
children at level ``n + 1``. Level 0 is the single atom Omega and the
leaves (level ``depth``) carry all probability mass.

Atoms are addressed by ``Atom(level, position)`` with 0-based positions
assigned left to right.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np

from .exceptions import AtomLookupError, StructureError, TreeConstructionError
from .reports import ClauseResult, ConditionReport


class Atom(NamedTuple):
    """Canonical atom identity: (level, position)."""

    level: int
    position: int

    def __str__(self) -> str:
        return f"A({self.level},{self.position})"


@dataclass(frozen=True)
class FiltrationTree:
    """
    Immutable atomic filtration truncated at ``depth``.

    ``children[n][s]`` lists the level-``n+1`` positions making up atom
    ``(n, s)``. The constructor accepts malformed structures so that
    ``check_condition_A`` can report on them; every numerical module
    requires a tree that passes the check.

    Usage:
        tree = build_tree([2, 2])
        tree.children_of(Atom(1, 0))   # (Atom(2, 0), Atom(2, 1))
        tree.parent_of(Atom(2, 3))     # Atom(1, 1)
    """

    level_sizes: tuple[int, ...]
    children: tuple[tuple[tuple[int, ...], ...], ...]
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    @property
    def depth(self) -> int:
        """Truncation horizon N; levels are 0..N."""
        return len(self.level_sizes) - 1

    @property
    def num_leaves(self) -> int:
        """Number of atoms at the deepest level."""
        return self.level_sizes[-1]

    def atoms(self, level: int) -> list[Atom]:
        """All atoms of a level, left to right."""
        self._check_level(level)
        return [Atom(level, s) for s in range(self.level_sizes[level])]

    def check_atom(self, atom: Sequence[int]) -> Atom:
        """
        Normalize and validate an atom reference.

        Raises:
            AtomLookupError: If the atom is not part of this tree.
        """
        try:
            level, position = int(atom[0]), int(atom[1])
        except (TypeError, ValueError, IndexError) as e:
            raise AtomLookupError(atom, f"Malformed atom reference {atom!r}") from e
        if not 0 <= level <= self.depth or not 0 <= position < self.level_sizes[level]:
            raise AtomLookupError(atom)
        return Atom(level, position)

    def children_of(self, atom: Sequence[int]) -> tuple[Atom, ...]:
        """Children of a non-leaf atom (empty for leaves)."""
        atom = self.check_atom(atom)
        if atom.level == self.depth:
            return ()
        return tuple(Atom(atom.level + 1, j) for j in self.children[atom.level][atom.position])

    def parent_of(self, atom: Sequence[int]) -> Atom:
        """Parent of a non-root atom."""
        atom = self.check_atom(atom)
        if atom.level == 0:
            raise AtomLookupError(atom, "The root atom has no parent")
        return Atom(atom.level - 1, int(self.parent_index(atom.level)[atom.position]))

    def parent_index(self, level: int) -> np.ndarray:
        """Array mapping each atom of ``level`` (>= 1) to its parent's position."""
        self._check_level(level)
        if level == 0:
            raise StructureError("Level 0 has no parents")
        key = ("parent", level)
        if key not in self._cache:
            parents = np.full(self.level_sizes[level], -1, dtype=np.intp)
            for s, kids in enumerate(self.children[level - 1]):
                for j in kids:
                    if not 0 <= j < self.level_sizes[level] or parents[j] != -1:
                        raise StructureError(
                            f"Child index {j} of atom {Atom(level - 1, s)} is out of range or shared"
                        )
                    parents[j] = s
            if (parents < 0).any():
                missing = int(np.flatnonzero(parents < 0)[0])
                raise StructureError(f"Atom {Atom(level, missing)} has no parent")
            parents.setflags(write=False)
            self._cache[key] = parents
        return self._cache[key]

    def ancestor_index(self, level: int, ancestor_level: int) -> np.ndarray:
        """Array mapping each atom of ``level`` to its ancestor's position at ``ancestor_level``."""
        self._check_level(level)
        self._check_level(ancestor_level)
        if ancestor_level > level:
            raise StructureError(f"Ancestor level {ancestor_level} is finer than level {level}")
        key = ("ancestor", level, ancestor_level)
        if key not in self._cache:
            index = np.arange(self.level_sizes[level], dtype=np.intp)
            for n in range(level, ancestor_level, -1):
                index = self.parent_index(n)[index]
            index.setflags(write=False)
            self._cache[key] = index
        return self._cache[key]

    def aggregate(self, values: np.ndarray, from_level: int, to_level: int) -> np.ndarray:
        """
        Sum additive per-atom values of ``from_level`` up to ``to_level`` atoms.

        ``values`` may be 1-D (one row) or 2-D (rows of per-atom values).
        """
        values = np.asarray(values, dtype=float)
        index = self.ancestor_index(from_level, to_level)
        size = self.level_sizes[to_level]
        if values.ndim == 1:
            return np.bincount(index, weights=values, minlength=size)
        return np.stack([np.bincount(index, weights=row, minlength=size) for row in values])

    def lift(self, values: np.ndarray, from_level: int, to_level: int) -> np.ndarray:
        """Spread per-atom values of ``from_level`` to the finer atoms of ``to_level``."""
        values = np.asarray(values, dtype=float)
        return values[..., self.ancestor_index(to_level, from_level)]

    def to_dict(self) -> dict:
        """JSON-ready representation."""
        return {
            "depth": self.depth,
            "levels": list(self.level_sizes),
            "children": [[list(kids) for kids in level] for level in self.children],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FiltrationTree:
        """
        Build a tree from its JSON representation.

        Accepts either ``{"levels": [...], "children": [...]}`` or the
        shorthand ``{"branching": [...]}``.
        """
        if "branching" in data:
            return build_tree(data["branching"])
        try:
            levels = tuple(int(n) for n in data["levels"])
            children = tuple(
                tuple(tuple(int(j) for j in kids) for kids in level) for level in data["children"]
            )
        except (KeyError, TypeError, ValueError) as e:
            raise TreeConstructionError(f"Malformed tree description: {e}") from e
        if "depth" in data and int(data["depth"]) != len(levels) - 1:
            raise TreeConstructionError(
                f"Declared depth {data['depth']} does not match {len(levels)} levels"
            )
        if len(children) != len(levels) - 1:
            raise TreeConstructionError(
                f"Expected {len(levels) - 1} children lists, got {len(children)}"
            )
        return cls(level_sizes=levels, children=children)

    def _check_level(self, level: int) -> None:
        if not 0 <= level <= self.depth:
            raise StructureError(f"Level {level} outside 0..{self.depth}")


def build_tree(branching: Sequence[int | Sequence[int]]) -> FiltrationTree:
    """
    Build a tree level by level from child counts.

    Each entry is either one count shared by every atom of that level or a
    sequence with one count per atom, left to right.

    Args:
        branching: Per-level child counts; its length is the depth.

    Returns:
        A tree passing ``check_condition_A``.

    Raises:
        TreeConstructionError: If the list is empty, a count is below 1, or a
            per-atom sequence does not match the number of atoms.

    Example:
        build_tree([3, [1, 2, 3]]).level_sizes   # (1, 3, 6)
    """
    branching = list(branching)
    if not branching:
        raise TreeConstructionError("Branching list must not be empty")

    sizes = [1]
    children = []
    for n, entry in enumerate(branching):
        counts = [entry] * sizes[-1] if np.isscalar(entry) else list(entry)
        if len(counts) != sizes[-1]:
            raise TreeConstructionError(
                f"Level {n} has {sizes[-1]} atoms but {len(counts)} child counts"
            )
        for count in counts:
            if int(count) != count or count < 1:
                raise TreeConstructionError(f"Child count at level {n} must be a positive integer")
        bounds = np.concatenate([[0], np.cumsum(counts)]).astype(int)
        children.append(tuple(
            tuple(range(bounds[s], bounds[s + 1])) for s in range(sizes[-1])
        ))
        sizes.append(int(bounds[-1]))
    return FiltrationTree(level_sizes=tuple(sizes), children=tuple(children))


def check_condition_A(tree: FiltrationTree) -> ConditionReport:
    """
    Check the atomic-filtration condition clause by clause.

    Clauses: a single root atom; refinement nesting (every atom has at least
    one in-range child); disjointness of the children index sets; covering
    of each finer level. The generated-sigma-algebra clause holds vacuously
    at finite depth and is reported as such. Malformed structures are
    reported, never raised.
    """
    clauses = [ClauseResult(
        clause="single_root",
        level=0,
        passed=len(tree.level_sizes) > 0 and tree.level_sizes[0] == 1,
        detail=f"level 0 has {tree.level_sizes[0] if tree.level_sizes else 0} atom(s)",
    )]

    for n in range(tree.depth):
        level_children = tree.children[n] if n < len(tree.children) else ()
        size, finer = tree.level_sizes[n], tree.level_sizes[n + 1]

        nesting_problems = []
        if len(level_children) != size:
            nesting_problems.append(f"{len(level_children)} children lists for {size} atoms")
        for s, kids in enumerate(level_children):
            if not kids:
                nesting_problems.append(f"{Atom(n, s)} has no child")
            out_of_range = [j for j in kids if not 0 <= j < finer]
            if out_of_range:
                nesting_problems.append(f"{Atom(n, s)} lists unknown children {out_of_range}")
        clauses.append(ClauseResult(
            clause="refinement_nesting",
            level=n,
            passed=not nesting_problems,
            detail="; ".join(nesting_problems),
        ))

        owners: dict[int, list[int]] = {}
        for s, kids in enumerate(level_children):
            for j in kids:
                owners.setdefault(j, []).append(s)
        shared = {j: ss for j, ss in owners.items() if len(ss) > 1}
        clauses.append(ClauseResult(
            clause="disjointness",
            level=n,
            passed=not shared,
            detail="; ".join(
                f"{Atom(n + 1, j)} shared by positions {ss}" for j, ss in sorted(shared.items())
            ),
        ))

        missing = sorted(set(range(finer)) - set(owners))
        clauses.append(ClauseResult(
            clause="covering",
            level=n + 1,
            passed=not missing,
            detail=f"uncovered positions {missing}" if missing else "",
        ))

    clauses.append(ClauseResult(
        clause="generated_sigma_algebra",
        level=None,
        passed=True,
        detail="vacuously satisfied at finite depth",
    ))

    return ConditionReport(
        condition="A",
        passed=all(c.passed for c in clauses),
        clauses=clauses,
    )
