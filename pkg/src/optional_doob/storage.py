"""
Optional Doob Core - Instance Files

JSON persistence for trees, measure families, processes and random
variables. Writes are atomic (temp file + rename) and serialized with
sorted keys so identical inputs give byte-identical files.

Instance schema (version 1):

    {
      "schema_version": 1,
      "tree": {"levels": [...], "children": [...]}   or   {"branching": [...]},
      "measures": [[leaf probabilities of P_0], ...],
      "processes": {"name": [[f_0], [f_1 ...], ...]},
      "random_variables": {"name": [leaf values]}
    }

A process file is either a bare list of slices or ``{"process": [...]}``.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union

import numpy as np

from .conditional import RandomVariable
from .config import DEFAULT_TOLERANCES, Tolerances
from .exceptions import DoobError, InstanceFormatError
from .filtration import FiltrationTree
from .measures import MeasureFamily
from .processes import AdaptedProcess

SCHEMA_VERSION = 1

PathLike = Union[str, Path]


def dump_json(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    """
    Write JSON atomically.

    The text goes to a temp file in the target directory which is then
    renamed over the destination.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(suffix=".json.tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(dump_json(data))
        os.replace(temp_path, path)
    except Exception:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise
    return path


def read_json(path: PathLike) -> Any:
    """
    Raises:
        InstanceFormatError: Missing file or invalid JSON.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise InstanceFormatError(path, "file not found") from e
    except json.JSONDecodeError as e:
        raise InstanceFormatError(path, f"invalid JSON at line {e.lineno}: {e.msg}") from e
    except OSError as e:
        raise InstanceFormatError(path, str(e)) from e


@dataclass
class InstanceFile:
    """
    A measure family with named processes and random variables.

    Usage:
        instance = load_instance("d1.json")
        f = instance.process("f")
    """

    family: MeasureFamily
    processes: dict[str, AdaptedProcess] = field(default_factory=dict)
    random_variables: dict[str, RandomVariable] = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    @property
    def tree(self) -> FiltrationTree:
        return self.family.tree

    def process(self, name: str) -> AdaptedProcess:
        try:
            return self.processes[name]
        except KeyError:
            raise InstanceFormatError(name, f"no process named {name!r}") from None

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "tree": self.tree.to_dict(),
            "measures": self.family.leaf_probabilities.tolist(),
            "processes": {name: f.to_lists() for name, f in sorted(self.processes.items())},
            "random_variables": {
                name: xi.values.tolist() for name, xi in sorted(self.random_variables.items())
            },
        }

    @classmethod
    def from_dict(
        cls,
        data: dict,
        source: Any = "<dict>",
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> InstanceFile:
        """
        Parse and validate an instance.

        Raises:
            InstanceFormatError: Unknown schema version, missing keys, or any
                validation error of the tree, measures or processes.
        """
        if not isinstance(data, dict):
            raise InstanceFormatError(source, "instance must be a JSON object")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise InstanceFormatError(source, f"unsupported schema_version {version!r}")
        for key in ("tree", "measures"):
            if key not in data:
                raise InstanceFormatError(source, f"missing key {key!r}")

        try:
            tree = FiltrationTree.from_dict(data["tree"])
            family = MeasureFamily(tree, np.asarray(data["measures"], dtype=float), tolerances)
            processes = {
                str(name): AdaptedProcess.from_lists(tree, slices)
                for name, slices in (data.get("processes") or {}).items()
            }
            variables = {
                str(name): RandomVariable(values)
                for name, values in (data.get("random_variables") or {}).items()
            }
        except DoobError as e:
            raise InstanceFormatError(source, str(e)) from e
        except (TypeError, ValueError) as e:
            raise InstanceFormatError(source, f"malformed values: {e}") from e

        for name, xi in variables.items():
            if xi.values.size != tree.num_leaves:
                raise InstanceFormatError(
                    source, f"random variable {name!r} has {xi.values.size} values, tree has {tree.num_leaves} leaves"
                )
        return cls(family, processes, variables, version)


def load_instance(path: PathLike, tolerances: Tolerances = DEFAULT_TOLERANCES) -> InstanceFile:
    """Read an instance file."""
    return InstanceFile.from_dict(read_json(path), source=Path(path), tolerances=tolerances)


def save_instance(instance: InstanceFile, path: PathLike) -> Path:
    """Write an instance file atomically."""
    return write_json(path, instance.to_dict())


def load_process(path: PathLike, tree: FiltrationTree) -> AdaptedProcess:
    """
    Read a process file for ``tree``.

    Raises:
        InstanceFormatError: Malformed file or slices not matching the tree.
    """
    data = read_json(path)
    slices = data.get("process") if isinstance(data, dict) else data
    if not isinstance(slices, list):
        raise InstanceFormatError(path, "expected a list of slices or {'process': [...]}")
    try:
        return AdaptedProcess.from_lists(tree, slices)
    except DoobError as e:
        raise InstanceFormatError(path, str(e)) from e
    except (TypeError, ValueError) as e:
        raise InstanceFormatError(path, f"malformed values: {e}") from e


def save_process(f: AdaptedProcess, path: PathLike) -> Path:
    return write_json(path, {"process": f.to_lists()})
