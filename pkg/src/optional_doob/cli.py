"""
Optional Doob Core - Command Line Interface

Usage:
    optional-doob check INSTANCE
    optional-doob decompose INSTANCE --process f.json
    optional-doob g0 INSTANCE --level 2
    optional-doob cone-solve SYSTEM
    optional-doob represent INSTANCE --process f.json
    optional-doob verify-lemmas INSTANCE --seed 7 --trials 50
    optional-doob gen-example power-density --k 3 --points 0,0.5,0.75 --depth 2 --out file.json
    optional-doob gen-example d1 --out d1.json

Every subcommand accepts --output {table,json}, --tolerance, --seed,
--trials and --log-level. Exit codes: 0 success, 1 negative verdict,
2 usage or input error. Logs go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import pandas as pd

from . import __version__
from .cone_solver import ConeSolver, ConeSystem
from .config import Config, LogLevel, OutputFormat, load_config
from .decomposition import OptionalDecomposition, RegularityReport, decompose
from .exceptions import (
    ConeMembershipError,
    ConsistencyError,
    DoobError,
    InstanceFormatError,
    NotRegularError,
)
from .filtration import FiltrationTree, check_condition_A
from .gzero import represent_supermartingale, solve_g0
from .harness import HarnessReport, verify_lemmas
from .instances import (
    PowerDensitySpec,
    build_power_density_instance,
    d1_instance,
    d1_process,
    sup_indicator_process,
)
from .logging import get_logger, setup_logging
from .measures import check_condition_B, condition_b_archive, equivalence_bounds
from .processes import AdaptedProcess
from .reports import ConditionReport, rounded
from .storage import InstanceFile, dump_json, load_instance, load_process, read_json, save_instance

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

logger = get_logger(__name__)


class CommandResult:
    """Payload for JSON output, tables for the human-readable view, and the exit code."""

    def __init__(
        self,
        payload: dict,
        tables: Optional[list[tuple[str, pd.DataFrame]]] = None,
        code: int = EXIT_OK,
        text: Optional[str] = None,
    ):
        self.payload = payload
        self.tables = tables or []
        self.code = code
        self.text = text


# ----------------------------------------------------------------------
# Rendering
# ----------------------------------------------------------------------


def _fmt(value: Any) -> Any:
    value = rounded(value)
    if isinstance(value, list):
        return "(" + ", ".join(str(_fmt(v)) for v in value) + ")"
    return value


def _frame(rows: list[dict]) -> pd.DataFrame:
    return pd.DataFrame([{key: _fmt(value) for key, value in row.items()} for row in rows])


def _render(result: CommandResult, output: OutputFormat) -> None:
    if result.text is not None:
        sys.stdout.write(result.text)
        return
    if output == OutputFormat.JSON:
        sys.stdout.write(dump_json(rounded(result.payload)))
        return
    for title, frame in result.tables:
        print(f"\n{title}")
        print("-" * max(len(title), 20))
        print(frame.to_string(index=False) if not frame.empty else "(none)")
    print()


def _process_rows(tree: FiltrationTree, columns: dict[str, AdaptedProcess]) -> list[dict]:
    rows = []
    for m in range(tree.depth + 1):
        for atom in tree.atoms(m):
            row: dict[str, Any] = {"level": m, "atom": atom.position}
            row.update({name: f[m][atom.position] for name, f in columns.items()})
            rows.append(row)
    return rows


def _condition_b_rows(report: ConditionReport) -> list[dict]:
    return [
        {
            "candidate": candidate,
            "measure": v.measure,
            "parent": list(v.parent),
            "child": list(v.child),
            "ratio": v.ratio,
            "dominating": v.dominating_ratio,
        }
        for candidate, items in sorted(report.violations.items())
        for v in items
    ]


def _cell_rows(report: RegularityReport) -> list[dict]:
    return [
        {
            "level": c.level,
            "parent": list(c.parent),
            "status": c.status.value,
            "method": c.method.value if c.method else "",
            "drift": c.drift,
            "solution": c.solution if c.solution is not None else "",
        }
        for c in report.cells
    ]


# ----------------------------------------------------------------------
# Input helpers
# ----------------------------------------------------------------------


def _load(args: argparse.Namespace, config: Config) -> InstanceFile:
    return load_instance(args.instance, config.tolerances)


def _resolve_process(instance: InstanceFile, reference: str) -> AdaptedProcess:
    """A path to a process file, or the name of a process stored in the instance."""
    if Path(reference).is_file():
        return load_process(reference, instance.tree)
    if reference in instance.processes:
        return instance.processes[reference]
    raise InstanceFormatError(reference, "neither a process file nor a process in the instance")


def _points(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid partition points {text!r}") from e


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def cmd_check(args: argparse.Namespace, config: Config) -> CommandResult:
    """Filtration condition, equivalence bounds and the domination condition."""
    data = read_json(args.instance)
    if not isinstance(data, dict) or "tree" not in data:
        raise InstanceFormatError(args.instance, "missing key 'tree'")
    try:
        tree = FiltrationTree.from_dict(data["tree"])
    except DoobError as e:
        raise InstanceFormatError(args.instance, str(e)) from e

    condition_a = check_condition_A(tree)
    clause_rows = [c.to_dict() for c in condition_a.clauses]
    if not condition_a.passed:
        return CommandResult(
            {"condition_a": condition_a.to_dict()},
            [("Condition A", _frame(clause_rows))],
            EXIT_NEGATIVE,
        )

    instance = _load(args, config)
    bounds = equivalence_bounds(instance.family)
    condition_b = check_condition_B(instance.family, start_level=args.start_level)
    payload = {
        "condition_a": condition_a.to_dict(),
        "equivalence": bounds.to_dict(),
        "condition_b": condition_b.to_dict(),
    }
    candidates = [
        {"candidate": i0, "passes": not items, "violations": len(items)}
        for i0, items in sorted(condition_b.violations.items())
    ]
    tables = [
        ("Condition A", _frame(clause_rows)),
        ("Equivalence bounds", _frame([bounds.to_dict()])),
        (f"Condition B from level {condition_b.start_level}", _frame(candidates)),
        ("Condition B violations", _frame(_condition_b_rows(condition_b))),
    ]
    code = EXIT_NEGATIVE if args.require_condition_b and not condition_b.passed else EXIT_OK
    return CommandResult(payload, tables, code)


def _not_regular(e: NotRegularError) -> CommandResult:
    report: RegularityReport = e.report
    failing = [{"level": c.level, "parent": list(c.parent), "status": c.status.value} for c in report.failing_cells]
    return CommandResult(
        {"regular": False, "report": report.to_dict()},
        [
            (f"Not regular ({report.kind.value})", _frame(failing)),
            ("Cells", _frame(_cell_rows(report))),
        ],
        EXIT_NEGATIVE,
    )


def cmd_decompose(args: argparse.Namespace, config: Config) -> CommandResult:
    """Optional Doob decomposition of one process."""
    instance = _load(args, config)
    f = _resolve_process(instance, args.process)
    try:
        result: OptionalDecomposition = decompose(instance.family, f)
    except NotRegularError as e:
        return _not_regular(e)

    payload = {"regular": True, "report": result.report.to_dict(), "decomposition": result.to_dict()}
    columns = {"f": f, "increment": result.increments, "g": result.cumulative, "M": result.martingale_part}
    return CommandResult(payload, [
        ("Cells", _frame(_cell_rows(result.report))),
        ("Decomposition f = M - g", _frame(_process_rows(instance.tree, columns))),
    ])


def cmd_g0(args: argparse.Namespace, config: Config) -> CommandResult:
    """Basic nonnegative solutions of sum_j P_i(A_j) xi_j = 1 at one level."""
    instance = _load(args, config)
    level = instance.tree.depth if args.level is None else args.level
    instance.tree.atoms(level)
    try:
        g0 = solve_g0(instance.family, level)
    except ConeMembershipError as e:
        return CommandResult(
            {"level": level, "solved": False, "reason": e.reason, "margins": e.margins},
            [(f"No G0 solution family at level {level}", _frame([{"reason": e.reason}]))],
            EXIT_NEGATIVE,
        )
    return CommandResult({"solved": True, **g0.to_dict()}, _solution_tables(g0.solutions, "atom"))


def _solution_tables(solutions, column: str) -> list[tuple[str, pd.DataFrame]]:
    labels = ["z_r"] + [f"z_{i}" for i in solutions.non_basis_indices]
    basic = pd.DataFrame(
        np.round(solutions.basic_solutions, 12),
        index=labels,
        columns=[f"{column} {j}" for j in range(solutions.basic_solutions.shape[1])],
    ).reset_index(names="solution")
    summary = [{
        "rank": solutions.rank,
        "basis": list(solutions.basis_indices),
        "coefficients": solutions.coefficients,
        "y_star": [solutions.y_star[i] for i in solutions.non_basis_indices],
    }]
    return [("Solution family", _frame(summary)), ("Basic solutions", basic)]


def cmd_cone_solve(args: argparse.Namespace, config: Config) -> CommandResult:
    """Solve a moment system read from {"vectors": [a_1, ...], "target": a_0, "basis": [...]}."""
    data = read_json(args.system)
    try:
        system = ConeSystem.from_vectors(data["vectors"], data["target"], config.tolerances)
        basis = data.get("basis")
    except (KeyError, TypeError, AttributeError) as e:
        raise InstanceFormatError(args.system, f"expected 'vectors' and 'target': {e}") from e
    try:
        solutions = ConeSolver().solve(system, basis=basis)
    except ConeMembershipError as e:
        return CommandResult(
            {"solved": False, "reason": e.reason, "margins": e.margins},
            [("Target not strictly inside a basis cone", _frame([{"reason": e.reason}]))],
            EXIT_NEGATIVE,
        )
    return CommandResult({"solved": True, **solutions.to_dict()}, _solution_tables(solutions, "a"))


def cmd_represent(args: argparse.Namespace, config: Config) -> CommandResult:
    """f = f_0 * E{xi | F} - g for a nonnegative regular supermartingale."""
    instance = _load(args, config)
    f = _resolve_process(instance, args.process)
    try:
        representation = represent_supermartingale(instance.family, f)
    except NotRegularError as e:
        return _not_regular(e)
    columns = {
        "f": f,
        "martingale": representation.martingale_part,
        "nonincreasing": representation.nonincreasing_part,
    }
    return CommandResult(representation.to_dict(), [
        ("Representation", _frame([{
            "xi": representation.xi.values,
            "reconstruction_error": representation.reconstruction_error,
        }])),
        ("Parts", _frame(_process_rows(instance.tree, columns))),
    ])


def cmd_verify_lemmas(args: argparse.Namespace, config: Config) -> CommandResult:
    """Run the full property harness on an instance."""
    instance = _load(args, config)
    report: HarnessReport = verify_lemmas(instance.family, config, instance.processes)
    rows = [
        {
            "check": c.name,
            "status": c.status.value,
            "conclusion": "" if c.conclusion_holds is None else c.conclusion_holds,
            "deviation": c.max_deviation,
            "cases": c.cases,
            "detail": c.detail,
        }
        for c in report.checks
    ]
    code = EXIT_NEGATIVE if report.failed else EXIT_OK
    if args.require_condition_b and not report.condition_b.passed:
        code = EXIT_NEGATIVE
    return CommandResult(report.to_dict(), [
        ("Instance", _frame([{
            "depth": report.instance["depth"],
            "levels": report.instance["level_sizes"],
            "measures": report.instance["measures"],
            "condition_b": report.condition_b.passed,
            "seed": report.seed,
        }])),
        ("Checks", _frame(rows)),
    ], code)


def cmd_gen_example(args: argparse.Namespace, config: Config) -> CommandResult:
    """Write an example instance file (or print it when --out is omitted)."""
    if args.example == "power-density":
        spec = PowerDensitySpec(args.k, args.points, args.depth, close_tail=not args.truncate)
        built = build_power_density_instance(spec, config.tolerances)
        instance = InstanceFile(built.family)
        summary = {
            "example": "power-density",
            "spec": spec.to_dict(),
            "leaves": built.tree.num_leaves,
            "normalization": built.normalization,
            "condition_b": condition_b_archive(check_condition_B(built.family)),
        }
    else:
        family = d1_instance(config.tolerances)
        instance = InstanceFile(
            family,
            processes={"f": d1_process(family), "sup_indicator": sup_indicator_process(family)},
        )
        summary = {
            "example": "d1",
            "leaves": family.tree.num_leaves,
            "condition_b": condition_b_archive(check_condition_B(family)),
        }

    if args.out is None:
        return CommandResult(instance.to_dict(), text=dump_json(instance.to_dict()))
    path = save_instance(instance, args.out)
    logger.info("Wrote %s", path)
    summary["path"] = str(path)
    return CommandResult(summary, [("Example written", _frame([{
        "path": str(path),
        "example": summary["example"],
        "leaves": summary["leaves"],
        "condition_b": summary["condition_b"]["passed"],
    }]))])


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=["table", "json"], default=None, help="Report format")
    common.add_argument("--tolerance", type=float, default=None, help="Inequality and feasibility tolerance")
    common.add_argument("--seed", type=int, default=None, help="Seed for randomized checks")
    common.add_argument("--trials", type=int, default=None, help="Random variables per randomized check")
    common.add_argument(
        "--log-level", choices=[level.value for level in LogLevel], type=str.upper, default=None,
    )

    parser = argparse.ArgumentParser(
        prog="optional-doob",
        description="Supermartingales for convex families of equivalent measures on finite filtrations",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("check", parents=[common], help="Check conditions A and B and equivalence bounds")
    p.add_argument("instance")
    p.add_argument("--start-level", type=int, default=1, help="First level constrained by condition B")
    p.add_argument("--require-condition-b", action="store_true", help="Exit 1 when condition B fails")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("decompose", parents=[common], help="Optional Doob decomposition of a process")
    p.add_argument("instance")
    p.add_argument("--process", required=True, help="Process file or name of a process in the instance")
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("g0", parents=[common], help="Solution family of the G0 normalization system")
    p.add_argument("instance")
    p.add_argument("--level", type=int, default=None, help="Level of the atoms (default: depth)")
    p.set_defaults(handler=cmd_g0)

    p = sub.add_parser("cone-solve", parents=[common], help="Basic solutions of a moment system")
    p.add_argument("system")
    p.set_defaults(handler=cmd_cone_solve)

    p = sub.add_parser("represent", parents=[common], help="Representation of a nonnegative regular supermartingale")
    p.add_argument("instance")
    p.add_argument("--process", required=True, help="Process file or name of a process in the instance")
    p.set_defaults(handler=cmd_represent)

    p = sub.add_parser("verify-lemmas", parents=[common], help="Run every property check")
    p.add_argument("instance")
    p.add_argument("--require-condition-b", action="store_true", help="Exit 1 when condition B fails")
    p.set_defaults(handler=cmd_verify_lemmas)

    p = sub.add_parser("gen-example", help="Generate an example instance")
    examples = p.add_subparsers(dest="example", metavar="EXAMPLE")
    e = examples.add_parser("power-density", parents=[common], help="Densities i * x^(i-1) on [0, 1)")
    e.add_argument("--k", type=int, required=True)
    e.add_argument("--points", type=_points, required=True, help="Comma-separated partition points")
    e.add_argument("--depth", type=int, required=True)
    e.add_argument("--truncate", action="store_true", help="Drop the tail atom and renormalize")
    e.add_argument("--out", type=Path, default=None)
    e.set_defaults(handler=cmd_gen_example)
    e = examples.add_parser("d1", parents=[common], help="Two measures on a binary tree of depth 2")
    e.add_argument("--out", type=Path, default=None)
    e.set_defaults(handler=cmd_gen_example)

    return parser


def _config(args: argparse.Namespace) -> Config:
    config = load_config().with_overrides(
        tolerance=args.tolerance,
        seed=args.seed,
        trials=args.trials,
        output_format=OutputFormat[args.output.upper()] if args.output else None,
        log_level=LogLevel[args.log_level] if args.log_level else None,
    )
    errors = config.validate()
    if errors:
        raise ValueError("; ".join(errors))
    return config


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    if not hasattr(args, "handler"):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    try:
        config = _config(args)
    except ValueError as e:
        print(f"optional-doob: invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(
        log_dir=config.get_log_dir(),
        log_level=config.log_level.value,
        log_to_file=config.log_to_file,
    )

    try:
        result = args.handler(args, config)
    except ConsistencyError as e:
        logger.error("Internal consistency check failed: %s", e, exc_info=True)
        print(f"optional-doob: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except DoobError as e:
        logger.debug("Input error", exc_info=True)
        print(f"optional-doob: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE

    _render(result, config.output_format)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
