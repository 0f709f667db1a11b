#!/usr/bin/env python3
"""
Rewrite the committed test fixtures from the built-in examples.

Usage:
    python scripts/regenerate_fixtures.py [--check]

Options:
    --check   Compare instead of writing; exit 1 when a fixture is stale
"""

import argparse
import json
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from optional_doob import PowerDensitySpec, build_power_density_instance, d1_instance
from optional_doob.conditional import RandomVariable
from optional_doob.instances import d1_process, sup_indicator_process
from optional_doob.measures import check_condition_B, condition_b_archive
from optional_doob.storage import InstanceFile, dump_json, write_json

FIXTURES = Path(__file__).parent.parent / "tests" / "fixtures"


def build_fixtures() -> dict[str, dict]:
    family = d1_instance()
    f = d1_process(family)
    sup_indicator = sup_indicator_process(family)
    d1 = InstanceFile(
        family,
        processes={"f": f, "sup_indicator": sup_indicator},
        random_variables={
            "indicator_leaf_0": RandomVariable([1.0, 0.0, 0.0, 0.0]),
            "ones": RandomVariable([1.0, 1.0, 1.0, 1.0]),
        },
    )

    spec = PowerDensitySpec(2, (0.0, 0.5), 2)
    built = build_power_density_instance(spec)
    archive = condition_b_archive(check_condition_B(built.family))

    return {
        "d1.json": d1.to_dict(),
        "f.json": {"process": f.to_lists()},
        "sup_indicator.json": {"process": sup_indicator.to_lists()},
        "cone_example.json": {"target": [1.0, 1.0], "vectors": [[0.5, 0.6], [0.5, 0.4], [0.25, 0.25]]},
        "power_density_condition_b.json": {**archive, "spec": spec.to_dict()},
    }


def main() -> int:
    parser = argparse.ArgumentParser(description="Regenerate test fixtures")
    parser.add_argument("--check", action="store_true", help="Only report stale fixtures")
    args = parser.parse_args()

    stale = []
    for name, data in build_fixtures().items():
        path = FIXTURES / name
        current = json.loads(path.read_text(encoding="utf-8")) if path.exists() else None
        if current == json.loads(dump_json(data)):
            print(f"   ✅ {name}")
            continue
        stale.append(name)
        if args.check:
            print(f"   ❌ {name} is stale")
        else:
            write_json(path, data)
            print(f"   📝 {name} written")

    return 1 if args.check and stale else 0


if __name__ == "__main__":
    sys.exit(main())
