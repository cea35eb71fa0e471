"""Validate fixtures and produced files against docs/schemas."""

import json
import sys
from pathlib import Path

import jsonschema
from referencing import Registry, Resource

ROOT = Path(__file__).resolve().parent.parent
SCHEMAS = ROOT / "docs" / "schemas"


def load(path):
    with open(path) as f:
        return json.load(f)


def registry():
    resources = [(p.name, Resource.from_contents(load(p))) for p in SCHEMAS.glob("*.schema.json")]
    return Registry().with_resources(resources)


def main(argv):
    reg = registry()
    jobs = [(p, "action") for p in sorted((ROOT / "data" / "actions").glob("*.json"))]
    jobs += [(p, "scenario") for p in sorted((ROOT / "data" / "scenarios").glob("*.json"))]
    jobs += [(ROOT / "data" / "quadratic_residues_43.json", "pointsets"), (ROOT / "data" / "caps.json", "caps")]
    for out in map(Path, argv[1:]):
        for report in out.rglob("report.json"):
            jobs.append((report, "report"))
        for cert in out.rglob("certificate.json"):
            jobs.append((cert, "certificate"))
        for run in out.rglob("run.json"):
            jobs.append((run, "run"))
        for z in out.rglob("z_action.json"):
            jobs.append((z, "action"))
    failures = 0
    for path, kind in jobs:
        schema = load(SCHEMAS / f"{kind}.schema.json")
        validator = jsonschema.Draft202012Validator(schema, registry=reg)
        errors = list(validator.iter_errors(load(path)))
        for e in errors[:3]:
            print(f"{path}: {kind}: {e.message} at {list(e.absolute_path)}")
        failures += bool(errors)
    print(f"{len(jobs) - failures}/{len(jobs)} documents valid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
