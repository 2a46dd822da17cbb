"""Validate a JSON document against one of the shipped schemas.

usage: validate_json.py SCHEMA [FILE]   (reads stdin when FILE is omitted)
"""
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def main(argv):
    if len(argv) not in (2, 3):
        print(__doc__.strip(), file=sys.stderr)
        return 2
    schema_path = pathlib.Path(argv[1])
    resources = []
    for path in schema_path.parent.glob("*.schema.json"):
        contents = json.loads(path.read_text())
        resources.append((path.name, Resource.from_contents(contents)))
    registry = Registry().with_resources(resources)
    schema = json.loads(schema_path.read_text())
    document = json.loads(pathlib.Path(argv[2]).read_text() if len(argv) == 3 else sys.stdin.read())
    validator = jsonschema.Draft202012Validator(schema, registry=registry)
    errors = sorted(validator.iter_errors(document), key=lambda e: list(e.absolute_path))
    for e in errors[:10]:
        location = "/".join(str(p) for p in e.absolute_path) or "(root)"
        print(f"{location}: {e.message}", file=sys.stderr)
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
