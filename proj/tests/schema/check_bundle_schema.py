#!/usr/bin/env python3
"""Cross-language contract check for the bundle JSON schema.

Validates the checked-in sample bundle and the bundles exported by the CLI
from every fixture directory, and confirms that known-bad documents are
rejected by the schema.
"""
import argparse
import copy
import json
import pathlib
import subprocess
import sys

import jsonschema


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--schema", required=True)
    ap.add_argument("--cli", required=True)
    ap.add_argument("--fixtures", required=True)
    args = ap.parse_args()

    schema = json.loads(pathlib.Path(args.schema).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    fixtures = pathlib.Path(args.fixtures)
    failures = 0

    def check(name, doc, expect_valid=True):
        nonlocal failures
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        ok = (not errors) if expect_valid else bool(errors)
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
        if not ok:
            failures += 1
            for e in errors[:5]:
                print(f"     {list(e.path)}: {e.message}")

    sample = json.loads((fixtures / "gaussian_bundle.json").read_text())
    check("sample gaussian_bundle.json", sample)

    for d in sorted(p for p in fixtures.iterdir() if (p / "manifest.json").is_file()):
        out = subprocess.run([args.cli, "export-bundle", str(d)], capture_output=True, text=True)
        if out.returncode != 0:
            print(f"FAIL export {d.name}: {out.stderr.strip()}")
            failures += 1
            continue
        check(f"exported {d.name}", json.loads(out.stdout))

    # The CLI must accept what the schema accepts: re-import the sample.
    out = subprocess.run([args.cli, "export-bundle", str(fixtures / "gaussian_bundle.json")],
                         capture_output=True, text=True)
    if out.returncode != 0 or json.loads(out.stdout) != sample:
        print("FAIL sample bundle does not round-trip through the CLI")
        failures += 1
    else:
        print("ok   sample round-trips through the CLI")

    bad = copy.deepcopy(sample)
    del bad["profiles"][0]["gpu_arch"]
    check("profile without gpu_arch rejected", bad, expect_valid=False)
    bad = copy.deepcopy(sample)
    bad["knobs"][0]["type"] = "ordinal"
    check("unknown knob type rejected", bad, expect_valid=False)
    bad = copy.deepcopy(sample)
    bad["profiles"][0]["lines"] = [{"file": "src/gaussian.cu", "line": 0, "metrics": {}}]
    check("line number 0 rejected", bad, expect_valid=False)

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
