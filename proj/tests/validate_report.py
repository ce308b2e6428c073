"""Runs the command line tool on small configurations and validates every report against the schema."""
import json
import pathlib
import subprocess
import sys

import jsonschema


def main() -> int:
    cli, schema_path, workdir = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    workdir.mkdir(parents=True, exist_ok=True)
    schema = json.loads(schema_path.read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)

    runs = {
        "pendulum": ["analyze", "--model", "spherical_pendulum", "--momentum-grid", "[[0.1]]"],
        "radial": ["analyze", "--model", "harmonic_fixture", "--params", '{"frequencies": [1, 1]}'],
        "so3_estimate": ["estimate", "--model", "so3_isotropic", "--momentum-grid", "[[0, 0, 0.1]]"],
        "verify": ["verify", "--model", "harmonic_fixture", "--params", '{"group": "rotation"}',
                   "--state", "[0.3, 0, 0, 0]", "--tau", "6.3"],
        "list": ["list-models"],
    }
    failures = 0
    for name, args in runs.items():
        out = workdir / f"{name}.json"
        proc = subprocess.run([cli, *args, "--out", str(out)], capture_output=True, text=True)
        if proc.returncode not in (0, 2):
            print(f"{name}: exit {proc.returncode}: {proc.stderr.strip()}")
            failures += 1
            continue
        report = json.loads(out.read_text())
        errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
        for e in errors:
            print(f"{name}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
        print(f"{name}: {'ok' if not errors else 'invalid'}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
