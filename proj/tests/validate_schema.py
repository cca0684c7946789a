"""Validate the JSON output of every preset against the result schema."""
import json
import subprocess
import sys

import jsonschema


def main(binary, schema_path):
    with open(schema_path) as f:
        schema = json.load(f)
    names = subprocess.check_output([binary, "list-presets"], text=True).split()
    checked = 0
    for name in names:
        runs = [[]]
        probe = subprocess.run([binary, "preset", name, "--shots", "10", "--seed", "1"],
                               capture_output=True)
        if probe.returncode == 0:
            runs.append(["--shots", "500", "--seed", "9"])
        for extra in runs:
            out = subprocess.check_output([binary, "preset", name, "--format", "json"] + extra)
            jsonschema.validate(json.loads(out), schema)
            checked += 1
    print(f"{checked} records valid")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
