"""Builds the CubeSat project with the CLI and validates it against the published schema."""
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

import jsonschema


def main(cli, schema_path, fixtures):
    schema = json.loads(pathlib.Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    src = pathlib.Path(fixtures) / "cubesat"
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        project = tmp / "cubesat.thread.json"
        docs = ["system_requirements.md", "interface_control.txt", "mission_overview.md"]
        for d in docs + ["cubesat.stp"]:
            shutil.copy(src / d, tmp / d)
        steps = [["init", str(project)]]
        steps += [["-p", str(project), "ingest", str(tmp / d)] for d in docs]
        steps += [["-p", str(project), "extract"], ["-p", str(project), "synthesize"],
                  ["-p", str(project), "ingest", str(tmp / "cubesat.stp")],
                  ["-p", str(project), "edit", "--json", "@" + str(src / "edits.jsonl")]]
        for s in steps:
            subprocess.run([cli] + s, check=True, stdout=subprocess.DEVNULL)
        errors = sorted(validator.iter_errors(json.loads(project.read_text())), key=lambda e: list(e.path))
        for e in errors:
            print("/" + "/".join(map(str, e.path)), e.message)
        return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
