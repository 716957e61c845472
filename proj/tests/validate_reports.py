"""Run each command on a shipped config and validate the JSON against the schema."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

binary, source = sys.argv[1], pathlib.Path(sys.argv[2])
schema = json.loads((source / "schemas/report.schema.json").read_text())
runs = [
    ("constraints", "configs/constraints_counterexample.cfg"),
    ("massbound", "configs/massbound_flat.cfg"),
    ("quasilocal", "configs/quasilocal_schwarzschild.cfg"),
    ("certificate", "configs/certificate_sweep.cfg"),
]
with tempfile.TemporaryDirectory() as tmp:
    for command, cfg in runs:
        out = pathlib.Path(tmp) / f"{command}.json"
        rc = subprocess.run([binary, command, "--config", str(source / cfg), "--out", str(out)]).returncode
        if rc != 0:
            sys.exit(f"{command} exited with {rc}")
        jsonschema.validate(json.loads(out.read_text()), schema)
        print("valid", command)

    bad = pathlib.Path(tmp) / "bad.cfg"
    bad.write_text("[grid]\nL = twenty\n")
    out = pathlib.Path(tmp) / "error.json"
    rc = subprocess.run([binary, "massbound", "--config", str(bad), "--out", str(out)]).returncode
    if rc != 2:
        sys.exit(f"config error exited with {rc}, expected 2")
    report = json.loads(out.read_text())
    jsonschema.validate(report, schema)
    if "bad.cfg:2" not in report["error"]["message"]:
        sys.exit("config error lacks a line number")
    print("valid error envelope")
