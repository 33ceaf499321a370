"""Exit codes and JSON outputs of the shcsp command-line tool."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
corpus, data, schemas = root / "corpus", root / "tests" / "data", root / "docs" / "schemas"
failures = 0


def check(name, ok, detail=""):
    global failures
    failures += not ok
    print(("ok   " if ok else "FAIL ") + name + (": " + detail if detail and not ok else ""))


def run(*args):
    return subprocess.run([cli, *map(str, args)], capture_output=True, text=True)


def expect(name, code, *args):
    r = run(*args)
    check(f"{name} exits {code}", r.returncode == code, f"got {r.returncode}: {r.stderr.strip()}")
    return r


def valid(name, schema, path_or_doc):
    doc = json.loads(pathlib.Path(path_or_doc).read_text()) if isinstance(path_or_doc, pathlib.Path) else path_or_doc
    try:
        jsonschema.validate(doc, json.loads((schemas / schema).read_text()))
        check(f"{name} matches {schema}", True)
    except jsonschema.ValidationError as e:
        check(f"{name} matches {schema}", False, e.message)


expect("parse valid program", 0, "parse", corpus / "aircraft.shcsp")
r = expect("parse shared variable", 1, "parse", data / "shared_var.shcsp")
check("parse error names file and position", "shared_var.shcsp:1:1: error:" in r.stderr, r.stderr)
expect("parse missing file", 2, "parse", data / "missing.shcsp")

with tempfile.TemporaryDirectory() as tmp:
    out = pathlib.Path(tmp)
    expect("simulate", 0, "simulate", corpus / "interrupt_weighted.shcsp", "--runs", 3, "--seed", 5,
           "--out", out / "sim", "--csv")
    valid("index.json", "index.schema.json", out / "sim" / "index.json")
    index = json.loads((out / "sim" / "index.json").read_text())
    for rec in index["records"]:
        valid(rec["file"], "run_record.schema.json", out / "sim" / rec["file"])
        check(f"{rec['csv']} written", (out / "sim" / rec["csv"]).exists())
    expect("simulate step limit", 1, "simulate", corpus / "repeat.shcsp", "--runs", 1,
           "--repeat", "fixed:100000000", "--out", out / "limit")

    pchoice = corpus / "pchoice.shcsp"
    for verdict, code in (("holds", 0), ("fails", 1), ("inconclusive", 3)):
        args = ["estimate", pchoice, "--formula", data / f"{verdict}.formula", "--runs", 2000, "--seed", 9]
        expect(f"estimate {verdict}", code, *args, "--out", out / verdict)
        valid(f"estimate {verdict}", "estimate.schema.json", out / verdict / "estimate.json")
        r = run(*args, "--json")
        check(f"estimate --json reports {verdict}", json.loads(r.stdout)["verdict"] == verdict)
    expect("estimate missing formula", 2, "estimate", pchoice, "--formula", data / "missing.formula")

    for request, code in ((corpus / "contracting.json", 0), (data / "rejected.json", 1),
                          (corpus / "aircraft_abs.json", 3), (data / "malformed.json", 2)):
        name = f"certify {request.name}"
        r = expect(name, code, "certify", "--request", request, "--json", "--out", out / request.stem)
        if code != 2:
            valid(name, "certificate.schema.json", json.loads(r.stdout))
            valid(f"{name} file", "certificate.schema.json", out / request.stem / "certificate.json")
            check(f"{name} report written", (out / request.stem / "report.txt").exists())
    for request in (corpus / "contracting.json", corpus / "aircraft_abs.json", data / "rejected.json"):
        valid(request.name, "certificate_request.schema.json", request)

r = expect("lie smooth", 0, "lie", corpus / "contracting.shcsp", "--f", "s^2")
check("lie prints derivative", r.stdout.strip() != "", r.stdout)
expect("lie non-differentiable", 3, "lie", corpus / "aircraft.shcsp", "--f", "abs(y)")

print(f"{failures} failure(s)")
sys.exit(1 if failures else 0)
