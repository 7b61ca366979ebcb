"""End-to-end checks of the hp3 binary: JSON outputs against the shipped
schemas, exit codes, CSV layout and byte-identical reruns."""

import csv
import json
import pathlib
import subprocess
import sys
import tempfile

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

HP3 = sys.argv[1]
SCHEMAS = pathlib.Path(sys.argv[2])

registry = Registry()
schemas = {}
for path in SCHEMAS.glob("*.schema.json"):
    doc = json.loads(path.read_text())
    Draft202012Validator.check_schema(doc)
    schemas[path.name.split(".")[0]] = doc
    registry = registry.with_resource(path.name, Resource.from_contents(doc))

failures = []


def check(ok, what):
    print(("PASS " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


def run(*args):
    return subprocess.run([HP3, *args], capture_output=True, text=True)


def validate(schema, text, what):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        check(False, f"{what}: not JSON ({e})")
        return None
    errors = list(Draft202012Validator(schemas[schema], registry=registry).iter_errors(doc))
    check(not errors, f"{what}: matches {schema} schema" + (f" ({errors[0].message})" if errors else ""))
    return doc


def json_command(schema, args, expect_rc=0):
    first, second = run(*args), run(*args)
    what = " ".join(args)
    check(first.returncode == expect_rc, f"{what}: exit {first.returncode} (expected {expect_rc})")
    check(first.stdout == second.stdout, f"{what}: byte-identical rerun")
    return validate(schema, first.stdout, what)


reports = json_command("verify", ["verify", "--json"])
if reports:
    check(all(r["status"] == "pass" for r in reports if not r["informational"]), "verify: suite passes")
json_command("verify", ["verify", "--only", "holomorphy", "reduction", "--json"])
json_command("singularities", ["singularities", "--json"])
laurent = json_command("laurent", ["laurent", "--t0", "2", "--depth", "10", "--json"])
if laurent:
    check(laurent["pole_orders"] == [1, 2, 1], "laurent: pole orders (1, 2, 1)")
special = json_command("special", ["special", "--a", "2", "--terms", "10", "--eval", "1", "--json"])
if special:
    # sum of 1/(k! (k+1)!) for k < 10
    expected, fact = 0.0, 1.0
    for k in range(10):
        expected += 1.0 / (fact * fact * (k + 1))
        fact *= k + 1
    check(abs(special["eval"]["Z"] - expected) <= 1e-15, f"special: Z(1) = {special['eval']['Z']!r}")
    check(abs(special["eval"]["Z"] - 1.5906368) < 1e-7, "special: Z(1) ~ 1.5906368")
json_command("special", ["special", "--hierarchy", "2", "--json"])
for what in ("system6", "charts", "backlund"):
    json_command("dump", ["dump", what, "--json"])

with tempfile.TemporaryDirectory() as tmp:
    outs = []
    for name in ("a.csv", "b.csv"):
        out = pathlib.Path(tmp) / name
        r = run("integrate", "--alpha0", "0", "--alpha1", "1.5", "--init", "0.1,0.1,0.1",
                "--t0", "1", "--t1", "6", "--out", str(out), "--json")
        check(r.returncode == 0, f"integrate: exit {r.returncode}")
        validate("integrate", r.stdout, "integrate --json")
        validate("integrate", (pathlib.Path(str(out) + ".events.json")).read_text(), "integrate sidecar")
        outs.append(out.read_text())
    check(outs[0] == outs[1], "integrate: byte-identical CSV")
    rows = list(csv.reader(outs[0].splitlines()))
    check(rows[0] == ["t", "chart", "x", "y", "z", "chart_coords"], "integrate: CSV header")
    check(all(len(row) == 6 for row in rows), "integrate: six CSV columns")
    charts = {row[1] for row in rows[1:]}
    check("base" in charts and len(charts) >= 2, f"integrate: charts used {sorted(charts)}")
    for row in rows[1:]:
        if row[1] != "base":
            check(len(json.loads(row[5])) == 3, "integrate: chart coordinates are a JSON triple")
            break

for args in (["bogus"], [], ["laurent", "--depth", "3"], ["laurent", "--t0", "x", "--depth", "3"],
             ["integrate", "--init", "1,2", "--out", "/dev/null"], ["dump", "nothing"],
             ["verify", "--only", "no_such_check"], ["special", "--a", "-2"]):
    r = run(*args)
    check(r.returncode == 2 and "Usage" in r.stderr and r.stdout == "", f"usage error {args}: exit {r.returncode}")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
