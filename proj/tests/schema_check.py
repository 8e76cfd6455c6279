#!/usr/bin/env python3
"""Validates structured reports and certificates against the schemas in docs/."""
import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def run(paa, *args, expect=(0,)):
    r = subprocess.run([paa, *args], capture_output=True, text=True)
    if r.returncode not in expect:
        raise SystemExit(f"{' '.join(args)}: exit {r.returncode}\n{r.stderr}")
    return r.stdout


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paa", required=True)
    ap.add_argument("--dump", required=True)
    ap.add_argument("--docs", required=True)
    ap.add_argument("--programs", required=True)
    a = ap.parse_args()

    docs = pathlib.Path(a.docs)
    report = json.loads((docs / "report.schema.json").read_text())
    cert = json.loads((docs / "certificate.schema.json").read_text())
    cls = jsonschema.Draft202012Validator
    cls.check_schema(report)
    cls.check_schema(cert)
    vr, vc = cls(report), cls(cert)

    failures = 0
    checked = 0

    def validate(v, doc, what):
        nonlocal failures, checked
        checked += 1
        errs = sorted(v.iter_errors(doc), key=lambda e: list(e.path))
        for e in errs[:3]:
            print(f"FAIL {what}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errs)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        subprocess.run([a.dump, str(tmp / "corpus")], check=True)
        files = sorted((tmp / "corpus").glob("*.sdl")) + sorted(pathlib.Path(a.programs).glob("*.sdl"))
        for f in files:
            s = str(f)
            validate(vr, json.loads(run(a.paa, "analyze", s, "--format", "structured", "--timing")), f"{f.name} analyze")
            certfile = tmp / (f.stem + ".cert.json")
            validate(vr, json.loads(run(a.paa, "prove", s, "-o", str(certfile), "--format", "structured")), f"{f.name} prove")
            validate(vc, json.loads(certfile.read_text()), f"{f.name} certificate")
            validate(vr, json.loads(run(a.paa, "check", s, str(certfile), "--format", "structured")), f"{f.name} check")
            validate(vr, json.loads(run(a.paa, "run", s, "--seed", "3", "--format", "structured")), f"{f.name} run")
            out = run(a.paa, "sample", s, "-n", "50", "--expect", "0.5", "--format", "structured", "--timing", expect=(0, 3))
            validate(vr, json.loads(out), f"{f.name} sample")

        # A rejection report.
        f = files[0]
        bad = json.loads((tmp / (f.stem + ".cert.json")).read_text())
        bad["version"] = 2
        badfile = tmp / "bad.cert.json"
        badfile.write_text(json.dumps(bad))
        validate(vr, json.loads(run(a.paa, "check", str(f), str(badfile), "--format", "structured", expect=(3,))), "rejection")

    print(f"{checked} documents checked against the schemas, {failures} invalid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
