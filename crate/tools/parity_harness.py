#!/usr/bin/env python3
"""Compare `fairspec eval` with the generated Python scripts.

For every spec in a fixture directory: generate scripts, run each one and
the native evaluator for the same analysis, then compare values (within
1e-9) and verdicts (exactly). Prints one PASS/FAIL line per spec.

Exit status: 0 all pass, 1 some FixtureMismatch, 2 MissingBinary.
"""

import argparse
import glob
import os
import shutil
import subprocess
import sys
import tempfile

TOLERANCE = 1e-9


class MissingBinary(Exception):
    kind = "MissingBinary"


class FixtureMismatch(Exception):
    kind = "FixtureMismatch"


def pairs(stdout):
    lines = stdout.splitlines()
    return [(float(lines[i]), lines[i + 1]) for i in range(0, len(lines) - 1, 2)]


def run(cmd):
    return subprocess.run(cmd, capture_output=True, text=True)


def perturb_spd(runtime_path, delta):
    with open(runtime_path, "a") as f:
        f.write(
            "\n_spd = FairnessMetric.statistical_parity_difference\n"
            "FairnessMetric.statistical_parity_difference = lambda self: _spd(self) + %r\n" % delta
        )


def check_spec(binary, spec, perturb):
    with tempfile.TemporaryDirectory() as out:
        gen = run([binary, "gen", spec, "--out", out])
        if gen.returncode != 0:
            raise FixtureMismatch("gen failed: %s" % gen.stderr.strip())
        if perturb:
            perturb_spd(os.path.join(out, "runtime", "fairness_metric.py"), perturb)
        scripts = [p for p in gen.stdout.splitlines() if p.endswith(".gen")]
        for script in scripts:
            with open(script) as f:
                name = next(l for l in f if l.startswith("# analysis: "))[len("# analysis: "):].rstrip("\n")
            native = run([binary, "eval", spec, "--analysis", name])
            generated = run([sys.executable, script])
            if native.returncode != generated.returncode:
                raise FixtureMismatch(
                    "%s: exit %d vs %d" % (name, native.returncode, generated.returncode)
                )
            a, b = pairs(native.stdout), pairs(generated.stdout)
            if len(a) != len(b):
                raise FixtureMismatch("%s: %d vs %d results" % (name, len(a), len(b)))
            for (va, da), (vb, db) in zip(a, b):
                if abs(va - vb) > TOLERANCE or da != db:
                    raise FixtureMismatch("%s: %r %s vs %r %s" % (name, va, da, vb, db))


def parity_harness(fixture_dir, binary="fairspec", perturb=0.0):
    resolved = shutil.which(binary) or (binary if os.access(binary, os.X_OK) else None)
    if resolved is None:
        raise MissingBinary("fairspec binary not found: %s" % binary)
    report = []
    for spec in sorted(glob.glob(os.path.join(fixture_dir, "*.fair"))):
        try:
            check_spec(resolved, spec, perturb)
            report.append((spec, None))
        except FixtureMismatch as e:
            report.append((spec, e))
    return report


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("fixture_dir")
    ap.add_argument("--binary", default="fairspec")
    ap.add_argument("--perturb-spd", type=float, default=0.0,
                    help="add this amount to the runtime's SPD (harness self-check)")
    args = ap.parse_args(argv)
    try:
        report = parity_harness(args.fixture_dir, args.binary, args.perturb_spd)
    except MissingBinary as e:
        print("error[MissingBinary]: %s" % e, file=sys.stderr)
        return 2
    failed = 0
    for spec, err in report:
        if err is None:
            print("PASS  %s" % os.path.basename(spec))
        else:
            failed += 1
            print("FAIL  %s: FixtureMismatch: %s" % (os.path.basename(spec), err))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
