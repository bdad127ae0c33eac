"""The command-line surface end to end, in a temporary directory.

Writes a three-point spec file and a stationary spec file, then drives the
five subcommands exactly as a shell user would (complete, bounds, verify,
extend, refine), printing each artifact.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from pdcomplete.cli import main

tmp = Path(tempfile.mkdtemp(prefix="pdcomplete_demo_"))
print(f"working in {tmp}\n")

spec = tmp / "three_points.json"
spec.write_text(json.dumps({
    "version": "1",
    "n": 3,
    "entries": [[1, 1, 1.0], [2, 2, 1.0], [3, 3, 1.0], [1, 2, 0.5], [2, 3, 0.3]],
    "cover": [[1, 2], [2, 3]],
}, indent=2), encoding="utf-8")

matrix = tmp / "three_points.completion.csv"
report = tmp / "three_points.report.json"

print("$ pdcomplete complete three_points.json")
assert main(["complete", str(spec), "--output-matrix", str(matrix),
             "--output-report", str(report)]) == 0
print(matrix.read_text())

print("$ pdcomplete bounds three_points.json --entry 1 3")
assert main(["bounds", str(spec), "--entry", "1", "3"]) == 0

print("\n$ pdcomplete verify three_points.completion.csv three_points.json --strict 1e-6")
assert main(["verify", str(matrix), str(spec), "--checks", "10",
             "--strict", "1e-6", "--output-report", str(tmp / "verify.json")]) == 0
print((tmp / "verify.json").read_text())

stat_spec = tmp / "exponential.json"
stat_spec.write_text(json.dumps({
    "version": "1",
    "stationary": {"samples": [float(np.exp(-0.1 * k)) for k in range(6)],
                    "delta": 0.1},
}, indent=2), encoding="utf-8")

print("$ pdcomplete extend exponential.json --points 21 --refine 2")
assert main(["extend", str(stat_spec), "--points", "21", "--refine", "2",
             "--output-matrix", str(tmp / "ext.csv"),
             "--output-report", str(tmp / "ext.json")]) == 0
print((tmp / "ext.json").read_text())

print("$ pdcomplete refine exponential.json --levels 3 --points 21")
assert main(["refine", str(stat_spec), "--levels", "3", "--points", "21",
             "--output-report", str(tmp / "refine.json")]) == 0
print((tmp / "refine.json").read_text())
