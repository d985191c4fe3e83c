#!/usr/bin/env python3
"""End-to-end reference pipeline on the embedded stimulus sets.

Builds the hypothesis spaces, emits the Bayesian (1, 1) reference
curves for d=100 and d=200, fits (alpha, beta) back to them, and
writes the full metric table (including domain-extension columns).
All outputs land in --out (default: ./out/reference-run/).
"""

import argparse
import sys
from pathlib import Path

from numbergame.cli import main as cli


def run(*argv):
    code = cli([str(a) for a in argv])
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/reference-run")
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for d in (100, 200):
        run("space", "--task", "tenenbaum99", "--d", d,
            "--out", out / f"space-{d}.json")
        run("reference", "--task", "tenenbaum99", "--d", d,
            "--out", out / f"reference-{d}.jsonl")
    run("space", "--task", "bigelow16", "--d", 100,
        "--out", out / "space-bigelow16-100.json")

    run("fit", "--task", "tenenbaum99", "--d", 100,
        "--readouts", out / "reference-100.jsonl",
        "--scope", "trajectory", "--out", out / "fit-trajectory.csv")

    merged = out / "reference-both.jsonl"
    merged.write_bytes((out / "reference-100.jsonl").read_bytes()
                       + (out / "reference-200.jsonl").read_bytes())
    run("metrics", "--task", "tenenbaum99", "--d", 200,
        "--readouts", merged,
        "--reference", out / "reference-200.jsonl",
        "--out", out / "metrics-extension.csv")
    print(f"pipeline outputs in {out}/")


if __name__ == "__main__":
    main()
