#!/usr/bin/env python3
"""Fraction of drift runs below each candidate tolerance, per n.

Usage: calibrate_drift.py path/to/allelic [config] [--workers N]
"""
import argparse
import json
import pathlib
import subprocess

CANDIDATES = [0.05, 0.075, 0.1, 0.125, 0.15, 0.2, 0.25]


def run(binary, config, tolerance, workers):
    out = subprocess.run(
        [binary, "scaling", "--config", config, "--tolerance", str(tolerance),
         "--probes", "10", "--workers", str(workers)],
        check=True, capture_output=True, text=True).stdout
    rows = [json.loads(line) for line in out.splitlines()]
    return {r["params"]["n"]: r for r in rows if r.get("kind") == "drift"}


def main():
    here = pathlib.Path(__file__).resolve().parent
    parser = argparse.ArgumentParser()
    parser.add_argument("binary")
    parser.add_argument("config", nargs="?", default=str(here / "drift.cfg"))
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    table = {tol: run(args.binary, args.config, tol, args.workers) for tol in CANDIDATES}
    ns = sorted(next(iter(table.values())))
    print("tolerance " + " ".join(f"n={n:<6}" for n in ns))
    for tol, rows in table.items():
        print(f"{tol:<9} " + " ".join(f"{rows[n]['fraction_below_tolerance']:<8.2f}" for n in ns))
    means = next(iter(table.values()))
    print("mean sup " + " ".join(f"{means[n]['mean_sup_deviation']:<8.4f}" for n in ns))


if __name__ == "__main__":
    main()
