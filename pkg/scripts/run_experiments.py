#!/usr/bin/env python3
"""Reproduce the main experiment CSVs with one command.

Runs the bias curves, both toy-model sweeps (observational epsilon grid and
interventional lambda grid), and the two baselines, writing every CSV into
--out-dir. --quick shrinks run counts for a fast smoke pass; full scale
matches the defaults used by the acceptance suite.
"""

import argparse
import os
import sys
import time

from bias_lab.cli import main as bias_lab


def main(argv=None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--quick", action="store_true",
                        help="small run counts; minutes instead of hours")
    args = parser.parse_args(argv)

    runs = "5" if args.quick else "100"
    baseline_runs = "2" if args.quick else "10"
    n = "1000" if args.quick else "10000"
    seed = str(args.seed)
    jobs = str(args.jobs)

    def stage(name, argv):
        out = os.path.join(args.out_dir, name)
        os.makedirs(out, exist_ok=True)
        t0 = time.time()
        code = bias_lab(argv + ["--seed", seed, "--out-dir", out])
        print(f"{name}: exit {code} in {time.time() - t0:.0f}s")
        return code

    stages = [
        ("bias", ["bias-h", "--n", n]),
        ("bias", ["bias-s", "--n", n]),
        ("mm_observational", ["train", "--model", "mm", "--runs", runs, "--jobs", jobs]),
        ("cm_observational", ["train", "--model", "cm", "--runs", runs, "--jobs", jobs]),
        ("mm_interventional", ["train", "--model", "mm", "--mode", "interventional",
                               "--epsilon", "1", "--runs", runs, "--jobs", jobs]),
        ("cm_interventional", ["train", "--model", "cm", "--mode", "interventional",
                               "--epsilon", "1", "--runs", runs, "--jobs", jobs]),
        ("meta", ["baseline-meta", "--lambda", "0,0.25,0.5,0.75,0.9",
                  "--runs", baseline_runs]),
        ("enco", ["baseline-enco", "--lambda", "0,0.25,0.5,0.75,0.9",
                  "--runs", baseline_runs]),
    ]
    worst = 0
    for name, argv_ in stages:
        worst = max(worst, stage(name, argv_))
    return worst


if __name__ == "__main__":
    sys.exit(main())
