#!/usr/bin/env python3
"""Render every figure whose input CSVs exist in a data directory.

Usage: make_all_figures.py --data-dir results/ --out-dir figures/
"""

import argparse
import os
import sys

from figure_kit import FigureSpec, render

# (figure name, kind, input file names, log-scaled epsilon axis)
RECIPES = [
    ("bias_h.png", "bias_h", ["bias_h.csv"], True),
    ("bias_s.png", "bias_s", ["bias_s.csv"], False),
    ("c1_box.png", "c1_box", ["runs.csv"], False),
    ("case_ratios.png", "case_ratios", ["case_ratios.csv"], False),
    ("scatter_marginal.png", "scatter", ["scatter_marginal.csv"], False),
    ("scatter_conditional.png", "scatter", ["scatter_conditional.csv"], False),
    ("meta_beliefs.png", "baseline_curves", ["meta.csv"], False),
    ("enco_beliefs.png", "baseline_curves", ["enco.csv"], False),
]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--data-dir", required=True)
    parser.add_argument("--out-dir", required=True)
    args = parser.parse_args(argv)
    os.makedirs(args.out_dir, exist_ok=True)
    rendered = 0
    for name, kind, inputs, log_eps in RECIPES:
        paths = [os.path.join(args.data_dir, f) for f in inputs]
        if not all(os.path.exists(p) for p in paths):
            print(f"skip {name}: missing {[p for p in paths if not os.path.exists(p)]}")
            continue
        out = render(FigureSpec(inputs=paths, kind=kind,
                                out=os.path.join(args.out_dir, name),
                                log_eps=log_eps))
        print(f"wrote {out}")
        rendered += 1
    return 0 if rendered else 1


if __name__ == "__main__":
    sys.exit(main())
