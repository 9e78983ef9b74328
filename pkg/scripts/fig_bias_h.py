#!/usr/bin/env python3
"""Render a 'bias_h' figure: --in data.csv --out figure.png."""

import sys

from _figutil import run_kind

if __name__ == "__main__":
    sys.exit(run_kind("bias_h"))
