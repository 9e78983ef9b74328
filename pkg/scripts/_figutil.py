"""Shared plumbing for the per-kind figure scripts."""

import sys

from figure_kit.cli import main as figure_main


def run_kind(kind: str) -> int:
    """Forward this script's arguments to the renderer with a fixed kind."""
    return figure_main(sys.argv[1:] + ["--kind", kind])
