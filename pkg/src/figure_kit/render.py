"""Figure renderers over the benchmark CSV schemas.

Each renderer takes parsed columns and an axes object; `render` handles file
IO, schema validation, and saving. All figures run headless (Agg backend).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = (
    "bias_h",
    "bias_s",
    "c1_box",
    "case_ratios",
    "scatter",
    "baseline_curves",
)

_CASE_LABELS = {1: "case 1", 2: "case 2", 3: "case 3", 4: "case 4"}
_CASE_COLORS = {1: "#1f77b4", 2: "#ff7f0e", 3: "#2ca02c", 4: "#d62728"}


class MissingColumnError(ValueError):
    """A required CSV column is absent."""


class EmptyInputError(ValueError):
    """The CSV contains a header but no data rows."""


@dataclass
class FigureSpec:
    inputs: list[str]
    kind: str
    out: str
    log_eps: bool = False
    title: str = ""

    def validate(self) -> "FigureSpec":
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; choose from {FIGURE_KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        return self


@dataclass
class Table:
    """A CSV loaded as named float columns (strings preserved where needed)."""

    path: str
    header: list[str]
    rows: list[list[str]]

    def column(self, name: str) -> np.ndarray:
        if name not in self.header:
            raise MissingColumnError(f"{self.path}: missing column {name!r} "
                                     f"(has {self.header})")
        idx = self.header.index(name)
        return np.array([float(r[idx]) for r in self.rows])

    def text_column(self, name: str) -> list[str]:
        if name not in self.header:
            raise MissingColumnError(f"{self.path}: missing column {name!r}")
        idx = self.header.index(name)
        return [r[idx] for r in self.rows]


def load_table(path: str) -> Table:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: file is empty")
        rows = [r for r in reader if r]
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    return Table(path, header, rows)


# -- renderers ---------------------------------------------------------------


def _bias_h(table: Table, ax, log_eps: bool):
    eps = table.column("epsilon")
    mean = table.column("mean_dh")
    stderr = table.column("stderr")
    ax.errorbar(eps, mean, yerr=stderr, marker="o", capsize=3)
    ax.axhline(0.0, color="gray", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\varepsilon$ (log scale)")
    ax.set_ylabel("mean entropy gap")


def _bias_s(table: Table, ax, log_eps: bool):
    lam = table.column("lambda")
    mean = table.column("mean_ds")
    stderr = table.column("stderr_ds")
    ax.errorbar(lam, mean, yerr=stderr, marker="o", capsize=3, label="KL form")
    if "mean_ds_ce" in table.header:
        ax.plot(lam, table.column("mean_ds_ce"), marker="s", ls="--",
                label="cross-entropy form")
    ax.axhline(0.0, color="gray", lw=0.8, ls="--")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("mean shift gap")
    ax.legend()


def _c1_box(table: Table, ax, log_eps: bool):
    finals = table.column("final_c1")
    lam = table.column("lambda")
    eps = table.column("epsilon")
    # Group over whichever grid actually varies; lambda wins ties.
    key, label = (lam, r"$\lambda$")
    if len(set(lam)) == 1 and len(set(eps)) > 1:
        key, label = (eps, r"$\varepsilon$")
    values = sorted(set(key))
    groups = [finals[key == v] for v in values]
    ax.boxplot(groups, positions=range(len(values)), widths=0.6)
    ax.set_xticks(range(len(values)))
    fmt = "%.2g" if not log_eps else "%.3g"
    ax.set_xticklabels([fmt % v for v in values])
    ax.set_ylim(-0.05, 1.05)
    ax.axhline(0.5, color="gray", lw=0.8, ls="--")
    ax.set_xlabel(label)
    ax.set_ylabel("final $c_1$")


def _case_ratios(table: Table, ax, log_eps: bool):
    lam = table.column("lambda")
    order = np.argsort(lam)
    ratios = np.stack([table.column(f"r{i}")[order] for i in (1, 2, 3, 4)])
    ax.stackplot(lam[order], ratios,
                 labels=[_CASE_LABELS[i] for i in (1, 2, 3, 4)],
                 colors=[_CASE_COLORS[i] for i in (1, 2, 3, 4)], alpha=0.85)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("case ratio")
    ax.set_ylim(0, 1)
    ax.legend(loc="center right")


def _scatter(table: Table, ax, log_eps: bool):
    s1 = table.column("s1")
    s2 = table.column("s2")
    case = table.column("case").astype(int)
    for c in (1, 2, 3, 4):
        mask = case == c
        if mask.any():
            ax.scatter(s1[mask], s2[mask], s=8, alpha=0.5,
                       color=_CASE_COLORS[c], label=_CASE_LABELS[c])
    hi = max(1e-3, float(max(s1.max(), s2.max())))
    ax.plot([0, hi], [0, hi], color="black", lw=0.8, label="zero gap")
    ax.set_xlabel("shift of variable 1")
    ax.set_ylabel("shift of variable 2")
    ax.legend()


def _baseline_curves(table: Table, ax, log_eps: bool):
    """Belief trajectories from meta.csv or enco.csv, one line per run."""
    if "episode" in table.header:
        step_col, belief_cols = "episode", ["sigma_gamma"]
    elif "stage" in table.header:
        step_col = "stage"
        belief_cols = ["sigma_gamma12", "sigma_gamma21", "sigma_theta12"]
    else:
        raise MissingColumnError(
            f"{table.path}: expected an 'episode' or 'stage' column")
    run = table.column("run_id").astype(int)
    steps = table.column(step_col)
    styles = {0: "-", 1: ":", 2: "--"}
    for ci, name in enumerate(belief_cols):
        values = table.column(name)
        for r in sorted(set(run)):
            mask = run == r
            order = np.argsort(steps[mask])
            ax.plot(steps[mask][order], values[mask][order], styles[ci],
                    alpha=0.6, lw=1.0,
                    label=name if r == min(run) else None)
    ax.axhline(0.5, color="gray", lw=0.8, ls="--")
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel(step_col)
    ax.set_ylabel("belief")
    ax.legend()


_RENDERERS = {
    "bias_h": _bias_h,
    "bias_s": _bias_s,
    "c1_box": _c1_box,
    "case_ratios": _case_ratios,
    "scatter": _scatter,
    "baseline_curves": _baseline_curves,
}


def render(spec: FigureSpec) -> str:
    """Render one figure from the spec's CSVs; returns the output path."""
    spec.validate()
    fig, ax = plt.subplots(figsize=(6, 4), dpi=120)
    try:
        for path in spec.inputs:
            _RENDERERS[spec.kind](load_table(path), ax, spec.log_eps)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
        fig.savefig(spec.out)
    finally:
        plt.close(fig)
    return spec.out
