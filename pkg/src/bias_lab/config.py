"""Experiment configuration with flat key-value file round-tripping."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np


def default_epsilon_grid() -> list[float]:
    """13 log-spaced points spanning [0.1, 10]."""
    return [float(x) for x in np.logspace(-1, 1, 13)]


def default_lambda_grid() -> list[float]:
    return [round(0.1 * i, 10) for i in range(11)]


@dataclass
class ExperimentConfig:
    k: int = 5
    epochs: int = 300
    batches_per_epoch: int = 32
    batch_size: int = 128
    lr: float = 0.1
    tau: float = 2.0
    n_runs: int = 100
    epsilon_grid: list[float] = field(default_factory=default_epsilon_grid)
    lambda_grid: list[float] = field(default_factory=default_lambda_grid)
    batches_per_intervention: int = 32
    mode: str = "observational"
    model: str = "mm"
    base_seed: int = 0
    warmup_batches: int = 0

    def validate(self) -> "ExperimentConfig":
        counts = (
            self.k, self.epochs, self.batches_per_epoch, self.batch_size,
            self.n_runs, self.batches_per_intervention,
        )
        if any(c < 1 for c in counts):
            raise ConfigError("all counts must be >= 1")
        if self.warmup_batches < 0:
            raise ConfigError("warmup_batches must be >= 0")
        if not self.epsilon_grid or not self.lambda_grid:
            raise ConfigError("grids must be non-empty")
        if any(not e > 0 for e in self.epsilon_grid):
            raise ConfigError("epsilon grid entries must be > 0")
        if any(not 0.0 <= l <= 1.0 for l in self.lambda_grid):
            raise ConfigError("lambda grid entries must lie in [0, 1]")
        if self.mode not in ("observational", "interventional"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.model not in ("mm", "cm", "meta", "enco", "bias-only"):
            raise ConfigError(f"unknown model {self.model!r}")
        if not (self.lr > 0 and self.tau > 0):
            raise ConfigError("lr and tau must be > 0")
        return self


class ConfigError(ValueError):
    pass


_LIST_FIELDS = {"epsilon_grid", "lambda_grid"}
_INT_FIELDS = {
    "k", "epochs", "batches_per_epoch", "batch_size", "n_runs",
    "batches_per_intervention", "base_seed", "warmup_batches",
}
_STR_FIELDS = {"mode", "model"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse `key = value` lines; '#' starts a comment; unknown keys rejected."""
    known = {f.name for f in fields(ExperimentConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _LIST_FIELDS:
                values[key] = [float(x) for x in val.split(",") if x.strip()]
            elif key in _INT_FIELDS:
                values[key] = int(val)
            elif key in _STR_FIELDS:
                values[key] = val
            else:
                values[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return ExperimentConfig(**values).validate()


def format_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(ExperimentConfig):
        val = getattr(cfg, f.name)
        if f.name in _LIST_FIELDS:
            val = ",".join("%.17g" % x for x in val)
        elif isinstance(val, float):
            val = "%.17g" % val
        lines.append(f"{f.name} = {val}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            return parse_config(fh.read())
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_config(cfg))
