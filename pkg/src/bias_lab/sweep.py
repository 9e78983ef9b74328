"""Sweep orchestration: seeding, grid execution, and CSV emission.

Per-run seeds are a stable hash of (base_seed, epsilon index, lambda index,
run index), so any run is reconstructible from its recorded seed and results
do not depend on execution order or worker count. Output rows are sorted
grid-major, run-minor before writing; CSVs are byte-stable.
"""

from __future__ import annotations

import csv
import hashlib
import os
import struct
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from .bias import case_ratios, monte_carlo_delta_h, monte_carlo_delta_s
from .config import ExperimentConfig
from .enco import EncoConfig, run_enco
from .meta_transfer import MetaConfig, run_meta
from .models import RunRecord, TrainConfig, train_population
from .rng import SeededRng

FMT = "%.17g"


def derive_seed(base_seed: int, eps_idx: int, lam_idx: int, run_idx: int) -> int:
    """Stable 63-bit per-run seed; reorder-safe under parallel execution."""
    payload = struct.pack("<qqqq", base_seed, eps_idx, lam_idx, run_idx)
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


def _fmt(value) -> str:
    if isinstance(value, float):
        return FMT % value
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


# -- bias probe sweeps ------------------------------------------------------


def bias_h_sweep(epsilons, n: int, base_seed: int, k: int = 5):
    rows = []
    for i, eps in enumerate(epsilons):
        rng = SeededRng(derive_seed(base_seed, i, 0, 0))
        mean, stderr = monte_carlo_delta_h(eps, n, rng, k=k)
        rows.append((eps, mean, stderr, n))
    return rows


def bias_s_sweep(lambdas, n: int, base_seed: int, k: int = 5, epsilon: float = 1.0,
                 n_chains: int = 100):
    """Returns (bias_s rows, case_ratio rows, marginal scatter, conditional scatter).

    All lambda points share one seed: each chain step consumes the same number
    of random draws regardless of the intervention target, so a shared stream
    couples the points (common random numbers) and the curve's monotone shape
    is not blurred by between-point sampling noise.
    """
    n_chains = min(n_chains, n)
    s_rows, ratio_rows, sc_m, sc_c = [], [], [], []
    for j, lam in enumerate(lambdas):
        rng = SeededRng(derive_seed(base_seed, 0, 0, 0))
        summary = monte_carlo_delta_s(lam, n, rng, epsilon=epsilon, k=k,
                                      n_chains=n_chains)
        s_rows.append((lam, summary.mean_ds, summary.mean_ds_ce, summary.stderr_ds, n))
        ratios = case_ratios(lam, n, SeededRng(derive_seed(base_seed, 0, j, 1)), epsilon=epsilon, k=k)
        ratio_rows.append((lam, *ratios))
        for s in summary.samples:
            sc_m.append((lam, int(s.case), s.s1, s.s2))
            sc_c.append((lam, int(s.case), s.s1_cond, s.s2_cond))
    return s_rows, ratio_rows, sc_m, sc_c


# -- toy model sweeps -------------------------------------------------------


@dataclass
class SweepPoint:
    epsilon: float
    lam: float
    records: list[RunRecord]


@dataclass
class SweepResult:
    config: ExperimentConfig
    points: list[SweepPoint]

    def runs_rows(self):
        rows = []
        run_id = 0
        for pt in self.points:
            for rec in pt.records:
                rows.append(
                    (run_id, rec.model, rec.epsilon, rec.lam, rec.mode, rec.seed, rec.final_c1)
                )
                run_id += 1
        return rows

    def trajectory_rows(self):
        rows = []
        run_id = 0
        for pt in self.points:
            for rec in pt.records:
                for epoch, c1 in enumerate(rec.c1_trajectory):
                    rows.append((run_id, epoch, float(c1)))
                run_id += 1
        return rows

    def summary_rows(self):
        rows = []
        for pt in self.points:
            finals = np.array([rec.final_c1 for rec in pt.records])
            q1, med, q3 = np.percentile(finals, [25, 50, 75])
            rows.append(
                (
                    self.config.model, pt.epsilon, pt.lam, self.config.mode,
                    float(med), float(q1), float(q3), len(pt.records),
                )
            )
        return rows


def _grid_point(args):
    cfg_dict, eps_idx, lam_idx, eps, lam = args
    cfg = ExperimentConfig(**cfg_dict)
    tc = TrainConfig(
        k=cfg.k,
        epsilon=eps,
        lam=lam,
        mode=cfg.mode,
        epochs=cfg.epochs,
        batches_per_epoch=cfg.batches_per_epoch,
        batch_size=cfg.batch_size,
        lr=cfg.lr,
        tau=cfg.tau,
        batches_per_intervention=cfg.batches_per_intervention,
        warmup_batches=cfg.warmup_batches,
    )
    rngs = [
        SeededRng(derive_seed(cfg.base_seed, eps_idx, lam_idx, r)) for r in range(cfg.n_runs)
    ]
    return eps_idx, lam_idx, train_population(cfg.model, tc, rngs)


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> SweepResult:
    """Seeded runs at every (epsilon, lambda) grid point, grid-major order."""
    cfg.validate()
    if cfg.model not in ("mm", "cm"):
        raise ValueError("run_sweep trains the mm/cm models; use the baseline runners otherwise")
    cfg_dict = {
        k: v for k, v in cfg.__dict__.items()
    }
    tasks = []
    for i, eps in enumerate(cfg.epsilon_grid):
        for j, lam in enumerate(cfg.lambda_grid):
            tasks.append((cfg_dict, i, j, eps, lam))
    if jobs > 1 and len(tasks) > 1:
        with get_context("spawn").Pool(jobs) as pool:
            results = pool.map(_grid_point, tasks)
    else:
        results = [_grid_point(t) for t in tasks]
    results.sort(key=lambda r: (r[0], r[1]))
    points = [
        SweepPoint(cfg.epsilon_grid[i], cfg.lambda_grid[j], recs) for i, j, recs in results
    ]
    return SweepResult(cfg, points)


def write_sweep(result: SweepResult, out_dir: str) -> None:
    write_csv(
        os.path.join(out_dir, "runs.csv"),
        ["run_id", "model", "epsilon", "lambda", "mode", "seed", "final_c1"],
        result.runs_rows(),
    )
    write_csv(
        os.path.join(out_dir, "trajectories.csv"),
        ["run_id", "epoch", "mean_c1"],
        result.trajectory_rows(),
    )
    write_csv(
        os.path.join(out_dir, "summary.csv"),
        ["model", "epsilon", "lambda", "mode", "median_final_c1", "q1_final_c1", "q3_final_c1", "n_runs"],
        result.summary_rows(),
    )


# -- baseline sweeps --------------------------------------------------------


def meta_sweep(cfg: ExperimentConfig, episodes: int = 300):
    """meta.csv rows over the (epsilon, lambda) grid."""
    rows = []
    run_id = 0
    for i, eps in enumerate(cfg.epsilon_grid):
        for j, lam in enumerate(cfg.lambda_grid):
            for r in range(cfg.n_runs):
                rng = SeededRng(derive_seed(cfg.base_seed, i, j, r))
                mc = MetaConfig(k=cfg.k, epsilon=eps, lam=lam, episodes=episodes,
                                batch_size=cfg.batch_size)
                records, _ = run_meta(mc, rng)
                for rec in records:
                    rows.append((run_id, lam, eps, rec.episode, rec.sigma_gamma, rec.cum_loglik_diff))
                run_id += 1
    return rows


def enco_sweep(cfg: ExperimentConfig, stages: int = 50):
    """enco.csv rows over the (epsilon, lambda) grid."""
    rows = []
    run_id = 0
    for i, eps in enumerate(cfg.epsilon_grid):
        for j, lam in enumerate(cfg.lambda_grid):
            for r in range(cfg.n_runs):
                rng = SeededRng(derive_seed(cfg.base_seed, i, j, r))
                ec = EncoConfig(k=cfg.k, epsilon=eps, lam=lam, stages=stages,
                                batch_size=cfg.batch_size)
                for rec in run_enco(ec, rng):
                    rows.append(
                        (run_id, lam, eps, rec.stage, rec.sigma_gamma12,
                         rec.sigma_gamma21, rec.sigma_theta12)
                    )
                run_id += 1
    return rows


META_HEADER = ["run_id", "lambda", "epsilon", "episode", "sigma_gamma", "cum_loglik_diff"]
ENCO_HEADER = ["run_id", "lambda", "epsilon", "stage", "sigma_gamma12", "sigma_gamma21", "sigma_theta12"]
