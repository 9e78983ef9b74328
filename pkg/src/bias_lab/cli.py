"""Command-line surface for the bias probes, model sweeps, and baselines.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .bias import case_ratios, verify_dpi
from .config import ConfigError, ExperimentConfig, load_config
from .rng import SeededRng
from .sweep import (
    ENCO_HEADER,
    META_HEADER,
    bias_h_sweep,
    bias_s_sweep,
    enco_sweep,
    meta_sweep,
    run_sweep,
    write_csv,
    write_sweep,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bias-lab")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=os.environ.get("BIAS_LAB_OUT_DIR", "."))
        p.add_argument("--k", type=int, default=5)
        p.add_argument("--epsilon", type=_floats, default=None,
                       help="comma-separated epsilon grid")
        p.add_argument("--lambda", dest="lam", type=_floats, default=None,
                       help="comma-separated lambda grid")
        p.add_argument("--runs", type=int, default=None)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--batches-per-intervention", type=int, default=None)
        p.add_argument("--warmup", type=int, default=None)
        p.add_argument("--mode", choices=["observational", "interventional"], default=None)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--config", default=None, help="flat key-value config file")

    p = sub.add_parser("bias-h", help="entropy-gap curve over the epsilon grid")
    common(p)
    p.add_argument("--n", type=int, default=10000, help="constructions per grid point")

    p = sub.add_parser("bias-s", help="shift-gap curve, case ratios, scatter data")
    common(p)
    p.add_argument("--n", type=int, default=10000, help="interventions per grid point")

    p = sub.add_parser("train", help="MM/CM sweep -> runs.csv, trajectories.csv")
    common(p)
    p.add_argument("--model", choices=["mm", "cm"], default="mm")

    p = sub.add_parser("baseline-meta", help="meta-transfer sweep -> meta.csv")
    common(p)
    p.add_argument("--episodes", type=int, default=300)

    p = sub.add_parser("baseline-enco", help="ENCO sweep -> enco.csv")
    common(p)
    p.add_argument("--stages", type=int, default=100)

    p = sub.add_parser("verify", help="invariant suite: DPI, gradients, case ratios")
    common(p)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    cfg.base_seed = args.seed
    cfg.k = args.k
    if args.epsilon is not None:
        cfg.epsilon_grid = args.epsilon
    if args.lam is not None:
        cfg.lambda_grid = args.lam
    if args.runs is not None:
        cfg.n_runs = args.runs
    if args.epochs is not None:
        cfg.epochs = args.epochs
    if args.batches_per_intervention is not None:
        cfg.batches_per_intervention = args.batches_per_intervention
    if args.warmup is not None:
        cfg.warmup_batches = args.warmup
    if args.mode is not None:
        cfg.mode = args.mode
    if getattr(args, "model", None) is not None:
        cfg.model = args.model
    return cfg.validate()


def _cmd_bias_h(args) -> int:
    cfg = _config_from_args(args)
    rows = bias_h_sweep(cfg.epsilon_grid, args.n, cfg.base_seed, k=cfg.k)
    write_csv(os.path.join(args.out_dir, "bias_h.csv"),
              ["epsilon", "mean_dh", "stderr", "n"], rows)
    return 0


def _cmd_bias_s(args) -> int:
    cfg = _config_from_args(args)
    eps = cfg.epsilon_grid[0] if args.epsilon is not None else 1.0
    s_rows, ratio_rows, sc_m, sc_c = bias_s_sweep(
        cfg.lambda_grid, args.n, cfg.base_seed, k=cfg.k, epsilon=eps
    )
    out = args.out_dir
    write_csv(os.path.join(out, "bias_s.csv"),
              ["lambda", "mean_ds", "mean_ds_ce", "stderr_ds", "n"], s_rows)
    write_csv(os.path.join(out, "case_ratios.csv"),
              ["lambda", "r1", "r2", "r3", "r4"], ratio_rows)
    write_csv(os.path.join(out, "scatter_marginal.csv"),
              ["lambda", "case", "s1", "s2"], sc_m)
    write_csv(os.path.join(out, "scatter_conditional.csv"),
              ["lambda", "case", "s1", "s2"], sc_c)
    return 0


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    if cfg.mode == "observational" and args.lam is None:
        cfg.lambda_grid = [0.0]
    result = run_sweep(cfg, jobs=args.jobs)
    write_sweep(result, args.out_dir)
    return 0


def _cmd_meta(args) -> int:
    cfg = _config_from_args(args)
    cfg.model = "meta"
    if args.epsilon is None:
        cfg.epsilon_grid = [1.0]
    rows = meta_sweep(cfg, episodes=args.episodes)
    write_csv(os.path.join(args.out_dir, "meta.csv"), META_HEADER, rows)
    return 0


def _cmd_enco(args) -> int:
    cfg = _config_from_args(args)
    cfg.model = "enco"
    if args.epsilon is None:
        cfg.epsilon_grid = [1.0]
    rows = enco_sweep(cfg, stages=args.stages)
    write_csv(os.path.join(args.out_dir, "enco.csv"), ENCO_HEADER, rows)
    return 0


def _cmd_verify(args) -> int:
    cfg = _config_from_args(args)
    failures = 0
    rng = SeededRng(cfg.base_seed)
    violations = sum(
        verify_dpi(2000, rng.spawn(i), epsilon=eps, k=cfg.k)
        for i, eps in enumerate([0.2, 1.0, 5.0])
    )
    print(f"DPI violations: {violations}")
    failures += violations != 0

    ok = True
    for j, lam in enumerate([0.2, 0.5, 0.8]):
        ratios = case_ratios(lam, 20000, rng.spawn(100 + j), k=cfg.k)
        expected = ((1 - lam) ** 2, lam * (1 - lam), (1 - lam) * lam, lam ** 2)
        ok &= all(abs(r - e) <= 0.02 for r, e in zip(ratios, expected))
    print(f"case ratios match stationary law: {'yes' if ok else 'NO'}")
    failures += not ok

    from .testing import enco_shift_invariance_error, max_gradient_error

    err = max_gradient_error(SeededRng(cfg.base_seed + 1), instances=20)
    print(f"max relative gradient error (MM/CM/meta/ENCO): {err:.3g}")
    failures += err >= 1e-5

    shift_err = enco_shift_invariance_error(SeededRng(cfg.base_seed + 2), k=cfg.k)
    print(f"ENCO gamma-gradient likelihood-shift sensitivity: {shift_err:.3g}")
    failures += shift_err >= 1e-12
    return 2 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 1
    handlers = {
        "bias-h": _cmd_bias_h,
        "bias-s": _cmd_bias_s,
        "train": _cmd_train,
        "baseline-meta": _cmd_meta,
        "baseline-enco": _cmd_enco,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
