"""Command line entry point: ``msaci {run,synth,check,tune}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import GENERATORS, load_config, parse_config
from .errors import ConfigError, MsaciError
from .evaluation import check_bounds, metrics_from_trace, render_table
from .ingest import load_csv, window_matrices
from .pipeline import run_experiment, run_synthetic
from .ridge import gcv_scores, gcv_tune

logger = logging.getLogger("msaci")


def _config(args):
    overrides = list(args.set or [])
    if getattr(args, "out", None):
        overrides.append(f"output.dir={args.out}")
    if getattr(args, "data", None):
        overrides.append(f"data.path={args.data}")
    if args.config:
        return load_config(args.config, overrides)
    return parse_config("", overrides)


def cmd_run(args) -> int:
    result = run_experiment(_config(args))
    _report(result)
    return 0


def cmd_synth(args) -> int:
    overrides = list(args.set or [])
    overrides += [f"synth.generator={args.generator}", f"synth.steps={args.steps}", f"output.seed={args.seed}"]
    args.set = overrides
    if not args.config:
        # small default problem, so the subcommand works without a file
        args.set = ["window.p_lags=3", "window.horizon=3", "train.size=200", "aci.eps=0.2", "aci.gamma=0.005"] + overrides
    result = run_synthetic(_config(args))
    _report(result)
    return 0


def _report(result) -> None:
    text, _ = render_table(result.metrics)
    print(f"ridge a = {result.ridge_param:.6g}, test origins = {result.n_test}")
    print(text, end="")
    print(result.bounds.render(), end="")
    if result.config.output_dir:
        print(f"outputs written to {result.config.output_dir}")


def cmd_check(args) -> int:
    trace = Path(args.trace)
    cfg_path = Path(args.config) if args.config else trace.parent / "config.ini"
    if not cfg_path.exists():
        raise ConfigError(f"need the run config to know targets and learning rates; {cfg_path} not found")
    cfg = load_config(cfg_path)
    metrics = metrics_from_trace(trace, cfg.h, cfg.eps)
    clamp_log = trace.parent / "clamp_log.csv"
    if clamp_log.exists():
        metrics.clamp_count = max(0, len(clamp_log.read_text().strip().splitlines()) - 1)
    report = check_bounds(metrics, cfg.aci_config())
    print(render_table(metrics)[0], end="")
    print(report.render(), end="")
    if not report.all_satisfied and not report.advisory:
        return 4
    return 0


def cmd_tune(args) -> int:
    cfg = _config(args)
    if not cfg.data_path:
        raise ConfigError("config has no [data] path")
    frame = load_csv(cfg.data_path, cfg.schema)
    X, Y = window_matrices(frame, cfg.window)
    n_ready = cfg.history_length - cfg.window.p_lags - cfg.window.horizon + 1
    X, Y = X[:n_ready], Y[:n_ready]
    scores = gcv_scores(X, Y, cfg.gcv_grid.values)
    for a, s in zip(cfg.gcv_grid.values, scores):
        print(f"{a:12.6g}  {s:.8g}")
    print(f"selected a = {gcv_tune(X, Y, cfg.gcv_grid)!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msaci", description="Multi-step-ahead ACI around MIMO conformalised ridge regression")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required)
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override a config value")

    p = sub.add_parser("run", help="online experiment on a dataset")
    common(p, True)
    p.add_argument("--out")
    p.add_argument("--data", help="dataset path (overrides [data] path)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="online experiment on a generated series")
    common(p, False)
    p.add_argument("--generator", choices=GENERATORS, required=True)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", help="bound report from an existing trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--config", help="run config (default: config.ini next to the trace)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("tune", help="GCV scores on the training prefix")
    common(p, True)
    p.add_argument("--data")
    p.set_defaults(func=cmd_tune)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MsaciError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
