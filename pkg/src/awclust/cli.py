"""Command-line front end.

Subcommands: validate | run | sweep | reproduce-circle.  Exit codes: 0 on
success, 1 when a validation check fails, 2 for configuration errors, 3 for
I/O errors.  The environment variable AWC_SEED overrides the config seed;
an explicit --seed flag overrides both.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .experiments import (
    ConfigError,
    ExperimentConfig,
    parse_config_file,
    reproduce_circle,
    run_experiment,
    run_sweep,
)
from .validate import run_all_checks


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        config = parse_config_file(args.config)
    else:
        config = ExperimentConfig()
    env_seed = os.environ.get("AWC_SEED")
    if env_seed is not None:
        try:
            config = replace(config, seed=int(env_seed))
        except ValueError as exc:
            raise ConfigError(f"AWC_SEED must be an integer, got {env_seed!r}") from exc
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.out is not None:
        config = replace(config, out=args.out)
    if args.threads is not None:
        config = replace(config, threads=args.threads)
    if args.labeled:
        config = replace(config, labeled=True)
    return config.validate()


def _cmd_validate(args: argparse.Namespace) -> int:
    results = run_all_checks(perturb_q=args.perturb_q)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "ok  " if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    record = run_experiment(config)
    for step, pairs, rejected in record.step_summary:
        print(f"step {step}: {pairs} pairs tested, {rejected} rejected")
    rand = "n/a" if record.rand_index is None else f"{record.rand_index:.6f}"
    print(
        f"n={record.n} lambda={record.lambda_used:.6g} edges={record.n_edges} "
        f"rand={rand} ({record.wall_time_s:.2f}s) -> {config.out}"
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    rows = run_sweep(config, out_dir=config.out, threads=config.threads)
    for cell in rows:
        print(
            f"eps={cell.eps:g} n={cell.n}: mean_rand={cell.mean_rand:.5f} "
            f"frac_perfect={cell.frac_perfect:.2f} mean_min_lambda={cell.mean_min_lambda:.3f}"
        )
    print(f"summary -> {config.out}/summary.csv")
    return 0


def _cmd_reproduce(args: argparse.Namespace) -> int:
    out = args.out or "reproduce-circle-out"
    seed = args.seed if args.seed is not None else 20260811
    env_seed = os.environ.get("AWC_SEED")
    if args.seed is None and env_seed is not None:
        seed = int(env_seed)
    rows = reproduce_circle(out, repeats=args.repeats, seed=seed, threads=args.threads or 1)
    for cell in rows:
        print(
            f"eps={cell.eps:g} n={cell.n}: mean_rand={cell.mean_rand:.5f} "
            f"frac_perfect={cell.frac_perfect:.2f} mean_min_lambda={cell.mean_min_lambda:.3f}"
        )
    print(f"outputs -> {out}/summary.csv, fig_rand_data.csv, fig_lambda_data.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="awclust", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--seed", type=int, metavar="U64", help="override the config seed")
    common.add_argument("--threads", type=int, metavar="N", help="worker process cap")
    common.add_argument("--labeled", action="store_true", help="dataset file carries a final label column")

    p_validate = sub.add_parser("validate", help="run the built-in numeric check suites")
    p_validate.add_argument("--perturb-q", type=float, default=0.0, help=argparse.SUPPRESS)
    p_validate.set_defaults(func=_cmd_validate)

    p_run = sub.add_parser("run", parents=[common], help="single run: weights, diagnostics, metrics")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", parents=[common], help="eps x n x lambda sweep with repeats")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_rep = sub.add_parser(
        "reproduce-circle", parents=[common], help="the canned desk-scale circle experiment"
    )
    p_rep.add_argument("--repeats", type=int, default=100, help="trials per cell (default 100)")
    p_rep.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
