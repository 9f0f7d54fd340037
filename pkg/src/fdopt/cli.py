"""Command-line front end: run, bench, grid, and estimate subcommands.

All outputs are tidy CSV with numbers serialized to 17 significant digits, so
repeated runs with the same configuration and seed are byte-identical. Exit
codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import metrics
from .estimators import cor_cfd_gradient
from .harness import (ExperimentConfig, apply_profile, grid_search_spsa,
                      load_config, replication_seed, run_replications)
from .optimizers import ConfigurationError, cor_cfd_gd_run, kw_run, spsa_run
from .oracle import NoisyOracle, get_test_function


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell)
                             for cell in row])


def _load(args) -> ExperimentConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.workers is not None:
        config = replace(config, workers=args.workers)
    return apply_profile(config, args.profile)


def _single_trajectory(config: ExperimentConfig, algorithm: str, sigma: float):
    """One seeded run of ``algorithm`` at noise level ``sigma`` (replication 0)."""
    fn = get_test_function(config.function, config.dimension)
    try:
        sigma_index = config.noise_levels.index(sigma)
    except ValueError:
        sigma_index = 0
    oracle_seed, algo_seed = replication_seed(
        config.master_seed, algorithm, sigma_index, 0).spawn(2)
    oracle = NoisyOracle(fn.mean_fn, fn.dimension, sigma, oracle_seed)
    rng = np.random.default_rng(algo_seed)
    budget = config.largest_budget
    if algorithm == "kw":
        traj = kw_run(oracle, config.domain, float(config.x0[0]), config.kw, budget)
    elif algorithm == "spsa":
        traj = spsa_run(oracle, config.domain, config.x0,
                        config.spsa.schedule(budget), budget, rng)
    else:
        p = config.corcfd
        traj = cor_cfd_gd_run(oracle, config.domain, config.x0,
                              p.estimator_config(), p.armijo_params(),
                              p.n0, p.R, budget, rng)
    return fn, traj


def cmd_run(args) -> int:
    """Write `trajectory.csv`: one row per produced iterate of a single run."""
    config = _load(args)
    if config.algorithm is None:
        raise ConfigurationError("`run` needs `algorithm` in the [experiment] section")
    sigma = config.run_sigma if config.run_sigma is not None else config.noise_levels[0]
    fn, traj = _single_trajectory(config, config.algorithm, sigma)

    header = (["iter", "pairs_used"] + [f"x_{i + 1}" for i in range(fn.dimension)]
              + ["solution_gap", "optimality_gap"])
    rows = []
    for k, x, n_count in traj.iterates:
        # report only iterates produced within the pair budget; a final
        # in-flight line search may run past the cap
        if k == 0 or n_count > 2 * config.largest_budget:
            continue
        rows.append([k, n_count / 2.0, *x,
                     metrics.solution_gap(x, fn.optimum_point),
                     metrics.optimality_gap(fn.mean_fn(x), fn.optimum_value)])
    out = Path(args.out) / "trajectory.csv"
    _write_csv(out, header, rows)
    print(f"wrote {out} ({len(rows)} iterates, algorithm={config.algorithm}, "
          f"sigma={_fmt(sigma)})")
    return 0


def cmd_bench(args) -> int:
    """Write `table.csv`: one row per benchmark-table cell."""
    config = _load(args)
    if not config.algorithms:
        raise ConfigurationError("`bench` needs a nonempty `algorithms` list")
    rows = []
    for algorithm in config.algorithms:
        results = run_replications(config, algorithm)
        for res in results:
            for budget in config.effective_checkpoints:
                rows.append([res.sigma, algorithm, "rmse_solution_gap", budget,
                             res.summary.rmse_solution_gap[budget]])
            for budget in config.effective_checkpoints:
                rows.append([res.sigma, algorithm, "rmse_optimality_gap", budget,
                             res.summary.rmse_optimality_gap[budget]])
            if res.summary.oscillation_percentiles is not None:
                p5, med, p95 = res.summary.oscillation_percentiles
                rows.append([res.sigma, algorithm, "osc_p5", "", p5])
                rows.append([res.sigma, algorithm, "osc_median", "", med])
                rows.append([res.sigma, algorithm, "osc_p95", "", p95])
    out = Path(args.out) / "table.csv"
    _write_csv(out, ["sigma", "method", "metric", "checkpoint", "value"], rows)
    print(f"wrote {out} ({len(rows)} cells)")
    return 0


def cmd_grid(args) -> int:
    """Write `grid.csv` and print the selected (a, c) cell."""
    config = _load(args)
    if config.grid is None:
        raise ConfigurationError("`grid` needs a [grid] section")
    result = grid_search_spsa(config, config.grid)
    out = Path(args.out) / "grid.csv"
    _write_csv(out, ["a", "c", "sigma", "rmse_opt_gap"], result.rows)
    print(f"wrote {out} ({len(result.rows)} cells)")
    print(f"selected a={_fmt(result.best_a)} c={_fmt(result.best_c)} "
          f"rmse_opt_gap={_fmt(result.best_metric)}")
    return 0


def cmd_estimate(args) -> int:
    """Write `estimate.csv`: per-coordinate Cor-CFD diagnostics at one point."""
    config = _load(args)
    if config.estimate is None:
        raise ConfigurationError("`estimate` needs an [estimate] section")
    fn = get_test_function(config.function, config.dimension)
    est = config.estimate
    oracle_seed, algo_seed = replication_seed(
        config.master_seed, "estimate", 0, 0).spawn(2)
    oracle = NoisyOracle(fn.mean_fn, fn.dimension, est.sigma, oracle_seed)
    rng = np.random.default_rng(algo_seed)
    try:
        cfg = replace(config.corcfd.estimator_config(), batch_pairs=est.n,
                      pilot_count=config.corcfd.R)
    except ValueError as exc:
        raise ConfigurationError(f"invalid [estimate]/[corcfd] combination: {exc}")
    grad = cor_cfd_gradient(oracle, est.point, cfg, rng)
    rows = []
    for coord, diag in enumerate(grad.per_coord):
        rows.append([coord + 1, diag.c_hat, diag.sigma2_hat, diag.mu3_hat,
                     diag.intercept, grad.g[coord], est.n])
    out = Path(args.out) / "estimate.csv"
    _write_csv(out, ["coord", "c_hat", "sigma2_hat", "mu3_hat", "intercept",
                     "estimate", "pairs_used"], rows)
    print(f"wrote {out} (d={fn.dimension}, total pairs={grad.pairs_used})")
    return 0


_COMMANDS = {"run": cmd_run, "bench": cmd_bench, "grid": cmd_grid,
             "estimate": cmd_estimate}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdopt",
        description="Derivative-free stochastic optimization benchmarks "
                    "(KW, SPSA, Cor-CFD-GD)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="path to the config file")
        p.add_argument("--out", default=".", help="output directory (created if absent)")
        p.add_argument("--profile", choices=("full", "desk"), default="full")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--workers", type=int, default=None,
                       help="replication worker count override")
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config_path = Path(args.config)
        if not config_path.is_file():
            raise ConfigurationError(f"config file not found: {config_path}")
        Path(args.out).mkdir(parents=True, exist_ok=True)
        return args.handler(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single CLI failure funnel
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run_main() -> None:
    raise SystemExit(main())
