"""Experiment orchestration: seeded replications, checkpoints, and grid search.

Every replication owns an independent oracle and algorithm RNG derived from
``(master_seed, algorithm, noise-level index, replication index)``, so results
are reproducible and independent of worker scheduling. Configurations load
from sectioned key/value text files (one section per algorithm block).
"""

from __future__ import annotations

import configparser
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import metrics
from .estimators import CorCfdConfig
from .optimizers import (ArmijoParams, ConfigurationError, GainSchedule,
                         cor_cfd_gd_run, kw_run, spsa_run)
from .oracle import BoxDomain, NoisyOracle, get_test_function

ALGORITHMS = ("kw", "spsa", "corcfd")

# Stable per-algorithm seed keys; never reorder, or every table changes.
_ALGO_SEED_ID = {"kw": 1, "spsa": 2, "corcfd": 3, "estimate": 4}


@dataclass(frozen=True)
class GridSpec:
    """SPSA tuning grid; selection metric is RMSE(optimality gap) at the largest budget."""

    a_values: tuple[float, ...]
    c_values: tuple[float, ...]

    def __post_init__(self):
        if not self.a_values or not self.c_values:
            raise ConfigurationError("grid needs at least one a value and one c value")


@dataclass(frozen=True)
class SpsaParams:
    """SPSA gains; ``A = None`` resolves to 10% of the largest pair budget."""

    a: float = 1e-9
    c: float = 2.0
    A: float | None = None

    def schedule(self, budget_pairs: int) -> GainSchedule:
        A = 0.1 * budget_pairs if self.A is None else self.A
        return GainSchedule.spsa(a=self.a, c=self.c, A=A)


@dataclass(frozen=True)
class CorCfdGdParams:
    """Cor-CFD-GD block: estimator settings plus line-search constants."""

    n0: int = 20
    R: int = 10
    c_base: float = 1.0
    pilot_spread: float = 0.5
    bootstrap_reps: int = 200
    l1: float = 1e-4
    l2: float = 0.5
    a0: float = 1.0
    max_backtracks: int = 30

    def estimator_config(self) -> CorCfdConfig:
        return CorCfdConfig(pilot_count=self.R, batch_pairs=self.n0,
                            base_perturbation=self.c_base,
                            pilot_spread=self.pilot_spread,
                            bootstrap_reps=self.bootstrap_reps)

    def armijo_params(self) -> ArmijoParams:
        return ArmijoParams(l1=self.l1, l2=self.l2, a0=self.a0,
                            max_backtracks=self.max_backtracks)


@dataclass(frozen=True)
class EstimateParams:
    """Inputs of a single standalone gradient-estimation call."""

    point: np.ndarray
    n: int = 1000
    sigma: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark cell family: a function, noise levels, and algorithm blocks.

    ``checkpoints`` are listed pair budgets; for ``fn213`` the effective
    budgets are the listed values times the dimension.
    """

    function: str
    dimension: int
    noise_levels: tuple[float, ...]
    x0: np.ndarray
    domain: BoxDomain
    checkpoints: tuple[int, ...]
    replications: int
    master_seed: int
    kw: GainSchedule = field(default_factory=GainSchedule.kw)
    spsa: SpsaParams = field(default_factory=SpsaParams)
    corcfd: CorCfdGdParams = field(default_factory=CorCfdGdParams)
    grid: GridSpec | None = None
    algorithm: str | None = None            # `run` subcommand
    algorithms: tuple[str, ...] = ()        # `bench` subcommand
    run_sigma: float | None = None          # `run`/`estimate` noise level
    estimate: EstimateParams | None = None  # `estimate` subcommand
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if not self.noise_levels:
            raise ConfigurationError("at least one noise level is required")
        if not self.checkpoints:
            raise ConfigurationError("at least one checkpoint budget is required")
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ConfigurationError("checkpoint budgets must be strictly increasing")
        if any(b < 1 for b in self.checkpoints):
            raise ConfigurationError("checkpoint budgets must be positive")
        if self.algorithm is not None and self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        for alg in self.algorithms:
            if alg not in ALGORITHMS:
                raise ConfigurationError(f"unknown algorithm {alg!r}")
        # Fails early on bad function/dimension combinations.
        fn = get_test_function(self.function, self.dimension)
        if self.x0.shape[0] != fn.dimension:
            raise ConfigurationError("x0 does not match the function dimension")

    @property
    def budget_multiplier(self) -> int:
        """Listed budgets are scaled by the dimension for fn213."""
        return self.dimension if self.function == "fn213" else 1

    @property
    def effective_checkpoints(self) -> tuple[int, ...]:
        m = self.budget_multiplier
        return tuple(b * m for b in self.checkpoints)

    @property
    def largest_budget(self) -> int:
        return self.effective_checkpoints[-1]


@dataclass(frozen=True)
class ReplicationResult:
    """Raw gap series and the aggregated summary for one noise level."""

    sigma: float
    summary: metrics.ReplicationSummary
    solution_gaps: np.ndarray    # shape (replications, checkpoints)
    optimality_gaps: np.ndarray  # shape (replications, checkpoints)
    oscillation: np.ndarray | None


@dataclass(frozen=True)
class GridSearchResult:
    best_a: float
    best_c: float
    best_metric: float
    rows: tuple[tuple[float, float, float, float], ...]  # (a, c, sigma, rmse_opt_gap)


def replication_seed(master_seed: int, algorithm: str, sigma_index: int,
                     rep: int) -> np.random.SeedSequence:
    """Deterministic seed for one replication, independent of scheduling."""
    return np.random.SeedSequence(
        [int(master_seed), _ALGO_SEED_ID[algorithm], int(sigma_index), int(rep)])


def _run_single_replication(config: ExperimentConfig, algorithm: str,
                            sigma_index: int, rep: int,
                            spsa_override: SpsaParams | None = None):
    """Run one replication to the largest budget; return per-checkpoint gaps.

    Returns ``(solution_gaps, optimality_gaps, settle_index)`` where the
    settle index is the boundary-oscillation statistic (1-d runs only).
    """
    fn = get_test_function(config.function, config.dimension)
    sigma = config.noise_levels[sigma_index]
    oracle_seed, algo_seed = replication_seed(
        config.master_seed, algorithm, sigma_index, rep).spawn(2)
    oracle = NoisyOracle(fn.mean_fn, fn.dimension, sigma, oracle_seed)
    rng = np.random.default_rng(algo_seed)
    budget = config.largest_budget

    if algorithm == "kw":
        traj = kw_run(oracle, config.domain, float(config.x0[0]), config.kw, budget)
    elif algorithm == "spsa":
        params = spsa_override if spsa_override is not None else config.spsa
        traj = spsa_run(oracle, config.domain, config.x0,
                        params.schedule(budget), budget, rng)
    elif algorithm == "corcfd":
        p = config.corcfd
        traj = cor_cfd_gd_run(oracle, config.domain, config.x0,
                              p.estimator_config(), p.armijo_params(),
                              p.n0, p.R, budget, rng)
    else:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")

    sol = np.empty(len(config.effective_checkpoints))
    opt = np.empty(len(config.effective_checkpoints))
    for i, pairs in enumerate(config.effective_checkpoints):
        x = traj.at_pair_budget(pairs)
        sol[i] = metrics.solution_gap(x, fn.optimum_point)
        opt[i] = metrics.optimality_gap(fn.mean_fn(x), fn.optimum_value)
    settle = None
    if fn.dimension == 1:
        settle = metrics.oscillation_settle_index(
            traj, float(config.domain.lower[0]), float(config.domain.upper[0]))
    return sol, opt, settle


def _pool_map(workers: int, fn, tasks):
    """Apply ``fn`` over argument tuples, preserving task order."""
    if workers <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]


def run_replications(config: ExperimentConfig, algorithm: str,
                     spsa_override: SpsaParams | None = None) -> list[ReplicationResult]:
    """Run all (noise level, replication) cells for one algorithm and aggregate.

    Aggregation is a symmetric reduce over replication indices, so permuting
    workers or replication order cannot change the summaries.
    """
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"unknown algorithm {algorithm!r}")
    results = []
    for sigma_index, sigma in enumerate(config.noise_levels):
        tasks = [(config, algorithm, sigma_index, rep, spsa_override)
                 for rep in range(config.replications)]
        outcomes = _pool_map(config.workers, _run_single_replication, tasks)
        sol = np.stack([o[0] for o in outcomes])
        opt = np.stack([o[1] for o in outcomes])
        settles = [o[2] for o in outcomes]
        osc = None
        osc_pcts = None
        if settles[0] is not None:
            osc = np.array(settles, dtype=int)
            osc_pcts = metrics.percentiles(osc.tolist())
        summary = metrics.ReplicationSummary(
            rmse_solution_gap={b: metrics.rmse(sol[:, i])
                               for i, b in enumerate(config.effective_checkpoints)},
            rmse_optimality_gap={b: metrics.rmse(opt[:, i])
                                 for i, b in enumerate(config.effective_checkpoints)},
            oscillation_percentiles=osc_pcts,
            replication_count=config.replications,
        )
        results.append(ReplicationResult(sigma, summary, sol, opt, osc))
    return results


def grid_search_spsa(config: ExperimentConfig, grid: GridSpec) -> GridSearchResult:
    """Evaluate every (a, c) cell and pick the argmin of the selection metric.

    The metric is the mean over noise levels of RMSE(optimality gap) at the
    largest budget; ties break toward smaller ``a``, then smaller ``c``.
    Replication seeds do not depend on the cell, so cells share noise streams.
    """
    rows = []
    best = None
    for a in grid.a_values:
        for c in grid.c_values:
            override = SpsaParams(a=a, c=c, A=config.spsa.A)
            cell = run_replications(config, "spsa", spsa_override=override)
            cell_metrics = []
            for res in cell:
                value = res.summary.rmse_optimality_gap[config.largest_budget]
                rows.append((a, c, res.sigma, value))
                cell_metrics.append(value)
            score = float(np.mean(cell_metrics))
            key = (score, a, c)
            if best is None or key < best[0]:
                best = (key, a, c)
    (score, _, _), best_a, best_c = best
    return GridSearchResult(best_a, best_c, score, tuple(rows))


def apply_profile(config: ExperimentConfig, profile: str) -> ExperimentConfig:
    """``full`` leaves the config untouched; ``desk`` caps replications at 50
    and divides the listed budgets by 10 (deduplicated, floor of 1)."""
    if profile == "full":
        return config
    if profile != "desk":
        raise ConfigurationError(f"unknown profile {profile!r}")
    scaled = []
    for b in config.checkpoints:
        v = max(1, b // 10)
        if not scaled or v > scaled[-1]:
            scaled.append(v)
    return replace(config, replications=min(50, config.replications),
                   checkpoints=tuple(scaled))


# ---------------------------------------------------------------------------
# Config file parsing
# ---------------------------------------------------------------------------

def _split(raw: str) -> list[str]:
    return raw.replace(",", " ").split()


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in _split(raw))


def _ints(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in _split(raw))


def _tile(values: tuple[float, ...], dimension: int, what: str) -> np.ndarray:
    """Expand a short value list to the full dimension by tiling."""
    if dimension % len(values):
        raise ConfigurationError(
            f"{what} has {len(values)} entries, not a divisor of dimension {dimension}")
    return np.tile(np.asarray(values, dtype=float), dimension // len(values))


def load_config(path) -> ExperimentConfig:
    """Load an :class:`ExperimentConfig` from a sectioned key/value file."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep keys case-sensitive: spsa `a` vs `A`
    read = parser.read(str(path))
    if not read:
        raise ConfigurationError(f"cannot read config file {path}")
    try:
        return _config_from_parser(parser)
    except (configparser.Error, KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid config {path}: {exc}") from exc


def _config_from_parser(parser: configparser.ConfigParser) -> ExperimentConfig:
    exp = parser["experiment"]
    function = exp.get("function")
    if function is None:
        raise ConfigurationError("[experiment] must set `function`")
    dimension = exp.getint("dimension", fallback=1)
    noise_levels = _floats(exp.get("noise_levels", "1"))
    x0 = _tile(_floats(exp.get("x0", "0")), dimension, "x0")
    lower = _tile(_floats(exp.get("lower", "-50")), dimension, "lower")
    upper = _tile(_floats(exp.get("upper", "50")), dimension, "upper")
    checkpoints = _ints(exp.get("checkpoints", "100 1000 10000"))
    replications = exp.getint("replications", fallback=1)
    master_seed = exp.getint("master_seed", fallback=0)
    algorithm = exp.get("algorithm", fallback=None)
    algorithms = tuple(_split(exp.get("algorithms", "")))
    run_sigma = exp.getfloat("sigma", fallback=None)
    workers = exp.getint("workers", fallback=1)

    kw = GainSchedule.kw()
    if parser.has_section("kw"):
        sec = parser["kw"]
        kw = GainSchedule.kw(a=sec.getfloat("a", 1.0), c=sec.getfloat("c", 1.0))

    spsa = SpsaParams()
    if parser.has_section("spsa"):
        sec = parser["spsa"]
        spsa = SpsaParams(a=sec.getfloat("a", 1e-9), c=sec.getfloat("c", 2.0),
                          A=sec.getfloat("A", fallback=None))

    corcfd = CorCfdGdParams()
    if parser.has_section("corcfd"):
        sec = parser["corcfd"]
        corcfd = CorCfdGdParams(
            n0=sec.getint("n0", 20), R=sec.getint("R", 10),
            c_base=sec.getfloat("c_base", 1.0),
            pilot_spread=sec.getfloat("pilot_spread", 0.5),
            bootstrap_reps=sec.getint("bootstrap_reps", 200),
            l1=sec.getfloat("l1", 1e-4), l2=sec.getfloat("l2", 0.5),
            a0=sec.getfloat("a0", 1.0),
            max_backtracks=sec.getint("max_backtracks", 30))
    # surface invalid block combinations at load time, not mid-run
    corcfd.estimator_config()
    corcfd.armijo_params()

    grid = None
    if parser.has_section("grid"):
        sec = parser["grid"]
        grid = GridSpec(a_values=_floats(sec.get("a_values", "")),
                        c_values=_floats(sec.get("c_values", "")))

    estimate = None
    if parser.has_section("estimate"):
        sec = parser["estimate"]
        estimate = EstimateParams(
            point=_tile(_floats(sec.get("point", "0")), dimension, "point"),
            n=sec.getint("n", 1000),
            sigma=sec.getfloat("sigma", 0.0))

    return ExperimentConfig(
        function=function, dimension=dimension, noise_levels=noise_levels,
        x0=x0, domain=BoxDomain(lower, upper), checkpoints=checkpoints,
        replications=replications, master_seed=master_seed, kw=kw, spsa=spsa,
        corcfd=corcfd, grid=grid, algorithm=algorithm, algorithms=algorithms,
        run_sigma=run_sigma, estimate=estimate, workers=workers)
