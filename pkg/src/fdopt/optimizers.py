"""The three derivative-free optimization loops: KW, SPSA, and Cor-CFD-GD.

All loops drive a :class:`~fdopt.oracle.NoisyOracle` under a shared budget
contract: the budget is a number of sample pairs, one pair equals two oracle
evaluations, and every iterate is projected into the box domain and recorded
together with the evaluation count at which it was produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .estimators import CorCfdConfig, GradientEstimate, cor_cfd_gradient
from .oracle import BoxDomain, NoisyOracle, as_point


class ConfigurationError(ValueError):
    """Run settings that are invalid before any evaluation happens."""


@dataclass(frozen=True)
class GainSchedule:
    """Deterministic step-size and perturbation sequences ``a_k``, ``c_k``."""

    a: float
    c: float
    A: float = 0.0
    a_exponent: float = 1.0
    c_exponent: float = 0.25

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError("gains a and c must be > 0")
        if self.A < 0:
            raise ValueError("stability constant A must be >= 0")

    @classmethod
    def kw(cls, a: float = 1.0, c: float = 1.0) -> "GainSchedule":
        """Classic KW gains ``a_k = a/k``, ``c_k = c/k^(1/4)``."""
        return cls(a=a, c=c, A=0.0, a_exponent=1.0, c_exponent=0.25)

    @classmethod
    def spsa(cls, a: float, c: float, A: float = 0.0) -> "GainSchedule":
        """Standard SPSA gains ``a_k = a/(A+k+1)^0.602``, ``c_k = c/(k+1)^0.101``."""
        return cls(a=a, c=c, A=A, a_exponent=0.602, c_exponent=0.101)


@dataclass
class BudgetLedger:
    """Evaluation counter against a cap of ``2 * budget_pairs`` evaluations."""

    cap: int
    n_count: int = 0

    def charge(self, evaluations: int) -> None:
        self.n_count += evaluations

    @property
    def exhausted(self) -> bool:
        return self.n_count >= self.cap

    def can_afford(self, evaluations: int) -> bool:
        return self.n_count + evaluations <= self.cap


@dataclass
class Trajectory:
    """Iterates of one optimizer run, each stamped with the evaluation count.

    ``iterates[i] = (k, x_k, n_count_at_k)``; the first entry is the starting
    point at count 0. ``ls_exhausted`` lists iteration indices whose Armijo
    search ran out of backtracks (the step was still taken).
    """

    iterates: list[tuple[int, np.ndarray, int]]
    ls_exhausted: list[int] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return self.iterates[0][1].shape[0]

    @property
    def final_x(self) -> np.ndarray:
        return self.iterates[-1][1]

    @property
    def final_n_count(self) -> int:
        return self.iterates[-1][2]

    def at_pair_budget(self, pairs: int) -> np.ndarray:
        """Last iterate produced with at most ``2 * pairs`` evaluations."""
        best = None
        for _, x, n_count in self.iterates:
            if n_count <= 2 * pairs:
                best = x
            else:
                break
        if best is None:
            raise ValueError(f"no iterate within a budget of {pairs} pairs")
        return best

    def xs(self) -> np.ndarray:
        """All iterates as an array of shape (iterations + 1, d)."""
        return np.stack([x for _, x, _ in self.iterates])

    def scalar_series(self) -> np.ndarray:
        if self.dimension != 1:
            raise ValueError("scalar series requires a one-dimensional trajectory")
        return np.array([x[0] for _, x, _ in self.iterates])


@dataclass(frozen=True)
class ArmijoParams:
    """Backtracking parameters for the noise-relaxed sufficient-decrease test."""

    l1: float = 1e-4
    l2: float = 0.5
    a0: float = 1.0
    max_backtracks: int = 30
    sigma2: float = 0.0

    def __post_init__(self):
        if not 0 < self.l1 < 1:
            raise ValueError("l1 must lie in (0, 1)")
        if not 0 < self.l2 < 1:
            raise ValueError("l2 must lie in (0, 1)")
        if self.a0 <= 0:
            raise ValueError("a0 must be > 0")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be >= 1")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be >= 0")


def armijo_search(oracle: NoisyOracle, x, g, params: ArmijoParams) -> tuple[float, int, bool]:
    """Backtracking line search under the noise-relaxed Armijo condition.

    Accepts the first step ``a`` (from ``a0`` downward by factors of ``l2``)
    with ``Y(x - a g) <= Y(x) - l1 a g.g + 2 sigma2``. One fresh baseline
    evaluation of ``Y(x)`` is drawn per search and reused across backtracks.
    Returns ``(a, evaluations_used, accepted)``; when the backtrack budget runs
    out, the smallest trial step is returned with ``accepted=False``.
    """
    p = as_point(x, oracle.dimension)
    g_vec = g.g if isinstance(g, GradientEstimate) else np.asarray(g, dtype=float)
    gg = float(g_vec @ g_vec)
    baseline = oracle.evaluate(p)
    n_ls = 1
    a = params.a0
    for _ in range(params.max_backtracks):
        candidate = oracle.evaluate(p - a * g_vec)
        n_ls += 1
        if candidate <= baseline - params.l1 * a * gg + 2.0 * params.sigma2:
            return a, n_ls, True
        a *= params.l2
    return a / params.l2, n_ls, False


def batch_schedule(n0: int, R: int, k: int) -> int:
    """Batch size at iteration ``k``: ``floor((n0 + k) / R) * R``.

    Nondecreasing in ``k``, always divisible by ``R``, equal to ``n0`` at 0.
    """
    if n0 < 1 or R < 1:
        raise ValueError("n0 and R must be >= 1")
    if n0 % R:
        raise ValueError("R must divide n0")
    if k < 0:
        raise ValueError("k must be >= 0")
    return ((n0 + k) // R) * R


def kw_run(oracle: NoisyOracle, domain: BoxDomain, x0: float,
           schedule: GainSchedule, budget_pairs: int) -> Trajectory:
    """Kiefer-Wolfowitz: one CFD pair per iteration with diminishing gains.

    ``x_{k+1} = project(x_k - a_k g_k)`` with ``a_k = a/(A+k)^p``,
    ``c_k = c/k^q`` (defaults ``p=1``, ``q=1/4``), iterating from ``k=1`` until
    ``2 * budget_pairs`` evaluations are consumed.
    """
    if oracle.dimension != 1:
        raise ValueError("kw_run requires a one-dimensional oracle")
    if budget_pairs < 1:
        raise ValueError("budget must be at least one pair")
    lower = float(domain.lower[0])
    upper = float(domain.upper[0])
    x = min(max(float(x0), lower), upper)
    ledger = BudgetLedger(cap=2 * budget_pairs)
    iterates = [(0, np.array([x]), 0)]
    k = 0
    while not ledger.exhausted:
        k += 1
        a_k = schedule.a / (schedule.A + k) ** schedule.a_exponent
        c_k = schedule.c / k ** schedule.c_exponent
        y_plus = oracle.evaluate((x + c_k,))
        y_minus = oracle.evaluate((x - c_k,))
        ledger.charge(2)
        g = (y_plus - y_minus) / (2.0 * c_k)
        x = min(max(x - a_k * g, lower), upper)
        iterates.append((k, np.array([x]), ledger.n_count))
    return Trajectory(iterates)


def spsa_run(oracle: NoisyOracle, domain: BoxDomain, x0, schedule: GainSchedule,
             budget_pairs: int, rng: np.random.Generator) -> Trajectory:
    """SPSA: two evaluations per iteration along a random Bernoulli direction.

    Draws ``Delta in {-1,+1}^d``, forms the simultaneous-perturbation quotient
    ``g = (Y(x + c Delta) - Y(x - c Delta)) / (2c) * Delta`` (the elementwise
    reciprocal of a sign vector is itself), and takes a projected step with
    ``a_k = a/(A+k+1)^0.602``, ``c_k = c/(k+1)^0.101``.
    """
    if budget_pairs < 1:
        raise ValueError("budget must be at least one pair")
    x = domain.project(as_point(x0, oracle.dimension))
    d = oracle.dimension
    ledger = BudgetLedger(cap=2 * budget_pairs)
    iterates = [(0, x.copy(), 0)]
    k = 0
    while not ledger.exhausted:
        k += 1
        a_k = schedule.a / (schedule.A + k + 1) ** schedule.a_exponent
        c_k = schedule.c / (k + 1) ** schedule.c_exponent
        delta = rng.integers(0, 2, size=d) * 2.0 - 1.0
        y_plus = oracle.evaluate(x + c_k * delta)
        y_minus = oracle.evaluate(x - c_k * delta)
        ledger.charge(2)
        g = (y_plus - y_minus) / (2.0 * c_k) * delta
        x = domain.project(x - a_k * g)
        iterates.append((k, x.copy(), ledger.n_count))
    return Trajectory(iterates)


def cor_cfd_gd_run(oracle: NoisyOracle, domain: BoxDomain, x0, cfg: CorCfdConfig,
                   armijo: ArmijoParams, n0: int, R: int, budget_pairs: int,
                   rng: np.random.Generator) -> Trajectory:
    """Gradient descent with Cor-CFD batch gradients and Armijo line search.

    Starts from a gradient at batch size ``n0``; each iteration runs the line
    search (charging its evaluations), takes a projected step, grows the batch
    by ``batch_schedule``, and estimates a fresh gradient. The loop exits when
    the cap of ``2 * budget_pairs`` evaluations is reached or the remaining
    budget cannot fund the next gradient, so late sample pairs may be left
    unused. The noise-variance term of the Armijo test is fed from the current
    gradient's diagnostics.

    The pilot scale is adapted per coordinate between iterations: where the
    estimated third derivative clearly exceeds its bootstrap dispersion, the
    next pilots re-center on that coordinate's estimated optimal perturbation
    (steep curved regions need much smaller probes than the configured base);
    where the curvature signal is just noise, the scale relaxes back toward
    the configured base, which is what keeps quotient noise low on flat
    landscapes.
    """
    d = oracle.dimension
    if n0 < 1 or R < 1 or n0 % R:
        raise ConfigurationError("n0 must be a positive multiple of R")
    cap = 2 * budget_pairs
    if 2 * d * n0 > cap:
        raise ConfigurationError(
            f"budget of {budget_pairs} pairs cannot fund the initial gradient "
            f"({d * n0} pairs)")
    x = domain.project(as_point(x0, d))
    start = oracle.eval_counter
    ledger = BudgetLedger(cap=cap)
    iterates = [(0, x.copy(), 0)]
    ls_exhausted: list[int] = []

    def next_centers(estimate: GradientEstimate, centers: np.ndarray, n: int) -> np.ndarray:
        scale = cfg.base_perturbation * float(n) ** -0.1
        out = np.empty(d)
        for i, diag in enumerate(estimate.per_coord):
            if diag.curvature_significant and diag.c_hat < 0.25 * centers[i]:
                # Regime change: real curvature demands probes far below
                # anything tried, so the current scale is outside the valid
                # Taylor range.
                out[i] = diag.c_hat
            elif diag.curvature_significant:
                out[i] = min(centers[i], scale)
            else:
                out[i] = min(4.0 * centers[i], scale)
        return out

    centers = np.full(d, cfg.base_perturbation * float(n0) ** -0.1)
    g = cor_cfd_gradient(oracle, x, replace(cfg, batch_pairs=n0, pilot_count=R), rng)
    ledger.n_count = oracle.eval_counter - start
    centers = next_centers(g, centers, n0)

    k = 0
    while not ledger.exhausted:
        params = replace(armijo, sigma2=g.mean_sigma2_hat)
        a_k, _, accepted = armijo_search(oracle, x, g, params)
        ledger.n_count = oracle.eval_counter - start
        k += 1
        if not accepted:
            ls_exhausted.append(k)
        x = domain.project(x - a_k * g.g)
        iterates.append((k, x.copy(), ledger.n_count))
        n_k = batch_schedule(n0, R, k)
        if ledger.exhausted or not ledger.can_afford(2 * d * n_k):
            break
        # Feed the adapted centers through the pilot base scale so pilots at
        # batch n_k come out as center * U(1 +- spread).
        base = centers * float(n_k) ** 0.1
        g = cor_cfd_gradient(oracle, x, replace(cfg, batch_pairs=n_k, pilot_count=R),
                             rng, base_perturbations=base)
        ledger.n_count = oracle.eval_counter - start
        centers = next_centers(g, centers, n_k)
    return Trajectory(iterates, ls_exhausted=ls_exhausted)
