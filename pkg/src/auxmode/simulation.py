"""Monte Carlo study of the mode estimators under SRSWOR.

Replication ``k`` at sample size ``n`` always uses the stream
``replication_key(base_seed, n, k)``, so a report is a pure function of the
population and the configuration: independent of thread count, of which
backend ran the kernel, and of the order in which replications finish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .dataset import PairedPopulation, enumerate_samples, srswor, tukey_quartiles
from .density import DensityMethod
from .errors import DataError, ModelBreakdownError
from .estimators import ESTIMATORS, ScalarChoice, all_values, estimate_all
from .rng import replication_keys, replication_key
from .theory import (
    PopulationTheory,
    confidence_interval,
    mode_moments,
    mse_naive_product,
    mse_naive_ratio,
    optimal_scalars,
    t_quantile,
    transformed_product_theory,
    transformed_ratio_theory,
)

OPTIMAL = "optimal"
# largest tolerated share of replications with a degenerate denominator
MAX_EXCLUDED_FRACTION = 1e-3


@dataclass(frozen=True)
class SimConfig:
    reps: int = 10000
    sample_sizes: tuple = (51, 101, 151, 201, 251, 301)
    base_seed: int = 0
    alpha: float = 0.05
    scalars: Union[str, ScalarChoice] = OPTIMAL
    density_method: DensityMethod = field(default_factory=DensityMethod)

    def validate(self, N: int) -> None:
        if int(self.reps) != self.reps or self.reps < 1:
            raise DataError(f"reps must be a positive integer, got {self.reps!r}")
        if not self.sample_sizes:
            raise DataError("at least one sample size is required")
        for n in self.sample_sizes:
            if int(n) != n or not 1 < n <= N:
                raise DataError(f"sample size {n!r} outside (1, N={N}]")
        if not 0 < self.alpha < 1:
            raise DataError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not (self.scalars == OPTIMAL or isinstance(self.scalars, ScalarChoice)):
            raise DataError("scalars must be 'optimal' or a ScalarChoice")
        if not 0 <= self.base_seed < 2 ** 64:
            raise DataError("base_seed must be an unsigned 64-bit integer")


def resolve_scalars(theory: PopulationTheory, scalars) -> ScalarChoice:
    if scalars == OPTIMAL:
        return optimal_scalars(mode_moments(theory, 1), theory)
    return scalars


def exact_mses(theory: PopulationTheory, n: int, scalars: ScalarChoice) -> dict[str, float]:
    """First-order MSE of each estimator at size ``n``."""
    mm = mode_moments(theory, n)
    return {
        "naive": mm.var_mode_y,
        "ratio": mse_naive_ratio(mm, theory),
        "product": mse_naive_product(mm, theory),
        "transformed_ratio": transformed_ratio_theory(mm, theory, scalars.L1).mse,
        "transformed_product": transformed_product_theory(mm, theory, scalars.K1).mse,
    }


@dataclass(frozen=True)
class EstimatorStats:
    n: int
    estimator: str
    sim_mse: float
    arb: float
    re_percent: float
    exact_mse: float
    exact_over_sim_ratio: float
    coverage_percent: float
    mean_estimate: float
    lower_quartile: float
    median: float
    upper_quartile: float
    sim_ci_lower: float
    sim_ci_upper: float
    valid_reps: int
    excluded: int


@dataclass(frozen=True)
class SimReport:
    reps: int
    alpha: float
    base_seed: int
    mode_y: float
    mode_x: float
    L1: float
    K1: float
    rows: tuple

    def get(self, estimator: str, n: int) -> EstimatorStats:
        for row in self.rows:
            if row.estimator == estimator and row.n == n:
                return row
        raise KeyError((estimator, n))

    @property
    def sample_sizes(self) -> list[int]:
        return sorted({row.n for row in self.rows})


def simulate_estimates(pop: PairedPopulation, theory: PopulationTheory, n: int, reps: int,
                       base_seed: int, scalars: ScalarChoice, threads=None) -> np.ndarray:
    """Estimates of all five estimators for replications ``0 .. reps-1``.

    Returns an array of shape ``(reps, 5)``; NaN marks a degenerate
    denominator.
    """
    modes = _kernels.naive_modes(pop.y, pop.x, n, replication_keys(base_seed, n, reps), threads)
    return all_values(modes[:, 0], modes[:, 1], theory.mode_x, scalars)


def _safe_ratio(num: float, den: float) -> float:
    if den == 0.0:
        return math.nan
    return num / den


def _summarize_estimates(est: np.ndarray, n: int, theory: PopulationTheory,
                         exact: dict[str, float], tq: float, reps: int) -> list[EstimatorStats]:
    Y = theory.mode_y
    stats = []
    sim = {}
    for j, name in enumerate(ESTIMATORS):
        col = est[:, j]
        ok = ~np.isnan(col)
        excluded = int(reps - ok.sum())
        if excluded > MAX_EXCLUDED_FRACTION * reps:
            raise ModelBreakdownError(
                f"{name} at n={n}: {excluded} of {reps} replications have a degenerate "
                f"denominator (more than {MAX_EXCLUDED_FRACTION:.1%})")
        v = col[ok]
        err = v - Y
        sim[name] = float(np.sum(err * err)) / v.shape[0]
        half = tq * math.sqrt(exact[name])
        covered = np.count_nonzero((v - half <= Y) & (Y <= v + half))
        q1, med, q3 = tukey_quartiles(v)
        mean_est = float(np.sum(v)) / v.shape[0]
        stats.append(dict(
            n=n, estimator=name, sim_mse=sim[name],
            arb=abs(float(np.sum(err)) / v.shape[0]) / abs(Y),
            exact_mse=exact[name],
            exact_over_sim_ratio=_safe_ratio(exact[name], sim[name]),
            coverage_percent=100.0 * covered / v.shape[0],
            mean_estimate=mean_est, lower_quartile=q1, median=med, upper_quartile=q3,
            sim_ci_lower=mean_est - half, sim_ci_upper=mean_est + half,
            valid_reps=int(v.shape[0]), excluded=excluded,
        ))
    out = []
    for s in stats:
        if s["estimator"] == "naive":
            re = 100.0  # by construction
        else:
            re = 100.0 * _safe_ratio(sim["naive"], s["sim_mse"])
        out.append(EstimatorStats(re_percent=re, **s))
    return out


def run_simulation(pop: PairedPopulation, theory: PopulationTheory, cfg: SimConfig,
                   threads: Optional[int] = None) -> SimReport:
    """Simulated MSE, ARB, RE, exact/simulated ratio and CI coverage.

    For each n, ``cfg.reps`` samples are drawn; each estimator's interval in
    replication k is ``est_k -/+ t_{n-1}(1 - alpha/2) sqrt(exact MSE)`` and
    coverage is the share of intervals holding the population mode.
    ``threads`` only changes speed.
    """
    cfg.validate(pop.N)
    if theory.N != pop.N:
        raise DataError("theory was computed for a different population")
    if theory.density_method != cfg.density_method.tag:
        raise DataError("theory density method differs from the configuration")
    scalars = resolve_scalars(theory, cfg.scalars)
    rows = []
    for n in sorted({int(n) for n in cfg.sample_sizes}):
        est = simulate_estimates(pop, theory, n, cfg.reps, cfg.base_seed, scalars, threads)
        exact = exact_mses(theory, n, scalars)
        tq = t_quantile(n - 1, 1.0 - cfg.alpha / 2.0)
        rows.extend(_summarize_estimates(est, n, theory, exact, tq, cfg.reps))
    return SimReport(reps=cfg.reps, alpha=cfg.alpha, base_seed=cfg.base_seed,
                     mode_y=theory.mode_y, mode_x=theory.mode_x,
                     L1=scalars.L1, K1=scalars.K1, rows=tuple(rows))


@dataclass(frozen=True)
class CoverageRow:
    n: int
    estimator: str
    coverage_percent: float
    sim_ci_lower: float
    sim_ci_upper: float
    mean_estimate: float
    lower_quartile: float
    median: float
    upper_quartile: float


def coverage_study(pop: PairedPopulation, theory: PopulationTheory, cfg: SimConfig,
                   threads: Optional[int] = None) -> list[CoverageRow]:
    """Coverage part of :func:`run_simulation`."""
    report = run_simulation(pop, theory, cfg, threads)
    return [CoverageRow(n=r.n, estimator=r.estimator, coverage_percent=r.coverage_percent,
                        sim_ci_lower=r.sim_ci_lower, sim_ci_upper=r.sim_ci_upper,
                        mean_estimate=r.mean_estimate, lower_quartile=r.lower_quartile,
                        median=r.median, upper_quartile=r.upper_quartile)
            for r in report.rows]


@dataclass(frozen=True)
class ExactInterval:
    n: int
    estimator: str
    estimate: float
    lower: float
    upper: float
    exact_mse: float


def exact_intervals(pop: PairedPopulation, theory: PopulationTheory, n: int,
                    scalars: ScalarChoice, seed: int, alpha: float = 0.05) -> list[ExactInterval]:
    """Exact-MSE intervals around the estimates from one sample.

    The sample is replication 0 of the simulation stream for ``(seed, n)``.
    """
    draw = srswor(pop, n, replication_key(seed, n, 0))
    est = estimate_all(draw, theory.mode_x, scalars).as_dict()
    exact = exact_mses(theory, n, scalars)
    out = []
    for name in ESTIMATORS:
        ci = confidence_interval(est[name], exact[name], n, 1.0 - alpha)
        out.append(ExactInterval(n=n, estimator=name, estimate=est[name],
                                 lower=ci.lower, upper=ci.upper, exact_mse=exact[name]))
    return out


@dataclass(frozen=True)
class SweepRow:
    L1: float
    exact_mse: float
    sim_mse: float
    excluded: int
    flagged: bool
    is_opt: bool


@dataclass(frozen=True)
class SweepReport:
    n: int
    reps: int
    seed: int
    L1_opt: float
    exact_naive: float
    exact_ratio: float
    sim_naive: float
    sim_ratio: float
    rows: tuple

    @property
    def grid(self) -> list[float]:
        return [r.L1 for r in self.rows]


def default_grid(L1_opt: float, points: int = 26) -> list[float]:
    """From ``-|L1_opt|`` to ``4 |L1_opt|``."""
    span = abs(L1_opt) if L1_opt != 0 else 1.0
    return np.linspace(-span, 4.0 * span, points).tolist()


def scalar_sweep(pop: PairedPopulation, theory: PopulationTheory, n: int,
                 grid: Sequence[float], reps: int, seed: int,
                 threads: Optional[int] = None) -> SweepReport:
    """Exact and simulated MSE of the transformed ratio estimator over L1.

    All grid points reuse the same ``reps`` samples.  The grid is sorted and
    always includes 0 and the optimum.  A point where ``X~ + L1 = 0``, or
    where too many samples flip the sign of ``x~ + L1``, is kept and flagged
    with NaN in the affected column.
    """
    if not len(grid):
        raise DataError("empty L1 grid")
    if int(n) != n or not 1 < n <= pop.N:
        raise DataError(f"sample size {n!r} outside (1, N={pop.N}]")
    if reps < 1:
        raise DataError("reps must be positive")
    mm = mode_moments(theory, n)
    L1_opt = optimal_scalars(mm, theory).L1
    points = sorted({float(g) for g in grid} | {0.0, L1_opt})
    modes = _kernels.naive_modes(pop.y, pop.x, n, replication_keys(seed, n, reps), threads)
    yt, xt = modes[:, 0], modes[:, 1]
    Y, X = theory.mode_y, theory.mode_x
    rows = []
    for L1 in points:
        flagged = False
        if X + L1 == 0.0:
            rows.append(SweepRow(L1=L1, exact_mse=math.nan, sim_mse=math.nan,
                                 excluded=reps, flagged=True, is_opt=L1 == L1_opt))
            continue
        exact = transformed_ratio_theory(mm, theory, L1).mse
        den = xt + L1
        ok = (den != 0.0) & (np.sign(den) == np.sign(X + L1))
        excluded = int(reps - ok.sum())
        if excluded > MAX_EXCLUDED_FRACTION * reps:
            flagged = True
            sim = math.nan
        else:
            err = yt[ok] * ((X + L1) / den[ok]) - Y
            sim = float(np.sum(err * err)) / err.shape[0]
        rows.append(SweepRow(L1=L1, exact_mse=exact, sim_mse=sim, excluded=excluded,
                             flagged=flagged, is_opt=L1 == L1_opt))
    err_naive = yt - Y
    err_ratio = yt * (X / xt) - Y
    return SweepReport(
        n=int(n), reps=int(reps), seed=int(seed), L1_opt=L1_opt,
        exact_naive=mm.var_mode_y, exact_ratio=mse_naive_ratio(mm, theory),
        sim_naive=float(np.sum(err_naive * err_naive)) / reps,
        sim_ratio=float(np.sum(err_ratio * err_ratio)) / reps,
        rows=tuple(rows))


@dataclass(frozen=True)
class OracleResult:
    estimator: str
    mse: float
    bias: float
    samples: int


def enumeration_oracle(pop: PairedPopulation, n: int, scalars: ScalarChoice,
                       cap: int = 10 ** 6) -> dict[str, OracleResult]:
    """Exact design MSE and bias over all C(N, n) samples, equally weighted.

    Walks :func:`enumerate_samples` with the per-sample estimators, sharing
    no code with the Monte Carlo kernels.
    """
    Y = float(3.0 * np.median(pop.y) - 2.0 * np.mean(pop.y))
    Xt = float(3.0 * np.median(pop.x) - 2.0 * np.mean(pop.x))
    sums = {name: [0.0, 0.0] for name in ESTIMATORS}
    count = 0
    for draw in enumerate_samples(pop, n, cap):
        est = estimate_all(draw, Xt, scalars).as_dict()
        for name in ESTIMATORS:
            e = est[name] - Y
            sums[name][0] += e
            sums[name][1] += e * e
        count += 1
    return {name: OracleResult(estimator=name, mse=s[1] / count, bias=s[0] / count, samples=count)
            for name, s in sums.items()}
