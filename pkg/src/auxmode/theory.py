"""First-order theory of the mode estimators under SRSWOR.

Population quantities are computed once (:func:`compute_population_theory`);
every design-dependent quantity then follows from the sample size through
the finite-population prefactor ``(1 - f) / n`` with ``f = n / N``.

Median-split indicators
-----------------------
``I = 1`` below the median, ``0`` above it and ``1/2`` for a unit lying
exactly on it.  With an even N and distinct values no unit lies on the
median, so this is the usual ``v <= M`` indicator.  With an odd N the half
weight keeps the indicator total at exactly ``N / 2``, which is what makes

    sum((I_x - 1/2) * (I_y - 1/2)) / (N - 1) == N / (N - 1) * (P11 - 1/4)

an identity for every population with distinct values.  ``P11`` itself is
the plain proportion ``sum(I_x * I_y) / N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataset import PairedPopulation, seq_mean
from .density import DensityMethod, density_at_median
from .errors import DataError, ModelBreakdownError
from .estimators import sample_median
from .special import t_quantile as _t_quantile


@dataclass(frozen=True)
class PopulationTheory:
    N: int
    mean_y: float
    mean_x: float
    var_y: float
    var_x: float
    cov_yx: float
    median_y: float
    median_x: float
    mode_y: float
    mode_x: float
    density_y: float
    density_x: float
    s_yMy: float
    s_xMx: float
    s_yMx: float
    s_xMy: float
    p11: float
    p12: float
    p21: float
    p22: float
    density_method: str = "gamma"

    @property
    def mode_ratio(self) -> float:
        """R~ = Y~ / X~."""
        return self.mode_y / self.mode_x

    @property
    def rho_yx(self) -> float:
        return self.cov_yx / math.sqrt(self.var_y * self.var_x)

    @property
    def p_matrix(self) -> tuple[float, float, float, float]:
        return (self.p11, self.p12, self.p21, self.p22)


def median_indicator(values, median: float) -> np.ndarray:
    """1 below ``median``, 0 above, 1/2 on it."""
    v = np.asarray(values, dtype=np.float64)
    return np.where(v < median, 1.0, np.where(v > median, 0.0, 0.5))


def compute_population_theory(pop: PairedPopulation,
                              method: DensityMethod = DensityMethod()) -> PopulationTheory:
    """Every population symbol the variance formulas consume.

    Variances, covariances and indicator cross-moments use divisor N - 1.
    """
    y, x = pop.y, pop.x
    N = pop.N
    if y.min() == y.max() or x.min() == x.max():
        raise DataError("constant variable: population variances vanish")
    mean_y, mean_x = seq_mean(y), seq_mean(x)
    dy, dx = y - mean_y, x - mean_x
    var_y = float(dy @ dy) / (N - 1)
    var_x = float(dx @ dx) / (N - 1)
    cov_yx = float(dy @ dx) / (N - 1)
    med_y, med_x = sample_median(y), sample_median(x)
    iy = median_indicator(y, med_y)
    ix = median_indicator(x, med_x)
    cy, cx = iy - 0.5, ix - 0.5
    # below/above split: first index y, second x, as in the proportions table
    p11 = float(np.sum(iy * ix)) / N
    p21 = float(np.sum((1.0 - iy) * ix)) / N
    p12 = float(np.sum(iy * (1.0 - ix))) / N
    p22 = float(np.sum((1.0 - iy) * (1.0 - ix))) / N
    return PopulationTheory(
        N=N, mean_y=mean_y, mean_x=mean_x,
        var_y=var_y, var_x=var_x, cov_yx=cov_yx,
        median_y=med_y, median_x=med_x,
        mode_y=3.0 * med_y - 2.0 * mean_y,
        mode_x=3.0 * med_x - 2.0 * mean_x,
        density_y=density_at_median(y, method),
        density_x=density_at_median(x, method),
        s_yMy=float(dy @ cy) / (N - 1),
        s_xMx=float(dx @ cx) / (N - 1),
        s_yMx=float(dy @ cx) / (N - 1),
        s_xMy=float(dx @ cy) / (N - 1),
        p11=p11, p12=p12, p21=p21, p22=p22,
        density_method=method.tag,
    )


def indicator_cross_moment(pop: PairedPopulation) -> float:
    """``sum((I_x - 1/2)(I_y - 1/2)) / (N - 1)``."""
    iy = median_indicator(pop.y, sample_median(pop.y))
    ix = median_indicator(pop.x, sample_median(pop.x))
    return float(np.sum((ix - 0.5) * (iy - 0.5))) / (pop.N - 1)


def _check_n(theory: PopulationTheory, n) -> int:
    if int(n) != n or not 0 < n <= theory.N:
        raise DataError(f"sample size must satisfy 0 < n <= N={theory.N}, got {n!r}")
    return int(n)


def fpc_factor(N: int, n: int) -> float:
    """``(1 - f) / n`` with ``f = n / N``."""
    return (1.0 - n / N) / n


def median_variance(theory: PopulationTheory, n: int) -> float:
    """Large-sample variance of the sample median of y."""
    n = _check_n(theory, n)
    return fpc_factor(theory.N, n) / 4.0 * theory.density_y ** -2


@dataclass(frozen=True)
class ModeMomentSet:
    """Variances and covariance of the naive mode estimators at size n.

    The ``unit_*`` fields hold the bracketed population terms; the design
    quantities are those times ``(1 - f) / n``.  Ratios of them (rho, the
    coefficients of variation, optimal scalars) are therefore free of n.
    """

    n: int
    N: int
    unit_var_y: float
    unit_var_x: float
    unit_cov: float
    mode_y: float
    mode_x: float

    @property
    def f(self) -> float:
        return self.n / self.N

    @property
    def prefactor(self) -> float:
        return fpc_factor(self.N, self.n)

    @property
    def var_mode_y(self) -> float:
        return self.prefactor * self.unit_var_y

    @property
    def var_mode_x(self) -> float:
        return self.prefactor * self.unit_var_x

    @property
    def cov_modes(self) -> float:
        return self.prefactor * self.unit_cov

    @property
    def rho(self) -> float:
        return self.unit_cov / math.sqrt(self.unit_var_y * self.unit_var_x)

    @property
    def cv_y(self) -> float:
        return math.sqrt(self.var_mode_y) / self.mode_y

    @property
    def cv_x(self) -> float:
        return math.sqrt(self.var_mode_x) / self.mode_x

    @property
    def unit_cv_ratio(self) -> float:
        """C_x~ / C_y~, which does not depend on n."""
        return (math.sqrt(self.unit_var_x) / self.mode_x) / (math.sqrt(self.unit_var_y) / self.mode_y)


def mode_moments(theory: PopulationTheory, n: int) -> ModeMomentSet:
    """V(y~), V(x~) and Cov(y~, x~) to first order.

    Raises :class:`ModelBreakdownError` when the first-order "variance" of
    either naive mode is not positive, or when the implied correlation falls
    outside [-1, 1].
    """
    n = _check_n(theory, n)
    fy, fx = theory.density_y, theory.density_x
    if not (fy > 0 and fx > 0):
        raise ModelBreakdownError("densities at the medians must be positive")
    unit_vy = 2.25 / fy ** 2 + 4.0 * theory.var_y + 12.0 * theory.s_yMy / fy
    unit_vx = 2.25 / fx ** 2 + 4.0 * theory.var_x + 12.0 * theory.s_xMx / fx
    unit_cov = (9.0 * (theory.p11 - 0.25) / (fx * fy)
                + 6.0 * theory.s_yMx / fx
                + 6.0 * theory.s_xMy / fy
                + 4.0 * theory.cov_yx)
    for label, v in (("V(y~)", unit_vy), ("V(x~)", unit_vx)):
        if not v > 0:
            raise ModelBreakdownError(
                f"first-order {label} is not positive (bracket = {v:.6g}); "
                "the approximation breaks down for this population")
    mm = ModeMomentSet(n=n, N=theory.N, unit_var_y=unit_vy, unit_var_x=unit_vx,
                       unit_cov=unit_cov, mode_y=theory.mode_y, mode_x=theory.mode_x)
    if abs(mm.rho) > 1.0:
        raise ModelBreakdownError(f"first-order correlation of the naive modes is {mm.rho:.6g}")
    return mm


def _require_mode_x(theory: PopulationTheory) -> None:
    if theory.mode_x == 0.0:
        raise ModelBreakdownError("auxiliary population mode is zero")


def mse_naive_ratio(mm: ModeMomentSet, theory: PopulationTheory) -> float:
    _require_mode_x(theory)
    R = theory.mode_ratio
    return mm.var_mode_y + R * R * mm.var_mode_x - 2.0 * R * mm.cov_modes


def mse_naive_product(mm: ModeMomentSet, theory: PopulationTheory) -> float:
    _require_mode_x(theory)
    R = theory.mode_ratio
    return mm.var_mode_y + R * R * mm.var_mode_x + 2.0 * R * mm.cov_modes


class BiasMSE(NamedTuple):
    bias: float
    mse: float


def _shift(theory: PopulationTheory, scalar: float, name: str) -> float:
    d = theory.mode_x + scalar
    if d == 0.0:
        raise ModelBreakdownError(f"X~ + {name} vanishes")
    return d


def transformed_ratio_theory(mm: ModeMomentSet, theory: PopulationTheory, L1: float) -> BiasMSE:
    d = _shift(theory, L1, "L1")
    Y = theory.mode_y
    a = Y / d
    bias = Y * (mm.var_mode_x / (d * d) - mm.cov_modes / (Y * d))
    mse = mm.var_mode_y + a * a * mm.var_mode_x - 2.0 * a * mm.cov_modes
    return BiasMSE(bias, mse)


def transformed_product_theory(mm: ModeMomentSet, theory: PopulationTheory, K1: float) -> BiasMSE:
    d = _shift(theory, K1, "K1")
    Y = theory.mode_y
    a = Y / d
    bias = Y * (mm.var_mode_x / (d * d) + mm.cov_modes / (Y * d))
    mse = mm.var_mode_y + a * a * mm.var_mode_x + 2.0 * a * mm.cov_modes
    return BiasMSE(bias, mse)


def optimal_scalars(mm: ModeMomentSet, theory: PopulationTheory):
    """MSE-minimizing ``(L1, K1)`` as a :class:`ScalarChoice`.

    ``L1 = Y~ V(x~) / Cov - X~`` and ``K1 = -Y~ V(x~) / Cov - X~``; both are
    computed from the n-free unit terms, so they exist even at n = N.
    """
    from .estimators import ScalarChoice

    if mm.unit_cov == 0.0:
        raise ModelBreakdownError("Cov(y~, x~) = 0: no finite optimal scalar")
    g = theory.mode_y * mm.unit_var_x / mm.unit_cov
    return ScalarChoice(L1=g - theory.mode_x, K1=-g - theory.mode_x)


class OptimalMSE(NamedTuple):
    mse_tr_opt: float
    mse_tp_opt: float
    mse_tr_closed_form: float
    mse_tp_as_printed: float


def optimal_mse(mm: ModeMomentSet, theory: PopulationTheory) -> OptimalMSE:
    """Minimum MSEs of the transformed estimators.

    ``mse_tr_opt``/``mse_tp_opt`` evaluate the MSE expressions at the optimal
    scalars (both equal ``V(y~)(1 - rho^2)`` analytically).  The closed form
    ``V(1 - rho^2)`` and the product variant ``V(1 + rho^2)`` as it appears
    in print are returned alongside for comparison only.
    """
    s = optimal_scalars(mm, theory)
    rho2 = mm.rho ** 2
    return OptimalMSE(
        mse_tr_opt=transformed_ratio_theory(mm, theory, s.L1).mse,
        mse_tp_opt=transformed_product_theory(mm, theory, s.K1).mse,
        mse_tr_closed_form=mm.var_mode_y * (1.0 - rho2),
        mse_tp_as_printed=mm.var_mode_y * (1.0 + rho2),
    )


class EfficiencyConditions(NamedTuple):
    vs_naive: bool
    vs_ratio: bool
    thresholds: tuple[float, float]


def efficiency_conditions(mm: ModeMomentSet, theory: PopulationTheory, L1: float) -> EfficiencyConditions:
    """When does the transformed ratio estimator beat y~ and t_r?

    Thresholds are ``(1/2)(X~/(X~+L1)) C_x~/C_y~`` against the naive
    estimator and ``(1/2)(X~/(X~+L1) + 1) C_x~/C_y~`` against the ratio
    estimator.  The comparison is ``rho >= threshold`` when the factor
    multiplying it is positive (``a = Y~/(X~+L1) > 0`` for the first,
    ``a > R~`` for the second) and ``rho <= threshold`` when it is negative;
    a zero factor means the two MSEs coincide.  For positive modes and
    ``L1 > 0`` the second comparison therefore runs as ``rho <= threshold``.
    """
    if not (theory.mode_y > 0 and mm.unit_var_y > 0):
        raise ModelBreakdownError("coefficient of variation of y~ must be positive")
    _require_mode_x(theory)
    d = _shift(theory, L1, "L1")
    cv_ratio = mm.unit_cv_ratio
    w = theory.mode_x / d
    thr_naive = 0.5 * w * cv_ratio
    thr_ratio = 0.5 * (w + 1.0) * cv_ratio
    rho = mm.rho
    a = theory.mode_y / d
    R = theory.mode_ratio

    def holds(rho, thr, sign):
        if sign > 0:
            return rho >= thr
        if sign < 0:
            return rho <= thr
        return True

    vs_naive = holds(rho, thr_naive, np.sign(a))
    vs_ratio = holds(rho, thr_ratio, np.sign(a - R))
    return EfficiencyConditions(bool(vs_naive), bool(vs_ratio), (thr_naive, thr_ratio))


def relative_efficiency(mse_base: float, mse: float) -> float:
    """``100 * mse_base / mse`` in percent."""
    if mse == 0:
        raise ZeroDivisionError("relative efficiency undefined for zero MSE")
    if mse < 0:
        raise ModelBreakdownError("negative MSE")
    return 100.0 * mse_base / mse


def t_quantile(df: int, p: float) -> float:
    """Student t quantile; see :func:`auxmode.special.t_quantile`."""
    return _t_quantile(df, p)


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    df: int

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def confidence_interval(estimate: float, mse: float, n: int, level: float = 0.95) -> ConfidenceInterval:
    """``estimate -/+ t_{n-1}(1 - alpha/2) sqrt(mse)`` with ``alpha = 1 - level``."""
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level!r}")
    if mse < 0:
        raise ModelBreakdownError("negative MSE")
    if n < 2:
        raise DataError("confidence interval needs n >= 2")
    alpha = 1.0 - level
    half = t_quantile(n - 1, 1.0 - alpha / 2.0) * math.sqrt(mse)
    return ConfidenceInterval(lower=estimate - half, upper=estimate + half, level=level, df=n - 1)


@dataclass(frozen=True)
class TheoryReport:
    n: int
    L1: float
    K1: float
    var_mode_y: float
    var_mode_x: float
    cov_modes: float
    rho: float
    mse_naive: float
    mse_ratio: float
    mse_product: float
    mse_tr: float
    mse_tp: float
    bias_tr: float
    bias_tp: float
    L1_opt: float
    K1_opt: float
    mse_tr_opt: float
    mse_tp_opt: float
    mse_tp_opt_as_printed: float
    re_ratio: float
    re_tr: float
    re_tr_opt: float
    efficiency_vs_naive: bool
    efficiency_vs_ratio: bool
    threshold_vs_naive: float
    threshold_vs_ratio: float


def theory_report(theory: PopulationTheory, n: int, L1: float, K1: float) -> TheoryReport:
    """Exact (first-order) summary at sample size ``n`` and scalars (L1, K1).

    Requires ``n < N``: at n = N every MSE is zero and relative
    efficiencies are undefined.
    """
    mm = mode_moments(theory, n)
    if mm.n >= mm.N:
        raise DataError("theory report needs n < N")
    opt = optimal_scalars(mm, theory)
    om = optimal_mse(mm, theory)
    tr = transformed_ratio_theory(mm, theory, L1)
    tp = transformed_product_theory(mm, theory, K1)
    mse_r = mse_naive_ratio(mm, theory)
    eff = efficiency_conditions(mm, theory, L1)
    return TheoryReport(
        n=mm.n, L1=L1, K1=K1,
        var_mode_y=mm.var_mode_y, var_mode_x=mm.var_mode_x, cov_modes=mm.cov_modes, rho=mm.rho,
        mse_naive=mm.var_mode_y, mse_ratio=mse_r, mse_product=mse_naive_product(mm, theory),
        mse_tr=tr.mse, mse_tp=tp.mse, bias_tr=tr.bias, bias_tp=tp.bias,
        L1_opt=opt.L1, K1_opt=opt.K1,
        mse_tr_opt=om.mse_tr_opt, mse_tp_opt=om.mse_tp_opt,
        mse_tp_opt_as_printed=om.mse_tp_as_printed,
        re_ratio=relative_efficiency(mm.var_mode_y, mse_r),
        re_tr=relative_efficiency(mm.var_mode_y, tr.mse),
        re_tr_opt=relative_efficiency(mm.var_mode_y, om.mse_tr_opt),
        efficiency_vs_naive=eff.vs_naive, efficiency_vs_ratio=eff.vs_ratio,
        threshold_vs_naive=eff.thresholds[0], threshold_vs_ratio=eff.thresholds[1],
    )
