"""Point estimators of the population mode from one sample.

With naive sample modes ``yt = 3 median(y) - 2 mean(y)`` (and ``xt`` for x)
and the known auxiliary population mode ``Xt``:

    naive                yt
    ratio                yt * Xt / xt
    product              yt * xt / Xt
    transformed ratio    yt * (Xt + L1) / (xt + L1)
    transformed product  yt * (xt + K1) / (Xt + K1)

The array functions (``*_values``) take naive modes of many samples at once
and mark degenerate denominators with NaN; the scalar functions raise
:class:`DegenerateDenominatorError` instead.  Both evaluate the same
floating-point expressions, so ``L1 = 0`` reproduces the ratio estimator
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import SampleDraw, seq_mean
from .errors import DataError, DegenerateDenominatorError

ESTIMATORS = ("naive", "ratio", "product", "transformed_ratio", "transformed_product")


def sample_median(values) -> float:
    """Middle order statistic; midpoint of the two central ones for even n."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.shape[0]
    if n == 0:
        raise DataError("median of an empty sample")
    half = n // 2
    if n % 2:
        return float(v[half])
    return float(0.5 * (v[half - 1] + v[half]))


def naive_mode(values) -> float:
    """``3 * median - 2 * mean`` of a sample of at least two values."""
    v = np.asarray(values, dtype=np.float64)
    if v.shape[0] < 2:
        raise DataError("naive mode needs at least two values")
    return 3.0 * sample_median(v) - 2.0 * seq_mean(v)


@dataclass(frozen=True)
class SampleMoments:
    mean_y: float
    mean_x: float
    median_y: float
    median_x: float
    naive_mode_y: float
    naive_mode_x: float
    n: int

    @classmethod
    def from_values(cls, y_s, x_s) -> "SampleMoments":
        y_s = np.asarray(y_s, dtype=np.float64)
        x_s = np.asarray(x_s, dtype=np.float64)
        if y_s.shape != x_s.shape or y_s.shape[0] < 2:
            raise DataError("a sample needs at least two (y, x) pairs")
        my, mx = seq_mean(y_s), seq_mean(x_s)
        dy, dx = sample_median(y_s), sample_median(x_s)
        return cls(mean_y=my, mean_x=mx, median_y=dy, median_x=dx,
                   naive_mode_y=3.0 * dy - 2.0 * my,
                   naive_mode_x=3.0 * dx - 2.0 * mx,
                   n=int(y_s.shape[0]))

    @classmethod
    def from_draw(cls, draw: SampleDraw) -> "SampleMoments":
        return cls.from_values(draw.y_s, draw.x_s)


@dataclass(frozen=True)
class ScalarChoice:
    """Characterizing scalars: L1 for the transformed ratio estimator, K1
    for the transformed product estimator."""

    L1: float = 0.0
    K1: float = 0.0


@dataclass(frozen=True)
class EstimateSet:
    naive: float
    ratio: float
    product: float
    transformed_ratio: float
    transformed_product: float
    scalars: ScalarChoice

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in ESTIMATORS}


def _check_population_denominator(value: float, what: str) -> None:
    if value == 0.0 or not math.isfinite(value):
        raise DegenerateDenominatorError(f"{what} is zero; the estimator is undefined")


def _sign_consistent(den, ref):
    # the sample denominator must be nonzero and share the sign of the
    # population one, otherwise the ratio flips sign silently
    return (den != 0.0) & (np.sign(den) == np.sign(ref))


def ratio_values(yt, xt, Xt):
    yt, xt = np.asarray(yt, dtype=np.float64), np.asarray(xt, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = yt * (Xt / xt)
    return np.where(_sign_consistent(xt, Xt), out, np.nan)


def product_values(yt, xt, Xt):
    yt, xt = np.asarray(yt, dtype=np.float64), np.asarray(xt, dtype=np.float64)
    return yt * (xt / Xt)


def transformed_ratio_values(yt, xt, Xt, L1):
    yt, xt = np.asarray(yt, dtype=np.float64), np.asarray(xt, dtype=np.float64)
    num = Xt + L1
    den = xt + L1
    with np.errstate(divide="ignore", invalid="ignore"):
        out = yt * (num / den)
    return np.where(_sign_consistent(den, num), out, np.nan)


def transformed_product_values(yt, xt, Xt, K1):
    yt, xt = np.asarray(yt, dtype=np.float64), np.asarray(xt, dtype=np.float64)
    return yt * ((xt + K1) / (Xt + K1))


def all_values(yt, xt, Xt, scalars: ScalarChoice) -> np.ndarray:
    """Estimates for many samples, shape ``(M, 5)`` in :data:`ESTIMATORS` order."""
    _check_population_denominator(Xt, "the auxiliary population mode")
    _check_population_denominator(Xt + scalars.L1, "X~ + L1")
    _check_population_denominator(Xt + scalars.K1, "X~ + K1")
    yt = np.asarray(yt, dtype=np.float64)
    return np.column_stack([
        yt,
        ratio_values(yt, xt, Xt),
        product_values(yt, xt, Xt),
        transformed_ratio_values(yt, xt, Xt, scalars.L1),
        transformed_product_values(yt, xt, Xt, scalars.K1),
    ])


def _scalar(value, what: str) -> float:
    v = float(value)
    if math.isnan(v):
        raise DegenerateDenominatorError(f"{what}: sample denominator is zero or has flipped sign")
    return v


def ratio_estimate(sm: SampleMoments, Xt: float) -> float:
    _check_population_denominator(Xt, "the auxiliary population mode")
    return _scalar(ratio_values(sm.naive_mode_y, sm.naive_mode_x, Xt), "ratio estimator")


def product_estimate(sm: SampleMoments, Xt: float) -> float:
    _check_population_denominator(Xt, "the auxiliary population mode")
    return float(product_values(sm.naive_mode_y, sm.naive_mode_x, Xt))


def transformed_ratio_estimate(sm: SampleMoments, Xt: float, L1: float) -> float:
    _check_population_denominator(Xt + L1, "X~ + L1")
    return _scalar(transformed_ratio_values(sm.naive_mode_y, sm.naive_mode_x, Xt, L1),
                   "transformed ratio estimator")


def transformed_product_estimate(sm: SampleMoments, Xt: float, K1: float) -> float:
    _check_population_denominator(Xt + K1, "X~ + K1")
    return float(transformed_product_values(sm.naive_mode_y, sm.naive_mode_x, Xt, K1))


def estimate_all(draw: SampleDraw, Xt: float, scalars: ScalarChoice) -> EstimateSet:
    """All five estimates from one sample.

    Errors name the estimator that failed.
    """
    sm = SampleMoments.from_draw(draw)
    results = {"naive": sm.naive_mode_y}
    steps = (
        ("ratio", lambda: ratio_estimate(sm, Xt)),
        ("product", lambda: product_estimate(sm, Xt)),
        ("transformed_ratio", lambda: transformed_ratio_estimate(sm, Xt, scalars.L1)),
        ("transformed_product", lambda: transformed_product_estimate(sm, Xt, scalars.K1)),
    )
    for name, fn in steps:
        try:
            results[name] = fn()
        except DegenerateDenominatorError as exc:
            raise DegenerateDenominatorError(f"{name}: {exc}") from exc
    return EstimateSet(scalars=scalars, **results)
