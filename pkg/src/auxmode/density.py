"""Marginal densities at the median, f_y(M_y) and f_x(M_x).

Two routes: a maximum-likelihood Gamma fit evaluated at the sample median
(the default), and a Gaussian kernel estimate with Silverman's bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import tukey_quartiles
from .errors import DataError, ModelBreakdownError
from .estimators import sample_median
from .special import digamma, trigamma

GAMMA_MLE = "gamma"
KDE_SILVERMAN = "kde"

MIN_FIT_SIZE = 10
MAX_NEWTON_ITER = 100


@dataclass(frozen=True)
class GammaParams:
    shape: float
    scale: float

    def __post_init__(self):
        for name in ("shape", "scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"Gamma {name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class DensityMethod:
    """Which density estimate feeds the variance formulas.

    ``tag`` is ``"gamma"`` (Gamma MLE) or ``"kde"`` (Gaussian kernel,
    Silverman bandwidth unless ``bandwidth`` overrides it).
    """

    tag: str = GAMMA_MLE
    bandwidth: Optional[float] = None

    def __post_init__(self):
        if self.tag not in (GAMMA_MLE, KDE_SILVERMAN):
            raise ValueError(f"unknown density method {self.tag!r}")
        if self.bandwidth is not None:
            if self.tag != KDE_SILVERMAN:
                raise ValueError("a bandwidth override only applies to the kde method")
            if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
                raise ValueError(f"bandwidth must be positive, got {self.bandwidth!r}")

    @classmethod
    def parse(cls, text: str) -> "DensityMethod":
        return cls(tag=text.strip().lower())


def fit_gamma(values) -> GammaParams:
    """Maximum-likelihood Gamma fit.

    Solves ``ln k - digamma(k) = ln(mean) - mean(ln v)`` for the shape ``k``
    by Newton's method started at the moment estimate ``mean**2 / var``;
    the scale is then ``mean / k``.

    Raises
    ------
    DataError
        Non-positive values, fewer than 10 values, or zero spread.
    ModelBreakdownError
        Newton fails to reach relative step 1e-10 within 100 iterations.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < MIN_FIT_SIZE:
        raise DataError(f"Gamma fit needs at least {MIN_FIT_SIZE} values")
    if not np.isfinite(v).all():
        raise DataError("Gamma fit needs finite values")
    if (v <= 0).any():
        raise DataError("Gamma fit needs strictly positive values (try the kde method)")
    if v.min() == v.max():
        raise DataError("Gamma fit undefined for constant data")
    mean = float(v.mean())
    var = float(v.var())
    s = math.log(mean) - float(np.log(v).mean())
    if var <= 0 or s <= 0:
        raise DataError("Gamma fit undefined for data without spread")
    k = mean * mean / var
    for _ in range(MAX_NEWTON_ITER):
        g = math.log(k) - digamma(k) - s
        dg = 1.0 / k - trigamma(k)
        k_new = k - g / dg
        if k_new <= 0:
            k_new = 0.5 * k
        if abs(k_new - k) < 1e-10 * k_new:
            k = k_new
            break
        k = k_new
    else:
        raise ModelBreakdownError("Gamma shape Newton iteration did not converge")
    return GammaParams(shape=k, scale=mean / k)


def gamma_pdf(params: GammaParams, t: float) -> float:
    """Gamma density ``t**(k-1) exp(-t/theta) / (Gamma(k) theta**k)``, in logs."""
    if not t > 0:
        raise ValueError(f"gamma_pdf requires t > 0, got {t!r}")
    k, theta = params.shape, params.scale
    log_pdf = (k - 1.0) * math.log(t) - t / theta - math.lgamma(k) - k * math.log(theta)
    return math.exp(log_pdf)


def silverman_bandwidth(values) -> float:
    """``0.9 * min(sd, IQR/1.34) * n**(-1/5)`` with Tukey-hinge quartiles."""
    v = np.asarray(values, dtype=np.float64)
    sd = float(v.std(ddof=1))
    q1, _, q3 = tukey_quartiles(v)
    return 0.9 * min(sd, (q3 - q1) / 1.34) * v.shape[0] ** -0.2


def kde_at(values, t: float, bandwidth: float) -> float:
    v = np.asarray(values, dtype=np.float64)
    u = (t - v) / bandwidth
    return float(np.exp(-0.5 * u * u).sum() / (v.shape[0] * bandwidth * math.sqrt(2.0 * math.pi)))


def density_at_median(values, method: DensityMethod = DensityMethod()) -> float:
    """Estimated density of ``values`` at their own sample median."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 2:
        raise DataError("density estimation needs at least two values")
    med = sample_median(v)
    if method.tag == GAMMA_MLE:
        dens = gamma_pdf(fit_gamma(v), med)
    else:
        h = method.bandwidth if method.bandwidth is not None else silverman_bandwidth(v)
        if not h > 0:
            raise DataError("zero kernel bandwidth: data have no spread")
        dens = kde_at(v, med, h)
    if method.tag == KDE_SILVERMAN and v.min() == v.max():
        raise DataError("kernel density undefined for constant data")
    if not (dens > 0 and math.isfinite(dens)):
        raise ModelBreakdownError(f"density at the median is not positive ({dens!r})")
    return dens
