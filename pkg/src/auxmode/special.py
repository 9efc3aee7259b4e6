"""Special functions: digamma, trigamma, regularized incomplete beta and
the Student t distribution built on it.

``math.lgamma`` from the standard library supplies ln Gamma.
"""

from __future__ import annotations

import math

_EULER = 0.57721566490153286061


def digamma(x: float) -> float:
    """Digamma function psi(x) for x > 0.

    Shifts the argument above 10 with ``psi(x) = psi(x + 1) - 1/x`` and then
    applies the asymptotic series in ``1/x**2``.
    """
    if not x > 0:
        raise ValueError(f"digamma requires x > 0, got {x!r}")
    if x < 1e-6:
        return -_EULER - 1.0 / x + 1.6449340668482264 * x
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    r = 1.0 / (x * x)
    series = r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (
        1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12))))))
    return acc + math.log(x) - 0.5 / x - series


def trigamma(x: float) -> float:
    """Trigamma function psi'(x) for x > 0."""
    if not x > 0:
        raise ValueError(f"trigamma requires x > 0, got {x!r}")
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    r = 1.0 / (x * x)
    # 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
    series = (1.0 + r * (1.0 / 6 - r * (1.0 / 30 - r * (1.0 / 42 - r * (
        1.0 / 30 - r * (5.0 / 66 - r * (691.0 / 2730 - r * 7.0 / 6))))))) / x
    return acc + series + 0.5 * r


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a > 0 and b > 0")
    if x < 0 or x > 1:
        raise ValueError(f"betainc requires 0 <= x <= 1, got {x!r}")
    if x == 0.0 or x == 1.0:
        return x
    lbt = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
           + a * math.log(x) + b * math.log1p(-x))
    bt = math.exp(lbt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def t_cdf(t: float, df: float) -> float:
    """Student t distribution function."""
    if df <= 0:
        raise ValueError("df must be positive")
    if t == 0.0:
        return 0.5
    tail = 0.5 * betainc(0.5 * df, 0.5, df / (df + t * t))
    return 1.0 - tail if t > 0 else tail


def t_sf(t: float, df: float) -> float:
    """Upper tail ``P(T > t)``; no cancellation for t >= 0."""
    if t < 0:
        return t_cdf(-t, df)
    return 0.5 * betainc(0.5 * df, 0.5, df / (df + t * t))


def t_pdf(t: float, df: float) -> float:
    lc = (math.lgamma(0.5 * (df + 1.0)) - math.lgamma(0.5 * df)
          - 0.5 * math.log(df * math.pi))
    return math.exp(lc - 0.5 * (df + 1.0) * math.log1p(t * t / df))


def t_quantile(df: float, p: float) -> float:
    """Inverse of :func:`t_cdf` in its first argument.

    Brackets the root, bisects to a coarse width and polishes with Newton
    steps; relative error is near machine precision away from the extreme tails.
    """
    if not df >= 1:
        raise ValueError(f"df must be >= 1, got {df!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    # solve in the smaller tail; p is exact there, 1 - p may not be
    q = p if p < 0.5 else 1.0 - p
    sign = -1.0 if p < 0.5 else 1.0
    lo, hi = 0.0, 1.0
    while t_sf(hi, df) > q:
        lo, hi = hi, 2.0 * hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if t_sf(mid, df) > q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6 * max(1.0, hi):
            break
    t = 0.5 * (lo + hi)
    for _ in range(8):
        step = (q - t_sf(t, df)) / t_pdf(t, df)
        t -= step
        if abs(step) < 1e-14 * max(1.0, abs(t)):
            break
    return sign * t
