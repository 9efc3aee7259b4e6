"""Finite populations of (y, x) pairs: generation, CSV ingestion, summaries
and simple random sampling without replacement (SRSWOR)."""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DataError
from .rng import GAMMA_LABEL, NORMAL_LABEL, SplitMix64, derive_key, uniform_at

MIN_POPULATION = 4
DEFAULT_ENUMERATION_CAP = 10 ** 6


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PairedPopulation:
    """Study variable ``y`` and auxiliary variable ``x`` over N units."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = _frozen(self.y)
        x = _frozen(self.x)
        if y.ndim != 1 or x.ndim != 1 or y.shape != x.shape:
            raise DataError("y and x must be 1-D vectors of equal length")
        if y.shape[0] < MIN_POPULATION:
            raise DataError(f"population too small: N={y.shape[0]} < {MIN_POPULATION}")
        if not (np.isfinite(y).all() and np.isfinite(x).all()):
            raise DataError("population values must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def N(self) -> int:
        return int(self.y.shape[0])

    def __len__(self):
        return self.N


@dataclass(frozen=True)
class GeneratorConfig:
    """Synthetic population ``y = intercept + slope*x + noise_sd*z`` with
    ``x ~ Gamma(shape, scale)`` and ``z ~ N(0, 1)``."""

    N: int = 5000
    gamma_shape: float = 10.0
    gamma_scale: float = 0.667
    intercept: float = 0.75
    slope: float = 0.87
    noise_sd: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if int(self.N) != self.N or self.N < MIN_POPULATION:
            raise DataError(f"N must be an integer >= {MIN_POPULATION}, got {self.N!r}")
        if not (self.gamma_shape > 0 and math.isfinite(self.gamma_shape)):
            raise DataError(f"gamma_shape must be positive, got {self.gamma_shape!r}")
        if not (self.gamma_scale > 0 and math.isfinite(self.gamma_scale)):
            raise DataError(f"gamma_scale must be positive, got {self.gamma_scale!r}")
        if not (self.noise_sd >= 0 and math.isfinite(self.noise_sd)):
            raise DataError(f"noise_sd must be non-negative, got {self.noise_sd!r}")
        if not (math.isfinite(self.intercept) and math.isfinite(self.slope)):
            raise DataError("intercept and slope must be finite")
        if not 0 <= self.seed < 2 ** 64:
            raise DataError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class SampleDraw:
    """One SRSWOR sample; ``indices`` are sorted ascending."""

    indices: np.ndarray
    y_s: np.ndarray
    x_s: np.ndarray

    @property
    def n(self) -> int:
        return int(self.indices.shape[0])


@dataclass(frozen=True)
class VariableSummary:
    min: float
    lower_quartile: float
    median: float
    mean: float
    upper_quartile: float
    max: float

    def as_row(self) -> list[float]:
        return [self.min, self.lower_quartile, self.median, self.mean,
                self.upper_quartile, self.max]


@dataclass(frozen=True)
class SummaryStats:
    y: VariableSummary
    x: VariableSummary


class _Normals:
    """Box-Muller normals from one SplitMix64 stream, used in pairs."""

    def __init__(self, stream: SplitMix64):
        self._stream = stream
        self._spare = None

    def __call__(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = 1.0 - self._stream.random()  # (0, 1], keeps log finite
        u2 = self._stream.random()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare = r * math.sin(theta)
        return r * math.cos(theta)


def _gamma_variate(shape: float, stream: SplitMix64, normal: _Normals) -> float:
    # Marsaglia & Tsang (2000); shape < 1 boosted via G(a) = G(a+1) U^(1/a)
    if shape < 1.0:
        g = _gamma_variate(shape + 1.0, stream, normal)
        u = 1.0 - stream.random()
        return g * u ** (1.0 / shape)
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        z = normal()
        v = 1.0 + c * z
        if v <= 0.0:
            continue
        v = v * v * v
        u = stream.random()
        if u < 1.0 - 0.0331 * z ** 4:
            return d * v
        if u > 0.0 and math.log(u) < 0.5 * z * z + d * (1.0 - v + math.log(v)):
            return d * v


def generate_population(cfg: GeneratorConfig) -> PairedPopulation:
    """Draw a synthetic population from ``cfg``; deterministic in ``cfg.seed``.

    The Gamma and the noise variates come from separate streams, so changing
    ``noise_sd`` (or the line) leaves ``x`` untouched.
    """
    cfg.validate()
    gamma_stream = SplitMix64(derive_key(cfg.seed, GAMMA_LABEL))
    gamma_normals = _Normals(gamma_stream)
    noise = _Normals(SplitMix64(derive_key(cfg.seed, NORMAL_LABEL)))
    x = np.empty(cfg.N)
    z = np.empty(cfg.N)
    for i in range(cfg.N):
        x[i] = cfg.gamma_scale * _gamma_variate(cfg.gamma_shape, gamma_stream, gamma_normals)
        z[i] = noise()
    y = cfg.intercept + cfg.slope * x + cfg.noise_sd * z
    return PairedPopulation(y=y, x=x)


def _parse_float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell.strip())
    except ValueError:
        raise DataError(f"row {row}: non-numeric value {cell!r} in column {column!r}") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}: non-finite value {cell!r} in column {column!r}")
    return value


def load_csv(path) -> PairedPopulation:
    """Read a population from CSV with a ``y,x`` header.

    Column order and header case are free; lines starting with ``#`` are
    skipped.  Row numbers in error messages are 1-based file line numbers.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"no such file: {path}") from None
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not UTF-8 ({exc.reason})") from None
    lines = [(no, line) for no, line in enumerate(text.splitlines(), start=1)
             if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise DataError("no data rows")
    header_no, header_line = lines[0]
    header = [h.strip().lower() for h in next(csv.reader([header_line]))]
    for col in ("y", "x"):
        if header.count(col) != 1:
            raise DataError(f"row {header_no}: header must contain exactly one {col!r} column")
    iy, ix = header.index("y"), header.index("x")
    ys, xs = [], []
    for row_no, cells in zip((no for no, _ in lines[1:]),
                             csv.reader(line for _, line in lines[1:])):
        if len(cells) != len(header):
            raise DataError(f"row {row_no}: expected {len(header)} cells, found {len(cells)}")
        ys.append(_parse_float(cells[iy], row_no, "y"))
        xs.append(_parse_float(cells[ix], row_no, "x"))
    if not ys:
        raise DataError("no data rows")
    if len(ys) < MIN_POPULATION:
        raise DataError(f"population too small: N={len(ys)} < {MIN_POPULATION}")
    return PairedPopulation(y=ys, x=xs)


def format_csv(pop: PairedPopulation, comments=()) -> str:
    """``y,x`` CSV text; values use shortest round-trip repr."""
    lines = [f"# {c}" for c in comments]
    lines.append("y,x")
    lines.extend(f"{yi!r},{xi!r}" for yi, xi in zip(pop.y.tolist(), pop.x.tolist()))
    return "\n".join(lines) + "\n"


def write_csv(pop: PairedPopulation, path, comments=()) -> None:
    Path(path).write_text(format_csv(pop, comments), encoding="utf-8")


def seq_mean(values) -> float:
    """Left-to-right mean, the summation order used by the sampling kernels."""
    values = np.asarray(values, dtype=np.float64)
    return float(np.cumsum(values)[-1] / values.shape[0])


def _median_sorted(v: np.ndarray) -> float:
    n = v.shape[0]
    half = n // 2
    if n % 2:
        return float(v[half])
    return float(0.5 * (v[half - 1] + v[half]))


def tukey_quartiles(values) -> tuple[float, float, float]:
    """Lower hinge, median, upper hinge (median-of-halves).

    For odd counts the overall median is excluded from both halves.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    n = v.shape[0]
    if n == 0:
        raise ValueError("quartiles of an empty vector")
    if n == 1:
        return float(v[0]), float(v[0]), float(v[0])
    half = n // 2
    lower = v[:half]
    upper = v[half + (n % 2):]
    return _median_sorted(lower), _median_sorted(v), _median_sorted(upper)


def _summary(values: np.ndarray) -> VariableSummary:
    q1, med, q3 = tukey_quartiles(values)
    return VariableSummary(
        min=float(values.min()), lower_quartile=q1, median=med,
        mean=seq_mean(values), upper_quartile=q3, max=float(values.max()))


def summarize(pop: PairedPopulation) -> SummaryStats:
    return SummaryStats(y=_summary(pop.y), x=_summary(pop.x))


def _make_draw(pop: PairedPopulation, indices) -> SampleDraw:
    idx = np.sort(np.asarray(indices, dtype=np.int64))
    idx.setflags(write=False)
    return SampleDraw(indices=idx, y_s=_frozen(pop.y[idx]), x_s=_frozen(pop.x[idx]))


def srswor_indices(N: int, n: int, stream_seed: int) -> list[int]:
    """Partial Fisher-Yates shuffle driven by the stream ``stream_seed``.

    Only displaced positions are stored, so memory is O(n).  Step ``j`` swaps
    position ``j`` with ``j + floor(u_j * (N - j))`` where ``u_j`` is the
    j-th uniform of the stream, exactly as the simulation kernels do.
    """
    if not 1 <= n <= N:
        raise ValueError(f"sample size must satisfy 1 <= n <= N={N}, got {n}")
    slots: dict[int, int] = {}
    out = []
    for j in range(n):
        r = j + int(uniform_at(stream_seed, j) * (N - j))
        vj = slots.get(j, j)
        vr = slots.get(r, r)
        slots[r] = vj
        out.append(vr)
    return out


def srswor(pop: PairedPopulation, n: int, stream_seed: int) -> SampleDraw:
    """Draw a simple random sample of ``n`` distinct units."""
    if not isinstance(n, (int, np.integer)) or not 2 <= n <= pop.N:
        raise DataError(f"sample size must satisfy 2 <= n <= N={pop.N}, got {n!r}")
    return _make_draw(pop, srswor_indices(pop.N, int(n), stream_seed))


def enumerate_samples(pop: PairedPopulation, n: int,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[SampleDraw]:
    """Every size-``n`` sample once, in lexicographic index order.

    Raises immediately, before yielding anything, when C(N, n) > ``cap``.
    """
    if not 1 <= n <= pop.N:
        raise DataError(f"sample size must satisfy 1 <= n <= N={pop.N}, got {n!r}")
    total = math.comb(pop.N, n)
    if total > cap:
        raise DataError(f"C({pop.N},{n}) = {total} samples exceeds the enumeration cap {cap}")

    def _gen():
        for combo in itertools.combinations(range(pop.N), n):
            yield _make_draw(pop, combo)

    return _gen()
