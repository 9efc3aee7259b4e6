import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from auxmode import _kernels
from auxmode.dataset import (
    GeneratorConfig,
    PairedPopulation,
    enumerate_samples,
    format_csv,
    generate_population,
    load_csv,
    srswor,
    srswor_indices,
    summarize,
    tukey_quartiles,
    write_csv,
)
from auxmode.errors import DataError
from auxmode.estimators import naive_mode
from auxmode.rng import replication_key, replication_keys


# ---------------------------------------------------------------- population

def test_population_invariants():
    with pytest.raises(DataError):
        PairedPopulation(y=[1, 2, 3], x=[1, 2, 3])
    with pytest.raises(DataError):
        PairedPopulation(y=[1, 2, 3, 4], x=[1, 2, 3])
    with pytest.raises(DataError):
        PairedPopulation(y=[1, 2, 3, float("nan")], x=[1, 2, 3, 4])
    pop = PairedPopulation(y=[1, 2, 3, 4], x=[4, 3, 2, 1])
    assert pop.N == 4
    with pytest.raises(ValueError):
        pop.y[0] = 10.0


def test_generator_moments_converge():
    # E[x] = k theta, E[y] = b0 + b1 E[x], Var[x] = k theta^2
    pop = generate_population(GeneratorConfig(N=200000, seed=3))
    ex = 10.0 * 0.667
    assert abs(pop.x.mean() - ex) < 0.02
    assert abs(pop.y.mean() - (0.75 + 0.87 * ex)) < 0.02
    assert abs(pop.x.var() - 10.0 * 0.667 ** 2) / (10.0 * 0.667 ** 2) < 0.02
    vy = 0.87 ** 2 * 10.0 * 0.667 ** 2 + 0.25
    assert abs(pop.y.var() - vy) / vy < 0.02
    rho = 0.87 * math.sqrt(10.0) * 0.667 / math.sqrt(vy)
    assert abs(np.corrcoef(pop.y, pop.x)[0, 1] - rho) < 0.005


def test_generator_noise_free_identity():
    pop = generate_population(GeneratorConfig(N=100, slope=1.0, intercept=0.0, noise_sd=0.0, seed=1))
    assert np.array_equal(pop.y, pop.x)


def test_generator_deterministic():
    a = generate_population(GeneratorConfig(N=500, seed=11))
    b = generate_population(GeneratorConfig(N=500, seed=11))
    c = generate_population(GeneratorConfig(N=500, seed=12))
    assert a.y.tobytes() == b.y.tobytes() and a.x.tobytes() == b.x.tobytes()
    assert not np.array_equal(a.x, c.x)


def test_generator_small_shape_branch():
    # shape < 1 uses the boosted Marsaglia-Tsang draw
    pop = generate_population(GeneratorConfig(N=100000, gamma_shape=0.5, gamma_scale=2.0, seed=5))
    assert (pop.x > 0).all()
    assert abs(pop.x.mean() - 1.0) < 0.02
    assert abs(pop.x.var() - 2.0) / 2.0 < 0.04


@pytest.mark.parametrize("kwargs", [
    dict(N=3), dict(gamma_shape=0.0), dict(gamma_scale=-1.0), dict(noise_sd=-0.1),
    dict(seed=-1), dict(slope=float("inf")),
])
def test_generator_rejects_bad_config(kwargs):
    with pytest.raises(DataError):
        generate_population(GeneratorConfig(**kwargs))


# ---------------------------------------------------------------- CSV

def test_csv_round_trip(tmp_path):
    pop = generate_population(GeneratorConfig(N=50, seed=2))
    path = tmp_path / "pop.csv"
    write_csv(pop, path, comments=["made for a test"])
    back = load_csv(path)
    assert np.array_equal(back.y, pop.y) and np.array_equal(back.x, pop.x)
    assert path.read_text().startswith("# made for a test\ny,x\n")
    assert format_csv(pop) == path.read_text().split("\n", 1)[1]


def test_csv_column_order_and_case(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("X, Y\n1,10\n2,20\n3,30\n4,40\n")
    pop = load_csv(path)
    assert pop.y.tolist() == [10, 20, 30, 40]
    assert pop.x.tolist() == [1, 2, 3, 4]


def test_csv_stiffness_shape(tmp_path):
    # 30 rows spanning the real-data range
    ys = np.linspace(1325, 2983, 30)
    xs = np.linspace(1170, 2794, 30)
    path = tmp_path / "s.csv"
    path.write_text("x,y\n" + "".join(f"{a},{b}\n" for a, b in zip(xs, ys)))
    pop = load_csv(path)
    assert pop.N == 30
    s = summarize(pop)
    assert s.x.min == 1170 and s.x.max == 2794
    assert s.y.min == 1325 and s.y.max == 2983


@pytest.mark.parametrize("content, message", [
    ("", "no data rows"),
    ("# only a comment\n", "no data rows"),
    ("y,x\n", "no data rows"),
    ("y,x\n1,2\n3,4\n5,6\n", "population too small"),
    ("y,z\n1,2\n", "'x'"),
    ("y,x\n1,2\n3,oops\n5,6\n7,8\n", "row 3"),
    ("y,x\n1,2\n3,4\n5\n7,8\n", "row 4"),
    ("y,x\n1,2\n3,inf\n5,6\n7,8\n", "row 3"),
])
def test_csv_errors(tmp_path, content, message):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(DataError, match=message):
        load_csv(path)


def test_csv_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        load_csv(tmp_path / "absent.csv")


# ---------------------------------------------------------------- summaries

def test_tukey_quartiles_known_values():
    assert tukey_quartiles([1, 2, 3, 4, 5, 6, 7, 8]) == (2.5, 4.5, 6.5)
    assert tukey_quartiles([1, 2, 3, 4, 5, 6, 7]) == (2.0, 4.0, 6.0)
    assert tukey_quartiles([5.0]) == (5.0, 5.0, 5.0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=60),
       st.lists(st.floats(-1e6, 1e6), min_size=4, max_size=60))
@settings(max_examples=200, deadline=None)
def test_summary_ordering(ys, xs):
    m = min(len(ys), len(xs))
    s = summarize(PairedPopulation(y=ys[:m], x=xs[:m]))
    for v in (s.y, s.x):
        assert v.min <= v.lower_quartile <= v.median <= v.upper_quartile <= v.max
        assert v.min <= v.mean * (1 + 1e-12) + 1e-9 and v.mean <= v.max * (1 + 1e-12) + 1e-9


# ---------------------------------------------------------------- sampling

def test_srswor_subset_uniformity():
    # N=6, n=3: each of the 20 subsets has probability 0.05
    counts = {}
    draws = 100000
    for k in range(draws):
        s = tuple(sorted(srswor_indices(6, 3, replication_key(1, 3, k))))
        counts[s] = counts.get(s, 0) + 1
    assert len(counts) == 20
    for c in counts.values():
        assert abs(c / draws - 0.05) < 0.005


def test_srswor_inclusion_probabilities():
    N, n, draws = 20, 7, 40000
    hits = np.zeros(N)
    for k in range(draws):
        hits[srswor_indices(N, n, replication_key(2, n, k))] += 1
    # binomial sd of each frequency is about 0.0024
    assert np.abs(hits / draws - n / N).max() < 0.012


def test_srswor_draw_invariants():
    pop = generate_population(GeneratorConfig(N=300, seed=4))
    d = srswor(pop, 40, replication_key(0, 40, 0))
    assert d.n == 40
    assert len(set(d.indices.tolist())) == 40
    assert (np.diff(d.indices) > 0).all()
    assert np.array_equal(d.y_s, pop.y[d.indices]) and np.array_equal(d.x_s, pop.x[d.indices])
    with pytest.raises(DataError):
        srswor(pop, 1, 0)
    with pytest.raises(DataError):
        srswor(pop, 301, 0)


def test_srswor_whole_population():
    pop = generate_population(GeneratorConfig(N=30, seed=4))
    d = srswor(pop, 30, 123)
    assert d.indices.tolist() == list(range(30))


def test_srswor_matches_kernel_replications():
    # the scalar sampler and both kernels draw the same units for replication k
    pop = generate_population(GeneratorConfig(N=400, seed=8))
    n, reps = 37, 60
    keys = replication_keys(5, n, reps)
    fast = _kernels.naive_modes_numpy(pop.y, pop.x, n, keys)
    for k in range(reps):
        d = srswor(pop, n, replication_key(5, n, k))
        assert naive_mode(d.y_s) == fast[k, 0]
        assert naive_mode(d.x_s) == fast[k, 1]


def test_enumerate_samples_counts(toy_pop):
    samples = list(enumerate_samples(toy_pop, 3))
    assert len(samples) == 56
    assert [tuple(s.indices) for s in samples] == list(itertools.combinations(range(8), 3))


def test_enumerate_samples_cap_raises_eagerly(generated_pop):
    with pytest.raises(DataError, match="cap"):
        enumerate_samples(generated_pop, 5, cap=1000)
