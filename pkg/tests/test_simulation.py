import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from auxmode import _kernels
from auxmode.dataset import GeneratorConfig, generate_population, srswor
from auxmode.density import DensityMethod
from auxmode.errors import DataError, ModelBreakdownError
from auxmode.estimators import ESTIMATORS, ScalarChoice, estimate_all
from auxmode.rng import replication_key, replication_keys
from auxmode.simulation import (
    SimConfig,
    coverage_study,
    default_grid,
    enumeration_oracle,
    exact_intervals,
    exact_mses,
    resolve_scalars,
    run_simulation,
    scalar_sweep,
    simulate_estimates,
)
from auxmode.theory import compute_population_theory, mode_moments, optimal_scalars

KDE = DensityMethod("kde")


@pytest.fixture(scope="module")
def small_pop():
    return generate_population(GeneratorConfig(N=600, seed=9))


@pytest.fixture(scope="module")
def small_theory(small_pop):
    return compute_population_theory(small_pop)


def test_enumeration_oracle_matches_simulation(toy_pop, toy_theory):
    s = resolve_scalars(toy_theory, "optimal")
    oracle = enumeration_oracle(toy_pop, 3, s)
    assert all(o.samples == 56 for o in oracle.values())
    cfg = SimConfig(reps=50000, sample_sizes=(3,), base_seed=3, scalars=s, density_method=KDE)
    rep = run_simulation(toy_pop, toy_theory, cfg)
    for name in ESTIMATORS:
        assert rep.get(name, 3).sim_mse == pytest.approx(oracle[name].mse, rel=0.02)


def test_enumeration_oracle_by_hand(toy_pop):
    # n = N - 1: eight leave-one-out samples
    s = ScalarChoice(L1=1.0, K1=2.0)
    got = enumeration_oracle(toy_pop, 7, s)["naive"]
    Y = 3 * np.median(toy_pop.y) - 2 * np.mean(toy_pop.y)
    errs = []
    for i in range(8):
        v = np.delete(toy_pop.y, i)
        errs.append(3 * np.median(v) - 2 * np.mean(v) - Y)
    assert got.mse == pytest.approx(np.mean(np.square(errs)), rel=1e-12)
    assert got.bias == pytest.approx(np.mean(errs), rel=1e-9, abs=1e-15)


def test_full_census_zero_error(small_pop, small_theory):
    cfg = SimConfig(reps=50, sample_sizes=(600,), base_seed=1)
    rep = run_simulation(small_pop, small_theory, cfg)
    for name in ESTIMATORS:
        row = rep.get(name, 600)
        assert row.sim_mse == 0.0
        assert row.exact_mse == 0.0
        assert row.coverage_percent == 100.0
        assert row.median == small_theory.mode_y
        assert row.mean_estimate == pytest.approx(small_theory.mode_y, rel=1e-14)


def test_run_is_deterministic(small_pop, small_theory):
    cfg = SimConfig(reps=500, sample_sizes=(20, 60), base_seed=5)
    assert run_simulation(small_pop, small_theory, cfg) == run_simulation(small_pop, small_theory, cfg)


def test_replications_independent_of_order_and_count(small_pop, small_theory):
    s = resolve_scalars(small_theory, "optimal")
    short = simulate_estimates(small_pop, small_theory, 40, 100, 8, s)
    long = simulate_estimates(small_pop, small_theory, 40, 300, 8, s)
    assert np.array_equal(short, long[:100], equal_nan=True)
    a = run_simulation(small_pop, small_theory, SimConfig(reps=200, sample_sizes=(30, 60), base_seed=2))
    b = run_simulation(small_pop, small_theory, SimConfig(reps=200, sample_sizes=(60,), base_seed=2))
    assert a.get("transformed_ratio", 60) == b.get("transformed_ratio", 60)


def test_replication_matches_scalar_path(small_pop, small_theory):
    s = resolve_scalars(small_theory, "optimal")
    est = simulate_estimates(small_pop, small_theory, 25, 20, 4, s)
    for k in range(20):
        d = srswor(small_pop, 25, replication_key(4, 25, k))
        e = estimate_all(d, small_theory.mode_x, s).as_dict()
        assert [e[name] for name in ESTIMATORS] == est[k].tolist()


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_backends_bit_identical(small_pop):
    for n in (2, 17, 300, 600):
        keys = replication_keys(11, n, 700)
        a = _kernels.naive_modes_numba(small_pop.y, small_pop.x, n, keys)
        b = _kernels.naive_modes_numpy(small_pop.y, small_pop.x, n, keys)
        assert a.tobytes() == b.tobytes()


def test_numpy_backend_selected_by_flag(small_pop):
    code = ("from auxmode import _kernels; import sys; "
            "sys.stdout.write(_kernels.backend_name())")
    env = dict(os.environ, AUXMODE_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout == "numpy"


def test_thread_counts_give_identical_results(small_pop):
    code = (
        "import sys, warnings; warnings.filterwarnings('ignore');"
        "from auxmode.dataset import GeneratorConfig, generate_population;"
        "from auxmode.rng import replication_keys; from auxmode import _kernels;"
        "p = generate_population(GeneratorConfig(N=600, seed=9));"
        "k = replication_keys(3, 50, 2000);"
        "sys.stdout.write(_kernels.naive_modes(p.y, p.x, 50, k, threads=int(sys.argv[1])).tobytes().hex())"
    )
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    outs = [subprocess.run([sys.executable, "-c", code, str(t)], env=env, capture_output=True,
                           text=True, check=True).stdout for t in (1, 4)]
    assert outs[0] == outs[1] and len(outs[0]) > 0


def test_report_fields(generated_pop, generated_theory):
    cfg = SimConfig(reps=2000, sample_sizes=(151,), base_seed=7)
    rep = run_simulation(generated_pop, generated_theory, cfg)
    assert rep.sample_sizes == [151]
    assert rep.get("naive", 151).re_percent == 100.0
    s = resolve_scalars(generated_theory, "optimal")
    assert (rep.L1, rep.K1) == (s.L1, s.K1)
    exact = exact_mses(generated_theory, 151, s)
    for name in ESTIMATORS:
        row = rep.get(name, 151)
        assert row.exact_mse == exact[name]
        assert row.exact_over_sim_ratio == pytest.approx(exact[name] / row.sim_mse)
        assert row.lower_quartile <= row.median <= row.upper_quartile
        assert row.sim_ci_lower < row.mean_estimate < row.sim_ci_upper
        assert row.valid_reps + row.excluded == 2000
    with pytest.raises(KeyError):
        rep.get("naive", 52)


def test_too_many_exclusions_fail_loudly(small_pop, small_theory):
    # put X~ + L1 right at the centre of the x~ distribution
    L1 = -small_theory.mode_x + 1e-3
    cfg = SimConfig(reps=500, sample_sizes=(20,), scalars=ScalarChoice(L1=L1, K1=0.0))
    with pytest.raises(ModelBreakdownError, match="degenerate"):
        run_simulation(small_pop, small_theory, cfg)


@pytest.mark.parametrize("kwargs", [
    dict(reps=0), dict(sample_sizes=()), dict(sample_sizes=(1,)), dict(sample_sizes=(601,)),
    dict(alpha=1.5), dict(scalars="best"), dict(base_seed=-1),
])
def test_config_validation(small_pop, small_theory, kwargs):
    with pytest.raises(DataError):
        run_simulation(small_pop, small_theory, SimConfig(**kwargs))


def test_density_method_mismatch(small_pop, small_theory):
    with pytest.raises(DataError):
        run_simulation(small_pop, small_theory, SimConfig(reps=10, sample_sizes=(20,), density_method=KDE))


def test_coverage_study_matches_simulation(small_pop, small_theory):
    cfg = SimConfig(reps=300, sample_sizes=(40,), base_seed=6)
    cov = coverage_study(small_pop, small_theory, cfg)
    rep = run_simulation(small_pop, small_theory, cfg)
    for c in cov:
        assert c.coverage_percent == rep.get(c.estimator, c.n).coverage_percent


def test_exact_intervals_use_replication_zero(small_pop, small_theory):
    s = resolve_scalars(small_theory, "optimal")
    rows = exact_intervals(small_pop, small_theory, 40, s, seed=6)
    est = simulate_estimates(small_pop, small_theory, 40, 1, 6, s)[0]
    for j, r in enumerate(rows):
        assert r.estimate == est[j]
        assert r.lower < r.estimate < r.upper
        assert (r.upper - r.lower) / 2 == pytest.approx(
            math.sqrt(r.exact_mse) * stats.t.ppf(0.975, 39), rel=1e-9)


def test_sweep_shape(generated_pop, generated_theory):
    th = generated_theory
    L1_opt = optimal_scalars(mode_moments(th, 151), th).L1
    grid = default_grid(L1_opt)
    sw = scalar_sweep(generated_pop, th, 151, grid, 2000, 7)
    assert sw.grid == sorted(sw.grid)
    assert 0.0 in sw.grid and L1_opt in sw.grid
    assert sum(r.is_opt for r in sw.rows) == 1
    exact = [r.exact_mse for r in sw.rows]
    i = exact.index(min(exact))
    assert sw.rows[i].is_opt
    zero = next(r for r in sw.rows if r.L1 == 0.0)
    assert zero.exact_mse == sw.exact_ratio
    # common random numbers: L1 = 0 repeats the ratio estimator's samples
    assert zero.sim_mse == pytest.approx(sw.sim_ratio, rel=1e-12)


def test_sweep_flags_vanishing_shift(generated_pop, generated_theory):
    X = generated_theory.mode_x
    sw = scalar_sweep(generated_pop, generated_theory, 151, [-X, -X + 0.01, 1.0], 500, 1)
    bad = next(r for r in sw.rows if r.L1 == -X)
    assert bad.flagged and math.isnan(bad.exact_mse) and math.isnan(bad.sim_mse)
    near = next(r for r in sw.rows if r.L1 == -X + 0.01)
    assert near.flagged and near.excluded > 0
    with pytest.raises(DataError):
        scalar_sweep(generated_pop, generated_theory, 151, [], 10, 1)
