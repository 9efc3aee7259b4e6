import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from auxmode.dataset import PairedPopulation, SampleDraw
from auxmode.errors import DataError, DegenerateDenominatorError
from auxmode.estimators import (
    ESTIMATORS,
    SampleMoments,
    ScalarChoice,
    all_values,
    estimate_all,
    naive_mode,
    product_estimate,
    ratio_estimate,
    ratio_values,
    sample_median,
    transformed_product_estimate,
    transformed_ratio_estimate,
    transformed_ratio_values,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
positive = st.floats(0.1, 1e3)


def _draw(y, x):
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    return SampleDraw(indices=np.arange(len(y)), y_s=y, x_s=x)


def test_naive_mode_known_values():
    # median 3, mean 3.2
    assert naive_mode([1, 2, 3, 4, 6.0]) == pytest.approx(3 * 3 - 2 * 3.2)
    assert sample_median([4.0, 1.0, 3.0, 2.0]) == 2.5
    with pytest.raises(DataError):
        naive_mode([1.0])


def test_naive_mode_symmetric_sample_equals_mean():
    v = [1.0, 2.0, 3.0, 4.0, 5.0]
    assert naive_mode(v) == 3.0


def test_estimates_on_hand_example():
    d = _draw([2.0, 4.0, 9.0], [1.0, 3.0, 5.0])
    # y~ = 3*4 - 2*5 = 2, x~ = 3*3 - 2*3 = 3
    s = ScalarChoice(L1=1.0, K1=2.0)
    e = estimate_all(d, 6.0, s)
    assert e.naive == 2.0
    assert e.ratio == pytest.approx(2.0 * 6.0 / 3.0)
    assert e.product == pytest.approx(2.0 * 3.0 / 6.0)
    assert e.transformed_ratio == pytest.approx(2.0 * 7.0 / 4.0)
    assert e.transformed_product == pytest.approx(2.0 * 5.0 / 8.0)
    assert list(e.as_dict()) == list(ESTIMATORS)


@given(st.lists(st.tuples(finite, positive), min_size=2, max_size=30), positive)
@settings(max_examples=300, deadline=None)
def test_zero_scalars_reduce_bitwise(pairs, Xt):
    y, x = zip(*pairs)
    sm = SampleMoments.from_values(y, x)
    assume(sm.naive_mode_x > 0)
    assert transformed_ratio_estimate(sm, Xt, 0.0) == ratio_estimate(sm, Xt)
    assert transformed_product_estimate(sm, Xt, 0.0) == product_estimate(sm, Xt)


@given(st.lists(st.tuples(finite, positive), min_size=2, max_size=30), positive,
       st.floats(0.5, 100.0))
@settings(max_examples=300, deadline=None)
def test_scale_equivariance_in_y(pairs, Xt, c):
    # every estimator is linear in y~
    y, x = zip(*pairs)
    sm = SampleMoments.from_values(y, x)
    assume(sm.naive_mode_x > 0)
    sm2 = SampleMoments.from_values([c * v for v in y], x)
    assert ratio_estimate(sm2, Xt) == pytest.approx(c * ratio_estimate(sm, Xt), rel=1e-9, abs=1e-6)
    assert product_estimate(sm2, Xt) == pytest.approx(c * product_estimate(sm, Xt), rel=1e-9, abs=1e-6)


def test_ratio_exact_when_x_proportional_to_y():
    # x = y / 2 makes x~ = y~ / 2, so t_r recovers 2 X~ exactly
    y = np.array([3.0, 5.0, 6.0, 10.0, 11.0])
    sm = SampleMoments.from_values(y, y / 2)
    assert ratio_estimate(sm, 4.0) == pytest.approx(8.0)


def test_array_and_scalar_paths_agree(rng):
    yt = rng.normal(6, 1, 200)
    xt = rng.normal(6, 1, 200)
    s = ScalarChoice(L1=2.5, K1=-3.0)
    arr = all_values(yt, xt, 6.1, s)
    for k in range(200):
        sm = SampleMoments(0, 0, 0, 0, yt[k], xt[k], 2)
        assert arr[k, 1] == ratio_estimate(sm, 6.1)
        assert arr[k, 3] == transformed_ratio_estimate(sm, 6.1, 2.5)
        assert arr[k, 4] == transformed_product_estimate(sm, 6.1, -3.0)


def test_degenerate_denominators_marked():
    v = ratio_values([1.0, 1.0, 1.0], [0.0, -2.0, 2.0], 5.0)
    assert math.isnan(v[0]) and math.isnan(v[1]) and v[2] == 2.5
    v = transformed_ratio_values([1.0, 1.0], [-3.0, -1.0], 5.0, 2.0)
    assert math.isnan(v[0]) and v[1] == 7.0


def test_estimate_all_names_failing_estimator():
    d = _draw([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])  # x~ = 2
    with pytest.raises(DegenerateDenominatorError, match="transformed_ratio"):
        estimate_all(d, 5.0, ScalarChoice(L1=-2.0))
    with pytest.raises(DegenerateDenominatorError):
        estimate_all(d, 5.0, ScalarChoice(L1=-5.0))
    with pytest.raises(DegenerateDenominatorError):
        estimate_all(d, 0.0, ScalarChoice())


def test_sample_moments_validation():
    with pytest.raises(DataError):
        SampleMoments.from_values([1.0], [1.0])
    with pytest.raises(DataError):
        SampleMoments.from_values([1.0, 2.0], [1.0, 2.0, 3.0])


def test_draw_from_population_round_trip():
    pop = PairedPopulation(y=[1, 2, 3, 4, 5], x=[2, 2, 3, 5, 8])
    d = SampleDraw(indices=np.arange(5), y_s=pop.y, x_s=pop.x)
    e = estimate_all(d, float(naive_mode(pop.x)), ScalarChoice(L1=1.0, K1=1.0))
    # the full population reproduces the population mode exactly
    assert e.ratio == pytest.approx(e.naive)
    assert e.transformed_ratio == pytest.approx(e.naive)
    assert e.transformed_product == pytest.approx(e.naive)
