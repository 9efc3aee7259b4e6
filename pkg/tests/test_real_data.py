"""Reference figures for the real stiffness data set.

The 30-board stiffness data are copyrighted and not bundled; point
``AUXMODE_STIFFNESS_CSV`` at a ``y,x`` CSV of them to run these tests.
"""

import os

import pytest

from auxmode.dataset import load_csv
from auxmode.theory import (
    compute_population_theory,
    mode_moments,
    mse_naive_ratio,
    optimal_scalars,
    relative_efficiency,
    transformed_ratio_theory,
)

PATH = os.environ.get("AUXMODE_STIFFNESS_CSV")
pytestmark = pytest.mark.skipif(not PATH, reason="AUXMODE_STIFFNESS_CSV not set")


@pytest.fixture(scope="module")
def theory():
    return compute_population_theory(load_csv(PATH))


def test_population_figures(theory):
    assert theory.N == 30
    assert theory.p11 == pytest.approx(0.4333, abs=5e-5)
    assert mode_moments(theory, 5).rho == pytest.approx(0.5466, abs=5e-4)


def test_reference_efficiencies(theory):
    mm = mode_moments(theory, 5)
    L1 = optimal_scalars(mm, theory).L1
    assert L1 == pytest.approx(1064.2364, rel=5e-3)
    assert relative_efficiency(mm.var_mode_y, mse_naive_ratio(mm, theory)) == pytest.approx(123.6952, rel=2e-3)
    mse_tr = transformed_ratio_theory(mm, theory, L1).mse
    assert relative_efficiency(mm.var_mode_y, mse_tr) == pytest.approx(142.5991, rel=2e-3)


def test_reference_ratio_mse(theory):
    # the L1 = 0 row of the scalar sweep at n = 12
    assert mse_naive_ratio(mode_moments(theory, 12), theory) == pytest.approx(26109.82, rel=2e-3)
