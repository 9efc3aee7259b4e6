import numpy as np
import pytest

from auxmode.dataset import GeneratorConfig, PairedPopulation, generate_population
from auxmode.density import DensityMethod
from auxmode.theory import compute_population_theory

# fixed 8-unit population used for exhaustive enumeration checks
TOY_Y = [4.6, 5.9, 5.8, 7.1, 6.8, 8.3, 7.9, 9.4]
TOY_X = [5.0, 5.4, 6.1, 6.5, 7.0, 7.6, 8.2, 9.0]


@pytest.fixture(scope="session")
def generated_pop():
    return generate_population(GeneratorConfig(N=5000, seed=42))


@pytest.fixture(scope="session")
def generated_theory(generated_pop):
    return compute_population_theory(generated_pop, DensityMethod())


@pytest.fixture(scope="session")
def toy_pop():
    return PairedPopulation(y=TOY_Y, x=TOY_X)


@pytest.fixture(scope="session")
def toy_theory(toy_pop):
    # the Gamma fit needs 10 values; the toy population uses the kernel route
    return compute_population_theory(toy_pop, DensityMethod("kde"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
