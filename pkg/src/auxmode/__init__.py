"""Mode estimation under SRSWOR with auxiliary information.

Naive, ratio, product and transformed ratio/product estimators of a finite
population mode, their first-order theory, and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from .dataset import (  # noqa: E402
    GeneratorConfig,
    PairedPopulation,
    SampleDraw,
    SummaryStats,
    enumerate_samples,
    generate_population,
    load_csv,
    srswor,
    summarize,
    write_csv,
)
from .density import DensityMethod, GammaParams, density_at_median, fit_gamma, gamma_pdf  # noqa: E402
from .errors import AuxModeError, DataError, DegenerateDenominatorError, ModelBreakdownError  # noqa: E402
from .estimators import ESTIMATORS, EstimateSet, ScalarChoice, estimate_all, naive_mode  # noqa: E402
from .theory import (  # noqa: E402
    ModeMomentSet,
    PopulationTheory,
    compute_population_theory,
    confidence_interval,
    efficiency_conditions,
    mode_moments,
    optimal_scalars,
    t_quantile,
    theory_report,
)
from .simulation import (  # noqa: E402
    SimConfig,
    SimReport,
    SweepReport,
    coverage_study,
    enumeration_oracle,
    exact_intervals,
    run_simulation,
    scalar_sweep,
)

__all__ = [
    "__version__",
    "AuxModeError", "DataError", "DegenerateDenominatorError", "ModelBreakdownError",
    "GeneratorConfig", "PairedPopulation", "SampleDraw", "SummaryStats",
    "enumerate_samples", "generate_population", "load_csv", "srswor", "summarize", "write_csv",
    "DensityMethod", "GammaParams", "density_at_median", "fit_gamma", "gamma_pdf",
    "ESTIMATORS", "EstimateSet", "ScalarChoice", "estimate_all", "naive_mode",
    "ModeMomentSet", "PopulationTheory", "compute_population_theory", "confidence_interval",
    "efficiency_conditions", "mode_moments", "optimal_scalars", "t_quantile", "theory_report",
    "SimConfig", "SimReport", "SweepReport", "coverage_study", "enumeration_oracle",
    "exact_intervals", "run_simulation", "scalar_sweep",
]
