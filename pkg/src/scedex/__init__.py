"""Tail trend analysis for station panels.

Estimates relative extreme-event frequencies (scedasis) across stations and
time from a pooled high threshold, tests their homogeneity, and fits a
common generalized Pareto shape with dependence-aware standard errors.
"""

from .errors import (
    DateOrderError,
    DomainError,
    EmptyPoolError,
    EmptySeasonError,
    FitConvergenceError,
    InsufficientDataError,
    NoExceedanceError,
    PanelFormatError,
    QuadratureError,
    RangeError,
    ScedexError,
    SimSpecError,
    SingularCovarianceError,
)
from .panel import (
    PanelSample,
    SeasonDefinition,
    decluster,
    load_panel,
    split_season,
)
from .tail import (
    PooledOrderStatistics,
    global_threshold,
    pool,
    tail_empirical_process,
    tail_quantile_process,
)
from .scedasis import ScedasisCurve, scedasis_all, scedasis_curve
from .dependence import (
    EmpiricalTailDependence,
    TailDependenceMatrix,
    sigma1_matrix,
    tail_copula_integral,
)
from .trend_tests import (
    BonferroniResult,
    SweepRow,
    TestResult,
    bonferroni,
    k_sweep,
    kolmogorov_pvalue,
    space_test,
    space_test_from_estimates,
    time_test,
)
from .gp_mle import (
    AsymptoticCov,
    GammaPathRow,
    GpFit,
    fisher_info,
    fisher_info_inverse,
    fit_gp_excesses,
    fit_gp_pml,
    gamma_path,
    gp_loglik,
    mle_asymptotic_cov,
    sigma_gamma0,
)
from .mc import (
    McReport,
    SimSpec,
    analytic_r_lookup,
    analytic_sigma,
    constant_scedasis,
    linear_scedasis,
    logistic_tail_copula,
    mc_covariance_check,
    mc_mle_variance,
    mc_test_size,
    simulate_panel,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticCov",
    "BonferroniResult",
    "DateOrderError",
    "DomainError",
    "EmptyPoolError",
    "EmptySeasonError",
    "EmpiricalTailDependence",
    "FitConvergenceError",
    "GammaPathRow",
    "GpFit",
    "InsufficientDataError",
    "McReport",
    "NoExceedanceError",
    "PanelFormatError",
    "PanelSample",
    "PooledOrderStatistics",
    "QuadratureError",
    "RangeError",
    "ScedasisCurve",
    "ScedexError",
    "SeasonDefinition",
    "SimSpec",
    "SingularCovarianceError",
    "SimSpecError",
    "SweepRow",
    "TailDependenceMatrix",
    "TestResult",
    "analytic_r_lookup",
    "analytic_sigma",
    "bonferroni",
    "constant_scedasis",
    "decluster",
    "fisher_info",
    "fisher_info_inverse",
    "fit_gp_excesses",
    "fit_gp_pml",
    "gamma_path",
    "global_threshold",
    "gp_loglik",
    "k_sweep",
    "kolmogorov_pvalue",
    "linear_scedasis",
    "load_panel",
    "logistic_tail_copula",
    "mc_covariance_check",
    "mc_mle_variance",
    "mc_test_size",
    "mle_asymptotic_cov",
    "pool",
    "scedasis_all",
    "scedasis_curve",
    "sigma1_matrix",
    "simulate_panel",
    "space_test",
    "space_test_from_estimates",
    "split_season",
    "tail_copula_integral",
    "tail_empirical_process",
    "tail_quantile_process",
    "time_test",
]
