"""Independent checks: grid search oracles and optimality conditions."""

from .brute_force import (
    CrossTermReport,
    GridSpec,
    OraclePoint,
    brute_force_finite,
    brute_force_one_mode,
    cross_term_spot_check,
)
from .optimality import (
    ConcavityReport,
    HessianReport,
    StationarityResiduals,
    block_eigenvalues,
    concavity_probe,
    hessian_check,
    stationarity_residuals,
)

__all__ = [
    "ConcavityReport",
    "CrossTermReport",
    "GridSpec",
    "HessianReport",
    "OraclePoint",
    "StationarityResiduals",
    "block_eigenvalues",
    "brute_force_finite",
    "brute_force_one_mode",
    "concavity_probe",
    "cross_term_spot_check",
    "hessian_check",
    "stationarity_residuals",
]
