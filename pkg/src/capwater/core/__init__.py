"""Special functions, numerics, and the error hierarchy."""

from .errors import (
    BracketError,
    CapacityError,
    ConvergenceError,
    DomainError,
    InfeasibleEnergyError,
    ModelError,
    RegimeError,
    SizeError,
    SolverError,
)
from .numerics import (
    DEFAULT_TOLERANCES,
    Bracket,
    QuadratureRule,
    SolverTolerances,
    bisect,
    bisect_vectorized,
    composite_gauss_legendre,
    integrate,
)
from .special import entropy, g, g_prime, g_second, kappa, mu_from_nu, nu_from_mu

__all__ = [
    "DEFAULT_TOLERANCES",
    "Bracket",
    "BracketError",
    "CapacityError",
    "ConvergenceError",
    "DomainError",
    "InfeasibleEnergyError",
    "ModelError",
    "QuadratureRule",
    "RegimeError",
    "SizeError",
    "SolverError",
    "SolverTolerances",
    "bisect",
    "bisect_vectorized",
    "composite_gauss_legendre",
    "entropy",
    "g",
    "g_prime",
    "g_second",
    "integrate",
    "kappa",
    "mu_from_nu",
    "nu_from_mu",
]
