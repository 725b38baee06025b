"""Entropy function g, its derivatives, and the multiplier/level relation.

All quantities are in bits. The ``*_array`` variants are unchecked elementwise kernels for the
solvers: they return ``inf`` or ``nan`` at the edge of the domain instead of raising.
"""

from __future__ import annotations

import math

import numpy as np
import numpy.typing as npt

from .errors import DomainError

FloatArray = npt.NDArray[np.float64]

LN2 = math.log(2.0)


def g_array(x: npt.ArrayLike) -> FloatArray:
    """Elementwise g(x) = (x+1)log2(x+1) - x log2(x) with g(0) = 0."""
    values = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(values > 0.0, values * np.log1p(1.0 / np.where(values > 0.0, values, 1.0)), 0.0)
        result = (np.log1p(values) + tail) / LN2
    return np.where(values < 0.0, np.nan, result)


def g_prime_array(x: npt.ArrayLike) -> FloatArray:
    """Elementwise g'(x) = log2((x+1)/x); ``inf`` at zero."""
    values = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        result = np.log1p(1.0 / values) / LN2
    return np.where(values < 0.0, np.nan, result)


def kappa_array(x: npt.ArrayLike) -> FloatArray:
    """Elementwise kappa(x) = g'(x - 1/2) / (2x)."""
    values = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        return g_prime_array(values - 0.5) / (2.0 * values)


def g(x: float) -> float:
    """Entropy of a thermal mode with mean photon number ``x``."""
    if x < 0.0 or math.isnan(x):
        raise DomainError("g is defined for x >= 0", x=x)
    if x == 0.0:
        return 0.0
    return (math.log1p(x) + x * math.log1p(1.0 / x)) / LN2


def g_prime(x: float) -> float:
    if x <= 0.0 or math.isnan(x):
        raise DomainError("g' is defined for x > 0", x=x)
    return math.log1p(1.0 / x) / LN2


def g_second(x: float) -> float:
    if x <= 0.0 or math.isnan(x):
        raise DomainError("g'' is defined for x > 0", x=x)
    return -1.0 / (LN2 * x * (x + 1.0))


def kappa(x: float) -> float:
    """kappa(x) = g'(x - 1/2) / (2x), the weight of a symplectic eigenvalue in the stationarity equations."""
    if x <= 0.5 or math.isnan(x):
        raise DomainError("kappa is defined for x > 1/2", x=x)
    return g_prime(x - 0.5) / (2.0 * x)


def nu_from_mu(mu: float) -> float:
    """Water-filling level for a multiplier: the solution of g'(nu - 1/2) = 2 mu."""
    if mu <= 0.0 or math.isnan(mu):
        raise DomainError("the multiplier must be positive", mu=mu)
    return 0.5 / math.tanh(mu * LN2)


def nu_from_mu_array(mu: npt.ArrayLike) -> FloatArray:
    values = np.asarray(mu, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return 0.5 / np.tanh(values * LN2)


def mu_from_nu(nu_bar: float) -> float:
    """Inverse of :func:`nu_from_mu`."""
    if nu_bar <= 0.5:
        raise DomainError("the water-filling level must exceed 1/2", nu_bar=nu_bar)
    return 0.5 * g_prime(nu_bar - 0.5)


def entropy(symplectic_eigenvalues: npt.ArrayLike) -> float:
    """Von Neumann entropy (bits) of a Gaussian state from its symplectic eigenvalues."""
    values = np.atleast_1d(np.asarray(symplectic_eigenvalues, dtype=np.float64))
    if np.any(values < 0.5 - 1e-12):
        raise DomainError("symplectic eigenvalues of a physical state are >= 1/2", minimum=float(values.min()))
    return float(np.sum(g_array(np.clip(values - 0.5, 0.0, None))))
