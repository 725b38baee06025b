"""Executable optimality checks on one-mode solutions.

The Lagrangian is chi - mu (energy) - tau (purity) over the input and modulation variances
and their q-p cross terms.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from capwater.core.errors import RegimeError
from capwater.core.special import g_prime, g_second, kappa
from capwater.solvers.one_mode import (
    InputEnergy,
    OneModeNoise,
    OneModeSolution,
    Regime,
    lambda_threshold,
    solve_one_mode,
)

THRESHOLD_STEP = 1e-10


@dataclass(frozen=True, slots=True)
class StationarityResiduals:
    """Left-hand sides of the six stationarity equations and the purity multiplier used."""

    d_gin_q: float
    d_gin_p: float
    d_gmod_q: float
    d_gmod_p: float
    d_gin_qp: float
    d_gmod_qp: float
    tau: float

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.d_gin_q, self.d_gin_p, self.d_gmod_q, self.d_gmod_p, self.d_gin_qp, self.d_gmod_qp)

    @property
    def max_abs(self) -> float:
        return max(abs(value) for value in self.as_tuple())


def stationarity_residuals(
    noise: OneModeNoise,
    solution: OneModeSolution,
    gin_qp: float = 0.0,
    gmod_qp: float = 0.0,
) -> StationarityResiduals:
    """Stationarity residuals at a water-filling solution, optionally displaced along the cross terms.

    The optimum has vanishing cross terms; nonzero ``gin_qp`` or ``gmod_qp`` evaluate the same six
    equations off that point. tau is taken from the first equation, which is therefore satisfied
    identically.
    """
    if solution.regime is not Regime.WATER_FILLING:
        raise RegimeError(
            "stationarity residuals are defined for water-filling solutions", regime=solution.regime.value
        )
    env_q, env_p = noise.oriented()
    gout_q = solution.gin_q + env_q
    gout_p = solution.gin_p + env_p
    gbar_q = gout_q + solution.gmod_q
    gbar_p = gout_p + solution.gmod_p
    # the noise has no q-p correlation within a mode
    c_out = gin_qp
    c_bar = gin_qp + gmod_qp
    k_bar = kappa(math.sqrt(gbar_q * gbar_p - c_bar * c_bar))
    k_out = kappa(math.sqrt(gout_q * gout_p - c_out * c_out))
    mu = solution.mu
    tau = (k_bar * gbar_p - k_out * gout_p - mu) / solution.gin_p
    return StationarityResiduals(
        d_gin_q=k_bar * gbar_p - k_out * gout_p - mu - tau * solution.gin_p,
        d_gin_p=k_bar * gbar_q - k_out * gout_q - mu - tau * solution.gin_q,
        d_gmod_q=k_bar * gbar_p - mu,
        d_gmod_p=k_bar * gbar_q - mu,
        d_gin_qp=-2.0 * k_bar * c_bar + 2.0 * k_out * c_out + 2.0 * tau * gin_qp,
        d_gmod_qp=-2.0 * k_bar * c_bar,
        tau=tau,
    )


def block_eigenvalues(a: float, b: float) -> tuple[float, float]:
    """Eigenvalues -A - B/2 -+ sqrt(A^2 + B^2/4) of -[[A + B, A], [A, A]], ascending."""
    root = math.sqrt(a * a + 0.25 * b * b)
    return (-a - 0.5 * b - root, -a - 0.5 * b + root)


@dataclass(frozen=True, slots=True)
class HessianReport:
    """Second-order information at a solution.

    ``variance`` holds the eigenvalues of the Hessian of chi with the constraints eliminated and
    ``covariance`` those of half the Lagrangian Hessian in the cross terms.
    """

    regime: Regime
    variance: tuple[float, ...]
    covariance: tuple[float, ...]
    a_var: float
    b_var: float
    a_cov: float
    b_cov: float

    @property
    def negative_definite(self) -> bool:
        return all(value < 0.0 for value in self.variance + self.covariance)


def _second_derivative(nu: float, slope: float, curvature: float) -> float:
    """d^2/dt^2 of g(sqrt(P(t)) - 1/2) given nu = sqrt(P), P' and P''."""
    x = nu - 0.5
    return g_second(x) * (slope / (2.0 * nu)) ** 2 + g_prime(x) * (
        curvature / (2.0 * nu) - slope * slope / (4.0 * nu**3)
    )


def hessian_check(noise: OneModeNoise, solution: OneModeSolution) -> HessianReport:
    env_q, env_p = noise.oriented()
    if solution.regime is Regime.VACUUM:
        raise RegimeError("the vacuum solution sits on the boundary; no interior Hessian")

    # canonical orientation: q is the noisier quadrature
    if noise.swapped:
        gin_q, gin_p, gmod_p = solution.gin_p, solution.gin_q, solution.gmod_q
        gq, gp = env_p, env_q
    else:
        gin_q, gin_p, gmod_p = solution.gin_q, solution.gin_p, solution.gmod_p
        gq, gp = env_q, env_p
    gmod_q = solution.energy - gin_q - gin_p - gmod_p
    gout_q, gout_p = gin_q + gq, gin_p + gp
    nu_bar = math.sqrt((gout_q + gmod_q) * (gout_p + gmod_p))
    nu_out = math.sqrt(gout_q * gout_p)

    if solution.regime is Regime.WATER_FILLING:
        a_var = g_prime(nu_bar - 0.5) / nu_bar
        b_var = g_prime(nu_out - 0.5) * gq / (4.0 * nu_out * gin_q**3)
        # tau = -kappa(nu_out) gout_q / gin_q at the optimum, which leaves B = 2 kappa(nu_out) sqrt(gq gp)
        a_cov = kappa(nu_bar)
        b_cov = kappa(nu_out) * 2.0 * math.sqrt(gq * gp)
        return HessianReport(
            regime=solution.regime,
            variance=block_eigenvalues(a_var, b_var),
            covariance=block_eigenvalues(a_cov, b_cov),
            a_var=a_var,
            b_var=b_var,
            a_cov=a_cov,
            b_cov=b_cov,
        )

    # single quadrature: chi is a function of gin_q alone; only gin_qp survives among the cross terms
    gbar_q = gout_q
    gbar_p = gout_p + gmod_p
    overall = _second_derivative(nu_bar, gbar_p - gbar_q, -2.0)
    unmodulated = _second_derivative(nu_out, gp - gq / (4.0 * gin_q**2), gq / (2.0 * gin_q**3))
    chi_curvature = overall - unmodulated
    a_cov = kappa(nu_bar)
    b_cov = kappa(nu_out) * (gout_q / gin_q - 1.0)
    return HessianReport(
        regime=solution.regime,
        variance=(chi_curvature,),
        covariance=(-a_cov - b_cov,),
        a_var=-overall,
        b_var=-unmodulated,
        a_cov=a_cov,
        b_cov=b_cov,
    )


@dataclass(frozen=True, slots=True)
class ConcavityReport:
    lambdas: tuple[float, ...]
    mu_strictly_decreasing: bool
    max_second_difference: float
    threshold_jump: float

    @property
    def passed(self) -> bool:
        return self.mu_strictly_decreasing and self.max_second_difference <= 1e-8 and self.threshold_jump <= 1e-8


def concavity_probe(noise: OneModeNoise, lambda_grid: Sequence[float]) -> ConcavityReport:
    """Monotone multiplier and concave chi along a grid of input energies."""
    lambdas = np.sort(np.asarray(lambda_grid, dtype=np.float64))
    solutions = [solve_one_mode(noise, InputEnergy(float(lam))) for lam in lambdas]
    mu = np.array([solution.mu for solution in solutions])
    chi = np.array([solution.chi for solution in solutions])

    steps = np.diff(lambdas)
    slopes = np.diff(chi) / steps
    spacing = float(np.mean(steps)) if steps.size else 0.0
    second = np.diff(slopes) * spacing if slopes.size > 1 else np.zeros(1)

    jump = 0.0
    if not noise.symmetric and noise.gp > 0.0:
        threshold = lambda_threshold(noise)
        if lambdas[0] < threshold <= lambdas[-1]:
            below = solve_one_mode(noise, InputEnergy(threshold * (1.0 - THRESHOLD_STEP)))
            at = solve_one_mode(noise, InputEnergy(threshold))
            jump = max(abs(below.chi - at.chi), abs(below.mu - at.mu))

    return ConcavityReport(
        lambdas=tuple(lambdas.tolist()),
        mu_strictly_decreasing=bool(np.all(np.diff(mu) < 0.0)),
        max_second_difference=float(np.max(second)),
        threshold_jump=jump,
    )
