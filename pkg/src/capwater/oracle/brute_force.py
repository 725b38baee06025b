"""Direct grid maximization of chi, independent of the analytic solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from loguru import logger

from capwater.core.errors import DomainError, InfeasibleEnergyError, SizeError
from capwater.core.special import g_array
from capwater.solvers.multi_mode import ModeEnsemble
from capwater.solvers.one_mode import OneModeNoise, holevo_chi

FloatArray = npt.NDArray[np.float64]

MIN_POINTS = 16


@dataclass(frozen=True, slots=True)
class GridSpec:
    gin_q_points: int = 48
    split_points: int = 48
    refine_rounds: int = 4

    def __post_init__(self) -> None:
        if self.gin_q_points < MIN_POINTS or self.split_points < MIN_POINTS:
            raise DomainError("grid resolutions must be at least 16", gin_q=self.gin_q_points, split=self.split_points)
        if self.refine_rounds < 0:
            raise DomainError("refine_rounds must be nonnegative", refine_rounds=self.refine_rounds)


@dataclass(frozen=True, slots=True)
class OraclePoint:
    """Best grid point in the caller's orientation."""

    gin_q: float
    gin_p: float
    gmod_q: float
    gmod_p: float
    chi: float
    gin_q_step: float

    @property
    def split(self) -> float:
        total = self.gmod_q + self.gmod_p
        return self.gmod_q / total if total > 0.0 else 0.0


def _feasible_squeeze(lambda_: float) -> tuple[float, float]:
    """Range of gin_q for which a pure input fits into the energy lambda_."""
    upper = 0.5 * (lambda_ + math.sqrt(max(lambda_ * lambda_ - 1.0, 0.0)))
    return 0.25 / upper, upper


def _chi_grid(noise: OneModeNoise, lambda_: float, u: FloatArray, s: FloatArray) -> FloatArray:
    uu, ss = np.meshgrid(u, s, indexing="ij")
    budget = np.maximum(lambda_ - uu - 0.25 / uu, 0.0)
    return holevo_chi(noise.gq, noise.gp, uu, 0.25 / uu, ss * budget, (1.0 - ss) * budget)


def brute_force_one_mode(
    noise: OneModeNoise,
    lambda_: float,
    grid: GridSpec = GridSpec(),
) -> tuple[float, OraclePoint]:
    """Maximize chi over (gin_q, modulation split) with cross terms fixed to zero.

    gin_q is searched log-uniformly; each refinement round shrinks both ranges to two grid steps
    around the current best point. Ties go to the smallest gin_q, then the smallest split.
    """
    if math.isnan(lambda_) or lambda_ < 1.0:
        raise DomainError("input energy must be at least 1", lambda_=lambda_)
    if lambda_ == 1.0:
        return 0.0, OraclePoint(0.5, 0.5, 0.0, 0.0, 0.0, 0.0)

    u_min, u_max = _feasible_squeeze(lambda_)
    if noise.gp > 0.0:
        ratio = math.sqrt(noise.gq / noise.gp)
        u_lo, u_hi = max(u_min, 0.125 / ratio), min(u_max, 2.0 * ratio)
    else:
        u_lo, u_hi = max(u_min, 0.125), u_max
    log_lo, log_hi = math.log(u_lo), math.log(u_hi)
    s_lo, s_hi = 0.0, 1.0

    best_chi = -math.inf
    best_u, best_s, step_u = 0.5, 0.0, 0.0
    for round_index in range(grid.refine_rounds + 1):
        u = np.exp(np.linspace(log_lo, log_hi, grid.gin_q_points))
        s = np.linspace(s_lo, s_hi, grid.split_points)
        chi = _chi_grid(noise, lambda_, u, s)
        flat = int(np.argmax(chi))
        i, j = np.unravel_index(flat, chi.shape)
        if chi[i, j] >= best_chi:
            best_chi, best_u, best_s = float(chi[i, j]), float(u[i]), float(s[j])
        d_log = (log_hi - log_lo) / (grid.gin_q_points - 1)
        d_s = (s_hi - s_lo) / (grid.split_points - 1)
        step_u = best_u * (math.exp(d_log) - 1.0)
        log_lo = max(math.log(u_min), math.log(best_u) - 2.0 * d_log)
        log_hi = min(math.log(u_max), math.log(best_u) + 2.0 * d_log)
        s_lo, s_hi = max(0.0, best_s - 2.0 * d_s), min(1.0, best_s + 2.0 * d_s)
        logger.trace("oracle round {}: chi={:.12g} gin_q={:.9g} split={:.6g}", round_index, best_chi, best_u, best_s)

    budget = max(lambda_ - best_u - 0.25 / best_u, 0.0)
    gin_q, gin_p = best_u, 0.25 / best_u
    gmod_q, gmod_p = best_s * budget, (1.0 - best_s) * budget
    if noise.swapped:
        gin_q, gin_p = gin_p, gin_q
        gmod_q, gmod_p = gmod_p, gmod_q
        step_u = step_u / (4.0 * best_u * best_u)
    return best_chi, OraclePoint(gin_q, gin_p, gmod_q, gmod_p, best_chi, step_u)


def brute_force_finite(
    ensemble: ModeEnsemble,
    lambda_: float,
    grid: GridSpec = GridSpec(),
) -> float:
    """Best total chi of at most two modes over a refined grid of energy splits."""
    n = len(ensemble)
    if n > 2:
        raise SizeError("the exhaustive search is limited to two modes", n=n)
    if lambda_ < n * (1.0 - 1e-12):
        raise InfeasibleEnergyError("energy is below the vacuum floor", lambda_=lambda_, n=n)
    if n == 1:
        return brute_force_one_mode(ensemble.modes[0], max(lambda_, 1.0), grid)[0]

    first, second = ensemble.modes
    lo, hi = 1.0, max(lambda_ - 1.0, 1.0)
    if hi == lo:
        return brute_force_one_mode(first, 1.0, grid)[0] + brute_force_one_mode(second, 1.0, grid)[0]

    best_total, best_split = -math.inf, lo
    for _ in range(grid.refine_rounds + 1):
        splits = np.linspace(lo, hi, grid.split_points)
        totals = [
            brute_force_one_mode(first, float(lam), grid)[0]
            + brute_force_one_mode(second, max(lambda_ - float(lam), 1.0), grid)[0]
            for lam in splits
        ]
        index = int(np.argmax(totals))
        if totals[index] >= best_total:
            best_total, best_split = totals[index], float(splits[index])
        step = (hi - lo) / (grid.split_points - 1)
        lo, hi = max(1.0, best_split - 2.0 * step), min(lambda_ - 1.0, best_split + 2.0 * step)
        if hi <= lo:
            break
    return best_total


@dataclass(frozen=True, slots=True)
class CrossTermReport:
    with_cross_terms: float
    without_cross_terms: float

    @property
    def gain(self) -> float:
        return self.with_cross_terms - self.without_cross_terms


def cross_term_spot_check(noise: OneModeNoise, lambda_: float, points: int = 12) -> CrossTermReport:
    """Coarse four-parameter search that lets the input and modulation carry q-p correlations.

    The input is a pure squeezed state with squeezing a and rotation theta; the modulation has a
    split s and a correlation coefficient c. Restricting to theta in {0, pi/2} and c = 0 gives the
    diagonal search for comparison.
    """
    if points < 4 or points % 2:
        raise DomainError("points must be an even number of at least 4", points=points)
    if lambda_ <= 1.0:
        return CrossTermReport(0.0, 0.0)
    u_min, u_max = _feasible_squeeze(lambda_)
    a = np.exp(np.linspace(math.log(max(u_min, 0.5)), math.log(u_max), points))
    theta = np.linspace(0.0, math.pi, points, endpoint=False)
    s = np.linspace(0.0, 1.0, points)
    c = np.linspace(-1.0, 1.0, points + 1)
    aa, tt, ss, cc = np.meshgrid(a, theta, s, c, indexing="ij")

    major, minor = aa, 0.25 / aa
    cos_t, sin_t = np.cos(tt), np.sin(tt)
    in_q = major * cos_t**2 + minor * sin_t**2
    in_p = major * sin_t**2 + minor * cos_t**2
    in_qp = (major - minor) * cos_t * sin_t
    budget = np.maximum(lambda_ - major - minor, 0.0)
    mod_q, mod_p = ss * budget, (1.0 - ss) * budget
    mod_qp = cc * np.sqrt(mod_q * mod_p)

    out_q, out_p = in_q + noise.gq, in_p + noise.gp
    nu_out = np.sqrt(np.maximum(out_q * out_p - in_qp**2, 0.25))
    nu_bar = np.sqrt(np.maximum((out_q + mod_q) * (out_p + mod_p) - (in_qp + mod_qp) ** 2, 0.25))
    chi = g_array(nu_bar - 0.5) - g_array(nu_out - 0.5)

    aligned = np.isin(np.arange(points), [0, points // 2])
    uncorrelated = np.arange(points + 1) == points // 2
    diagonal = aligned[None, :, None, None] & uncorrelated[None, None, None, :]
    without = float(np.max(np.where(diagonal, chi, -np.inf)))
    return CrossTermReport(with_cross_terms=float(np.max(chi)), without_cross_terms=without)
