"""Single-mode phase-dependent additive noise channel.

The optimum sits in one of three regimes: water-filling (both quadratures modulated), single
quadrature (only the quieter quadrature modulated) and vacuum (no modulation). All internal
work happens in the canonical orientation gq >= gp; solutions are mapped back to the caller's
orientation before they are returned.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt
from loguru import logger

from capwater.core.errors import DomainError, RegimeError, SolverError
from capwater.core.numerics import DEFAULT_TOLERANCES, Bracket, SolverTolerances, bisect, bisect_vectorized
from capwater.core.special import (
    g,
    g_array,
    g_prime,
    g_prime_array,
    kappa_array,
    nu_from_mu,
    nu_from_mu_array,
)

FloatArray = npt.NDArray[np.float64]

BRACKET_EPS = 1e-12
SCAN_POINTS = 64
PURITY = 0.25


class Regime(str, Enum):
    """Optimal energy distribution inside one mode."""

    WATER_FILLING = "water_filling"
    SINGLE_QUADRATURE = "single_quadrature"
    VACUUM = "vacuum"

    @property
    def set_label(self) -> str:
        return {Regime.VACUUM: "N1", Regime.SINGLE_QUADRATURE: "N2", Regime.WATER_FILLING: "N3"}[self]


@dataclass(frozen=True, slots=True)
class OneModeNoise:
    """Noise variances of one mode, stored with the noisier quadrature as ``gq``.

    ``swapped`` records whether the caller passed the quieter quadrature first.
    """

    gq: float
    gp: float
    swapped: bool = field(default=False, init=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gq) and math.isfinite(self.gp)):
            raise DomainError("noise variances must be finite", gq=self.gq, gp=self.gp)
        if self.gq < 0.0 or self.gp < 0.0:
            raise DomainError("noise variances must be nonnegative", gq=self.gq, gp=self.gp)
        if self.gq < self.gp:
            gq, gp = self.gp, self.gq
            object.__setattr__(self, "gq", float(gq))
            object.__setattr__(self, "gp", float(gp))
            object.__setattr__(self, "swapped", True)

    @property
    def symmetric(self) -> bool:
        return self.gq == self.gp

    def oriented(self) -> tuple[float, float]:
        """Variances in the orientation the caller supplied."""
        return (self.gp, self.gq) if self.swapped else (self.gq, self.gp)


@dataclass(frozen=True, slots=True)
class InputEnergy:
    """Per-mode input energy lambda = 2 nbar + 1."""

    lambda_: float

    def __post_init__(self) -> None:
        if math.isnan(self.lambda_) or self.lambda_ < 1.0 - 1e-12:
            raise DomainError("input energy must be at least the vacuum energy 1", lambda_=self.lambda_)
        if self.lambda_ < 1.0:
            object.__setattr__(self, "lambda_", 1.0)

    @classmethod
    def from_nbar(cls, nbar: float) -> InputEnergy:
        return cls(2.0 * nbar + 1.0)

    @property
    def nbar(self) -> float:
        return 0.5 * (self.lambda_ - 1.0)


@dataclass(frozen=True, slots=True)
class OneModeSolution:
    """Optimal input and modulation variances of one mode (caller's orientation)."""

    regime: Regime
    gin_q: float
    gin_p: float
    gmod_q: float
    gmod_p: float
    mu: float
    nu_bar: float
    nu_out: float
    chi: float
    swap_applied: bool
    env_q: float
    env_p: float

    @property
    def energy(self) -> float:
        return self.gin_q + self.gin_p + self.gmod_q + self.gmod_p

    @property
    def gbar_q(self) -> float:
        return self.gin_q + self.gmod_q + self.env_q

    @property
    def gbar_p(self) -> float:
        return self.gin_p + self.gmod_p + self.env_p

    @property
    def gout_q(self) -> float:
        return self.gin_q + self.env_q

    @property
    def gout_p(self) -> float:
        return self.gin_p + self.env_p

    def as_record(self) -> dict[str, float | str | bool]:
        return {
            "regime": self.regime.value,
            "gq": self.env_q,
            "gp": self.env_p,
            "lambda": self.energy,
            "gin_q": self.gin_q,
            "gin_p": self.gin_p,
            "gmod_q": self.gmod_q,
            "gmod_p": self.gmod_p,
            "mu": self.mu,
            "nu_bar": self.nu_bar,
            "nu_out": self.nu_out,
            "chi": self.chi,
        }


def holevo_chi(
    env_q: npt.ArrayLike,
    env_p: npt.ArrayLike,
    gin_q: npt.ArrayLike,
    gin_p: npt.ArrayLike,
    gmod_q: npt.ArrayLike,
    gmod_p: npt.ArrayLike,
) -> FloatArray:
    """Reduced Holevo quantity g(nu_bar - 1/2) - g(nu_out - 1/2) for diagonal covariances."""
    gout_q = np.asarray(gin_q, dtype=np.float64) + np.asarray(env_q, dtype=np.float64)
    gout_p = np.asarray(gin_p, dtype=np.float64) + np.asarray(env_p, dtype=np.float64)
    nu_bar = np.sqrt((gout_q + np.asarray(gmod_q, dtype=np.float64)) * (gout_p + np.asarray(gmod_p, dtype=np.float64)))
    nu_out = np.sqrt(gout_q * gout_p)
    return g_array(np.clip(nu_bar - 0.5, 0.0, None)) - g_array(np.clip(nu_out - 0.5, 0.0, None))


def lambda_threshold(noise: OneModeNoise) -> float:
    """Smallest input energy for which both quadratures are modulated."""
    if noise.symmetric:
        return 1.0
    if noise.gp == 0.0:
        raise DomainError("the threshold diverges for a noiseless quiet quadrature", gq=noise.gq, gp=noise.gp)
    return math.sqrt(noise.gq / noise.gp) + noise.gq - noise.gp


def mu_threshold(noise: OneModeNoise) -> float:
    """Multiplier at the water-filling threshold; ``inf`` for noiseless symmetric modes."""
    level = 0.5 * (lambda_threshold(noise) + noise.gq + noise.gp)
    return float(0.5 * g_prime_array(level - 0.5))


def mu_zero(noise: OneModeNoise) -> float:
    """Multiplier at vacuum energy: larger multipliers leave the mode unmodulated."""
    nu_vac = math.sqrt((noise.gq + 0.5) * (noise.gp + 0.5))
    return float(0.5 * g_prime_array(nu_vac - 0.5) * math.sqrt((noise.gq + 0.5) / (noise.gp + 0.5)))


def _squeeze_limit(noise: OneModeNoise) -> float:
    """Input antisqueezing of the water-filling solution, an upper bound below threshold."""
    return 0.5 * math.sqrt(noise.gq / noise.gp) if noise.gp > 0.0 else math.inf


def _vacuum(noise: OneModeNoise) -> OneModeSolution:
    nu_vac = math.sqrt((noise.gq + 0.5) * (noise.gp + 0.5))
    return _finish(noise, Regime.VACUUM, 0.5, 0.5, 0.0, 0.0, mu_zero(noise), nu_vac, nu_vac, 0.0)


def _finish(
    noise: OneModeNoise,
    regime: Regime,
    gin_q: float,
    gin_p: float,
    gmod_q: float,
    gmod_p: float,
    mu: float,
    nu_bar: float,
    nu_out: float,
    chi: float,
) -> OneModeSolution:
    if noise.swapped:
        gin_q, gin_p = gin_p, gin_q
        gmod_q, gmod_p = gmod_p, gmod_q
    env_q, env_p = noise.oriented()
    return OneModeSolution(
        regime=regime,
        gin_q=gin_q,
        gin_p=gin_p,
        gmod_q=gmod_q,
        gmod_p=gmod_p,
        mu=mu,
        nu_bar=nu_bar,
        nu_out=nu_out,
        chi=chi,
        swap_applied=noise.swapped,
        env_q=env_q,
        env_p=env_p,
    )


def _water_filling(noise: OneModeNoise, lambda_: float) -> OneModeSolution:
    gin_q = 0.5 if noise.symmetric else _squeeze_limit(noise)
    gin_p = PURITY / gin_q
    nu_bar = 0.5 * (lambda_ + noise.gq + noise.gp)
    gmod_q = max(nu_bar - gin_q - noise.gq, 0.0)
    gmod_p = max(nu_bar - gin_p - noise.gp, 0.0)
    nu_out = 0.5 + math.sqrt(noise.gq * noise.gp)
    chi = g(nu_bar - 0.5) - g(nu_out - 0.5)
    mu = 0.5 * g_prime(nu_bar - 0.5) if nu_bar > 0.5 else math.inf
    return _finish(noise, Regime.WATER_FILLING, gin_q, gin_p, gmod_q, gmod_p, mu, nu_bar, nu_out, chi)


def solve_above_threshold(noise: OneModeNoise, energy: InputEnergy) -> OneModeSolution:
    """Quantum water-filling solution: equal overall output variance in both quadratures."""
    threshold = lambda_threshold(noise)
    if energy.lambda_ < threshold * (1.0 - 1e-14):
        raise RegimeError(
            "input energy is below the water-filling threshold", lambda_=energy.lambda_, threshold=threshold
        )
    return _water_filling(noise, energy.lambda_)


def _below_threshold_state(noise: OneModeNoise, lambda_: float, gin_q: FloatArray | float) -> tuple[FloatArray, ...]:
    u = np.asarray(gin_q, dtype=np.float64)
    gin_p = PURITY / u
    gbar_q = u + noise.gq
    gbar_p = lambda_ - u + noise.gp
    with np.errstate(invalid="ignore"):
        nu_bar = np.sqrt(gbar_q * gbar_p)
    nu_out = np.sqrt(gbar_q * (gin_p + noise.gp))
    return gin_p, gbar_q, gbar_p, nu_bar, nu_out


def _residual_kernel(noise: OneModeNoise, lambda_: float, gin_q: FloatArray | float) -> FloatArray:
    gin_p, gbar_q, gbar_p, nu_bar, nu_out = _below_threshold_state(noise, lambda_, gin_q)
    u = np.asarray(gin_q, dtype=np.float64)
    gout_p = gin_p + noise.gp
    return kappa_array(nu_bar) * (gbar_p - gbar_q) - kappa_array(nu_out) * (gout_p - gin_p / u * gbar_q)


def _max_unmodulated_squeeze(lambda_: float) -> float:
    """Largest gin_q with gin_q + 1/(4 gin_q) <= lambda (no energy left for modulation)."""
    return 0.5 * (lambda_ + math.sqrt(max(lambda_ * lambda_ - 1.0, 0.0)))


def residual_F(noise: OneModeNoise, lambda_: float, gin_q: float) -> float:
    """Derivative of chi along the single-quadrature constraint surface; zero at the optimum.

    The first term is the overall output weight times the quadrature imbalance, the second the
    same quantity for the nonmodulated output.
    """
    upper = _squeeze_limit(noise)
    if gin_q < 0.5 * (1.0 - 1e-12) or gin_q > upper * (1.0 + 1e-12):
        raise DomainError("gin_q lies outside [1/2, 1/2 sqrt(gq/gp)]", gin_q=gin_q, upper=upper)
    return float(_residual_kernel(noise, lambda_, gin_q))


def _find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: SolverTolerances,
    label: str,
) -> float:
    """Bisect ``f`` on [lo, hi]; a 64-point scan refines the bracket when the endpoints agree in sign."""
    f_lo, f_hi = f(lo), f(hi)
    if math.isnan(f_lo) or math.isnan(f_hi) or f_lo * f_hi > 0.0:
        grid = np.linspace(lo, hi, SCAN_POINTS)
        values = np.array([f(float(x)) for x in grid])
        signs = np.sign(np.where(np.isnan(values), 1.0, values))
        changes = np.flatnonzero(signs[:-1] * signs[1:] <= 0.0)
        if changes.size == 0:
            raise SolverError(
                f"{label}: no sign change in bracket",
                lo=lo,
                hi=hi,
                f_lo=f_lo,
                f_hi=f_hi,
                scan_min=float(np.nanmin(values)),
                scan_max=float(np.nanmax(values)),
            )
        if changes.size > 1:
            logger.warning("{}: {} sign changes found while scanning, using the first", label, changes.size)
        index = int(changes[0])
        lo, hi = float(grid[index]), float(grid[index + 1])
        logger.debug("{}: bracket refined by scan to [{:.6g}, {:.6g}]", label, lo, hi)
    if lo == hi:
        return lo
    return bisect(f, Bracket(lo, hi), tol)


def solve_below_threshold(
    noise: OneModeNoise,
    energy: InputEnergy,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> OneModeSolution:
    """Optimum with the noisier quadrature left unmodulated (1 < lambda < lambda_thr)."""
    lambda_ = energy.lambda_
    if noise.symmetric:
        raise RegimeError("symmetric noise has no single-quadrature regime", gq=noise.gq, gp=noise.gp)
    threshold = lambda_threshold(noise) if noise.gp > 0.0 else math.inf
    if not 1.0 < lambda_ < threshold:
        raise RegimeError("input energy outside (1, lambda_thr)", lambda_=lambda_, threshold=threshold)

    upper = min(_squeeze_limit(noise), _max_unmodulated_squeeze(lambda_))
    lo = 0.5 + BRACKET_EPS
    hi = upper - BRACKET_EPS
    if hi <= lo:
        gin_q = 0.5
    else:
        gin_q = _find_root(
            lambda u: float(_residual_kernel(noise, lambda_, u)), lo, hi, tol, "single-quadrature optimum"
        )

    gin_p = PURITY / gin_q
    gmod_p = max(lambda_ - gin_q - gin_p, 0.0)
    gbar_q = gin_q + noise.gq
    gbar_p = gin_p + gmod_p + noise.gp
    nu_bar = math.sqrt(gbar_q * gbar_p)
    nu_out = math.sqrt(gbar_q * (gin_p + noise.gp))
    mu = float(kappa_array(nu_bar)) * gbar_q
    chi = g(nu_bar - 0.5) - g(max(nu_out - 0.5, 0.0))
    logger.debug("below threshold: lambda={:.6g} gin_q={:.12g} mu={:.6g}", lambda_, gin_q, mu)
    return _finish(noise, Regime.SINGLE_QUADRATURE, gin_q, gin_p, 0.0, gmod_p, mu, nu_bar, nu_out, chi)


def solve_one_mode(
    noise: OneModeNoise,
    energy: InputEnergy,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> OneModeSolution:
    """Dispatch to the vacuum, single-quadrature or water-filling regime."""
    lambda_ = energy.lambda_
    if lambda_ == 1.0:
        return _vacuum(noise)
    if noise.symmetric:
        return _water_filling(noise, lambda_)
    if noise.gp == 0.0:
        logger.debug("quiet quadrature is noiseless; the water-filling threshold diverges")
        return solve_below_threshold(noise, energy, tol)
    if lambda_ >= lambda_threshold(noise):
        return _water_filling(noise, lambda_)
    return solve_below_threshold(noise, energy, tol)


def _eq_for_mu(
    gin_q: FloatArray | float,
    gq: FloatArray | float,
    gp: FloatArray | float,
    mu: float,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Residual of the fixed-multiplier equation for gin_q plus the pieces reused afterwards.

    Returns (residual, gout_q, f) where f is the nonmodulated-output term and the overall output
    symplectic eigenvalue is gout_q * sqrt(1 + f/mu). Infeasible points give NaN.
    """
    u = np.asarray(gin_q, dtype=np.float64)
    gout_q = u + gq
    gout_p = PURITY / u + gp
    nu_out = np.sqrt(gout_q * gout_p)
    f = kappa_array(nu_out) * (gp - gq / (4.0 * u * u))
    with np.errstate(invalid="ignore"):
        scale = np.sqrt(1.0 + f / mu)
        residual = g_prime_array(gout_q * scale - 0.5) - 2.0 * mu * scale
    return residual, gout_q, f


def _single_quadrature_for_mu(noise: OneModeNoise, mu: float, tol: SolverTolerances) -> tuple[float, float]:
    """gin_q and lambda_i of a single-quadrature mode at a fixed multiplier."""

    def residual(u: float) -> float:
        return float(_eq_for_mu(u, noise.gq, noise.gp, mu)[0])

    lo = 0.5 + BRACKET_EPS
    if noise.gp > 0.0:
        hi = _squeeze_limit(noise) - BRACKET_EPS
    else:
        hi = 1.0
        for _ in range(tol.max_iter):
            if residual(hi) < 0.0:
                break
            hi *= 2.0
    gin_q = _find_root(residual, lo, hi, tol, "fixed-multiplier squeezing") if hi > lo else 0.5
    _, gout_q, f = _eq_for_mu(gin_q, noise.gq, noise.gp, mu)
    lambda_i = float(gout_q * f / mu) + 2.0 * gin_q + noise.gq - noise.gp
    return gin_q, lambda_i


def solve_for_mu(
    noise: OneModeNoise,
    mu: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> tuple[float, OneModeSolution]:
    """Energy a mode draws at a given multiplier, together with its optimal solution."""
    if mu <= 0.0 or math.isnan(mu):
        raise DomainError("the multiplier must be positive", mu=mu)
    if mu >= mu_zero(noise):
        return 1.0, _vacuum(noise)
    if noise.symmetric or (noise.gp > 0.0 and mu <= mu_threshold(noise)):
        nu_bar = nu_from_mu(mu)
        lambda_i = 2.0 * nu_bar - noise.gq - noise.gp
        solution = _water_filling(noise, lambda_i)
        return lambda_i, solution

    gin_q, lambda_i = _single_quadrature_for_mu(noise, mu, tol)
    gin_p = PURITY / gin_q
    gmod_p = max(lambda_i - gin_q - gin_p, 0.0)
    gbar_q = gin_q + noise.gq
    nu_bar = math.sqrt(gbar_q * (gin_p + gmod_p + noise.gp))
    nu_out = math.sqrt(gbar_q * (gin_p + noise.gp))
    chi = g(nu_bar - 0.5) - g(max(nu_out - 0.5, 0.0))
    solution = _finish(noise, Regime.SINGLE_QUADRATURE, gin_q, gin_p, 0.0, gmod_p, mu, nu_bar, nu_out, chi)
    return lambda_i, solution


def virtual_water_level(solution: OneModeSolution) -> float:
    """Water-filling level implied by the solution's multiplier (a 'virtual' level below threshold)."""
    return nu_from_mu(solution.mu)


@dataclass(frozen=True, slots=True)
class ModeProfile:
    """Elementwise optimum of many modes at one common multiplier (caller's orientation)."""

    mu: float
    env_q: FloatArray
    env_p: FloatArray
    set_index: npt.NDArray[np.int8]
    gin_q: FloatArray
    gin_p: FloatArray
    gmod_q: FloatArray
    gmod_p: FloatArray
    lambda_: FloatArray
    nu_bar: FloatArray
    nu_out: FloatArray
    chi: FloatArray

    @property
    def set_labels(self) -> list[str]:
        return [f"N{int(index)}" for index in self.set_index]


def threshold_multipliers(gq: npt.ArrayLike, gp: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Elementwise (mu_thr, mu_0) for arrays of modes in any orientation."""
    q = np.asarray(gq, dtype=np.float64)
    p = np.asarray(gp, dtype=np.float64)
    hi = np.maximum(q, p)
    lo = np.minimum(q, p)
    symmetric = hi == lo
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(symmetric, 1.0, np.sqrt(hi / np.where(lo > 0.0, lo, 1.0)))
        threshold = np.where(symmetric, 1.0, ratio + hi - lo)
        mu_thr = 0.5 * g_prime_array(0.5 * (threshold + hi + lo) - 0.5)
        mu_thr = np.where((lo == 0.0) & ~symmetric, 0.0, mu_thr)
        nu_vac = np.sqrt((hi + 0.5) * (lo + 0.5))
        mu_0 = 0.5 * g_prime_array(nu_vac - 0.5) * np.sqrt((hi + 0.5) / (lo + 0.5))
    return mu_thr, mu_0


def energies_for_mu(
    gq: npt.ArrayLike,
    gp: npt.ArrayLike,
    mu: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> ModeProfile:
    """Vectorized :func:`solve_for_mu` over arrays of modes sharing the multiplier ``mu``."""
    if mu <= 0.0 or math.isnan(mu):
        raise DomainError("the multiplier must be positive", mu=mu)
    env_q = np.asarray(gq, dtype=np.float64)
    env_p = np.asarray(gp, dtype=np.float64)
    swapped = env_q < env_p
    hi = np.where(swapped, env_p, env_q)
    lo = np.where(swapped, env_q, env_p)
    mu_thr, mu_0 = threshold_multipliers(hi, lo)

    set_index = np.full(hi.shape, 2, dtype=np.int8)
    set_index[mu >= mu_0] = 1
    set_index[(mu < mu_0) & (mu <= mu_thr)] = 3

    gin_q = np.full(hi.shape, 0.5)
    gin_p = np.full(hi.shape, 0.5)
    gmod_q = np.zeros(hi.shape)
    gmod_p = np.zeros(hi.shape)
    lambda_ = np.ones(hi.shape)

    wf = set_index == 3
    if np.any(wf):
        level = float(nu_from_mu_array(mu))
        symmetric = hi[wf] == lo[wf]
        with np.errstate(divide="ignore", invalid="ignore"):
            squeeze = np.where(symmetric, 0.5, 0.5 * np.sqrt(hi[wf] / np.where(lo[wf] > 0.0, lo[wf], 1.0)))
        gin_q[wf] = squeeze
        gin_p[wf] = PURITY / squeeze
        gmod_q[wf] = np.maximum(level - squeeze - hi[wf], 0.0)
        gmod_p[wf] = np.maximum(level - PURITY / squeeze - lo[wf], 0.0)
        lambda_[wf] = 2.0 * level - hi[wf] - lo[wf]

    sq = set_index == 2
    if np.any(sq):
        q_sq, p_sq = hi[sq], lo[sq]
        upper = np.empty_like(q_sq)
        positive = p_sq > 0.0
        upper[positive] = 0.5 * np.sqrt(q_sq[positive] / p_sq[positive]) - BRACKET_EPS
        if np.any(~positive):
            upper[~positive] = _expand_upper(q_sq[~positive], p_sq[~positive], mu, tol)
        lower = np.full_like(q_sq, 0.5 + BRACKET_EPS)
        roots = bisect_vectorized(lambda u: _eq_for_mu(u, q_sq, p_sq, mu)[0], lower, np.maximum(upper, lower), tol)
        _, gout_q, f = _eq_for_mu(roots, q_sq, p_sq, mu)
        lam = gout_q * f / mu + 2.0 * roots + q_sq - p_sq
        gin_q[sq] = roots
        gin_p[sq] = PURITY / roots
        gmod_p[sq] = np.maximum(lam - roots - PURITY / roots, 0.0)
        lambda_[sq] = lam

    gbar_hi = gin_q + gmod_q + hi
    gbar_lo = gin_p + gmod_p + lo
    nu_bar = np.sqrt(gbar_hi * gbar_lo)
    nu_out = np.sqrt((gin_q + hi) * (gin_p + lo))
    wf_nu_out = 0.5 + np.sqrt(hi * lo)
    nu_out = np.where(wf, wf_nu_out, nu_out)
    chi = g_array(np.clip(nu_bar - 0.5, 0.0, None)) - g_array(np.clip(nu_out - 0.5, 0.0, None))
    chi = np.where(set_index == 1, 0.0, chi)

    return ModeProfile(
        mu=mu,
        env_q=env_q,
        env_p=env_p,
        set_index=set_index,
        gin_q=np.where(swapped, gin_p, gin_q),
        gin_p=np.where(swapped, gin_q, gin_p),
        gmod_q=np.where(swapped, gmod_p, gmod_q),
        gmod_p=np.where(swapped, gmod_q, gmod_p),
        lambda_=lambda_,
        nu_bar=nu_bar,
        nu_out=nu_out,
        chi=chi,
    )


def _expand_upper(gq: FloatArray, gp: FloatArray, mu: float, tol: SolverTolerances) -> FloatArray:
    """Upper brackets for modes whose quiet quadrature is noiseless (no finite squeeze limit)."""
    upper = np.ones_like(gq)
    for _ in range(tol.max_iter):
        residual = _eq_for_mu(upper, gq, gp, mu)[0]
        pending = np.isnan(residual) | (residual >= 0.0)
        if not np.any(pending):
            break
        upper = np.where(pending, 2.0 * upper, upper)
    return upper
