"""Coherent-state transmission rate and the gain of optimal inputs over coherent states.

With vacuum inputs the problem reduces to classical water-filling of the modulation over the
quadrature spectra gq(x) and gp(x) at one common level.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import asdict, dataclass
from typing import Any, Literal

import numpy as np
import numpy.typing as npt
from loguru import logger

from capwater.core.errors import DomainError
from capwater.core.numerics import DEFAULT_TOLERANCES, Bracket, SolverTolerances, bisect, integrate
from capwater.core.special import g, g_array
from capwater.models.noise import GaussMarkov, NoiseModel, SpectrumGrid, gauss_markov_spectrum

from .one_mode import InputEnergy, OneModeNoise, solve_one_mode
from .spectral import capacity_spectral

FloatArray = npt.NDArray[np.float64]

Channel = Literal["infinite", "two_mode"]


@dataclass(frozen=True, slots=True)
class GainPoint:
    """Capacity, coherent rate and their ratio at one operating point."""

    nbar: float
    snr: float
    phi: float
    capacity: float
    rate: float
    gain: float

    def as_record(self) -> dict[str, float]:
        return asdict(self)


def _coherent_rate(gq: FloatArray, gp: FloatArray, weights: FloatArray, level: float) -> float:
    gbar_q = 0.5 + np.maximum(gq, level)
    gbar_p = 0.5 + np.maximum(gp, level)
    out = np.sqrt((0.5 + gq) * (0.5 + gp))
    modulated = g_array(np.sqrt(gbar_q * gbar_p) - 0.5)
    unmodulated = g_array(np.clip(out - 0.5, 0.0, None))
    return max(float(np.dot(weights, modulated - unmodulated)), 0.0)


def _water_level(gq: FloatArray, gp: FloatArray, weights: FloatArray, nbar: float, tol: SolverTolerances) -> float:
    """Level L with mean(max(0, L - gq) + max(0, L - gp)) = 2 nbar."""
    if nbar == 0.0:
        return float(min(np.min(gq), np.min(gp)))

    def excess(level: float) -> float:
        filled = np.maximum(level - gq, 0.0) + np.maximum(level - gp, 0.0)
        return float(np.dot(weights, filled)) - 2.0 * nbar

    lo = float(min(np.min(gq), np.min(gp)))
    hi = float(max(np.max(gq), np.max(gp))) + nbar
    return bisect(excess, Bracket(lo, hi), tol)


def coherent_water_level(model: NoiseModel, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Common modulation level of classical water-filling over both quadrature spectra."""
    if math.isnan(nbar) or nbar < 0.0:
        raise DomainError("nbar must be nonnegative", nbar=nbar)
    grid = model.sample(tol)
    return _water_level(grid.gq, grid.gp, grid.weights, nbar, tol)


def _gm_filled_mean(N: float, phi: float, alpha: float) -> float:
    """(1/pi) times the integral of gq over [alpha, pi] for Gauss-Markov noise."""
    ratio = (1.0 + phi) / (1.0 - phi)
    return N / math.pi * (math.pi - 2.0 * math.atan(ratio * math.tan(0.5 * alpha)))


def gm_coherent_threshold(N: float, phi: float) -> float:
    """Smallest nbar at which coherent inputs modulate every Gauss-Markov mode in both quadratures."""
    return 2.0 * phi * N / (1.0 - phi)


def gm_alpha(N: float, phi: float, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Edge alpha of the modulated q band [alpha, pi] below the coherent threshold.

    The water level equals gq(alpha) and the p band is the mirror image [0, pi - alpha].
    """
    threshold = gm_coherent_threshold(N, phi)
    if nbar >= threshold:
        return 0.0
    if nbar <= 0.0:
        return math.pi

    def excess(alpha: float) -> float:
        level = float(gauss_markov_spectrum(N, phi, alpha)[0])
        return (math.pi - alpha) / math.pi * level - _gm_filled_mean(N, phi, alpha) - nbar

    return bisect(excess, Bracket(0.0, math.pi), tol)


def coherent_rate_spectral(model: NoiseModel, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Best rate in bits per mode with vacuum inputs and Gaussian modulation."""
    if math.isnan(nbar) or nbar < 0.0:
        raise DomainError("nbar must be nonnegative", nbar=nbar)
    if isinstance(model, GaussMarkov):
        N, phi = model.N, model.phi
        if nbar >= gm_coherent_threshold(N, phi):

            def output_entropy(x: FloatArray) -> FloatArray:
                gq, gp = gauss_markov_spectrum(N, phi, x)
                return g_array(np.sqrt(0.25 + 0.5 * (gq + gp) + gq * gp) - 0.5)

            return max(g(nbar + N) - integrate(output_entropy, 0.0, math.pi, tol) / math.pi, 0.0)
        alpha = gm_alpha(N, phi, nbar, tol)
        level = float(gauss_markov_spectrum(N, phi, alpha)[0])
        logger.debug("coherent band edge alpha={:.9g} level={:.9g}", alpha, level)
        grid = model.sample(tol)
        return _coherent_rate(grid.gq, grid.gp, grid.weights, level)
    grid = model.sample(tol)
    level = _water_level(grid.gq, grid.gp, grid.weights, nbar, tol)
    return _coherent_rate(grid.gq, grid.gp, grid.weights, level)


def output_eigenvalues(grid: SpectrumGrid) -> tuple[FloatArray, FloatArray]:
    """Nonmodulated output eigenvalues for coherent inputs and for water-filled squeezed inputs."""
    coherent = np.sqrt(0.25 + 0.5 * (grid.gq + grid.gp) + grid.gq * grid.gp)
    squeezed = np.sqrt(0.25 + np.sqrt(grid.gq * grid.gp) + grid.gq * grid.gp)
    return coherent, squeezed


def coherent_rate_one_mode(
    noise: OneModeNoise,
    energy: InputEnergy,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> float:
    """Coherent-state rate of a single phase-dependent mode."""
    gq = np.array([noise.gq])
    gp = np.array([noise.gp])
    level = _water_level(gq, gp, np.ones(1), energy.nbar, tol)
    return _coherent_rate(gq, gp, np.ones(1), level)


def _noise_power(model: NoiseModel, tol: SolverTolerances) -> float:
    if isinstance(model, GaussMarkov):
        return model.N
    grid = model.sample(tol)
    return 0.5 * grid.mean(grid.gq + grid.gp)


def _ratio(capacity: float, rate: float) -> float:
    gain = capacity / rate
    if gain < 1.0 - 1e-9:
        logger.warning("capacity {:.12g} fell below the coherent rate {:.12g}", capacity, rate)
    return gain


def gain(model: NoiseModel, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> GainPoint:
    """Ratio of the capacity to the coherent-state rate."""
    if math.isnan(nbar) or nbar <= 0.0:
        raise DomainError("the gain is undefined without signal energy", nbar=nbar)
    capacity = capacity_spectral(model, nbar, tol)
    rate = coherent_rate_spectral(model, nbar, tol)
    power = _noise_power(model, tol)
    phi = model.phi if isinstance(model, GaussMarkov) else math.nan
    return GainPoint(
        nbar=nbar,
        snr=nbar / power if power > 0.0 else math.inf,
        phi=phi,
        capacity=capacity,
        rate=rate,
        gain=_ratio(capacity, rate),
    )


def two_mode_gain(N: float, phi: float, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> GainPoint:
    """Gain of two Gauss-Markov modes, which decouple into one mode with noise N(1 +- phi)."""
    if not 0.0 <= phi < 1.0:
        raise DomainError("phi must lie in [0, 1)", phi=phi)
    if math.isnan(nbar) or nbar <= 0.0:
        raise DomainError("the gain is undefined without signal energy", nbar=nbar)
    noise = OneModeNoise(N * (1.0 + phi), N * (1.0 - phi))
    energy = InputEnergy.from_nbar(nbar)
    capacity = solve_one_mode(noise, energy, tol).chi
    rate = coherent_rate_one_mode(noise, energy, tol)
    return GainPoint(
        nbar=nbar,
        snr=nbar / N if N > 0.0 else math.inf,
        phi=phi,
        capacity=capacity,
        rate=rate,
        gain=_ratio(capacity, rate),
    )


def gain_at(
    channel: Channel,
    snr: float,
    phi: float,
    nbar: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> GainPoint:
    """Gain at fixed signal-to-noise ratio: the noise variance is N = nbar / snr."""
    if snr <= 0.0:
        raise DomainError("snr must be positive", snr=snr)
    N = nbar / snr
    if channel == "two_mode":
        return two_mode_gain(N, phi, nbar, tol)
    return gain(GaussMarkov(N=N, phi=phi), nbar, tol)


Mapper = Callable[[Callable[[Any], GainPoint], Iterable[Any]], Iterable[GainPoint]]


def max_gain_over_nbar(
    snr: float,
    phi: float,
    nbar_grid: Sequence[float],
    channel: Channel = "infinite",
    tol: SolverTolerances = DEFAULT_TOLERANCES,
    mapper: Mapper = map,
) -> GainPoint:
    """Grid point with the largest gain; ties go to the smallest nbar."""
    if not nbar_grid:
        raise DomainError("the nbar grid is empty")
    ordered = sorted(float(n) for n in nbar_grid)
    points = list(mapper(lambda nbar: gain_at(channel, snr, phi, nbar, tol), ordered))
    best = points[0]
    for point in points[1:]:
        if point.gain > best.gain:
            best = point
    return best


def gain_sweep(
    snrs: Sequence[float],
    phis: Sequence[float],
    nbar_grid: Sequence[float],
    channel: Channel = "infinite",
    tol: SolverTolerances = DEFAULT_TOLERANCES,
    mapper: Mapper = map,
) -> list[GainPoint]:
    """Gain over the product of snr, phi and nbar values, in that nesting order."""
    combos = [(snr, phi, nbar) for snr in snrs for phi in phis for nbar in nbar_grid]
    index = range(len(combos))

    def evaluate(i: int) -> GainPoint:
        snr, phi, nbar = combos[i]
        return gain_at(channel, snr, phi, nbar, tol)

    return list(mapper(evaluate, index))
