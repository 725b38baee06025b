"""Infinitely many correlated modes described by their noise spectra.

Every quadrature node is treated as an independent mode and integrals become weighted means
over the nodes of the model's :class:`~capwater.models.noise.SpectrumGrid`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from loguru import logger

from capwater.core.errors import DomainError, RegimeError
from capwater.core.numerics import DEFAULT_TOLERANCES, SolverTolerances, integrate
from capwater.core.special import g, g_array, mu_from_nu
from capwater.models.noise import GaussMarkov, NoiseModel, SpectrumGrid, gauss_markov_spectrum, gm_threshold_nbar

from .multi_mode import bisect_multiplier, energy_slack, upper_multiplier
from .one_mode import ModeProfile, energies_for_mu, threshold_multipliers

FloatArray = npt.NDArray[np.float64]

SET_LABELS = np.array(["N1", "N2", "N3"])


@dataclass(frozen=True, slots=True)
class SpectralSolution:
    """Optimal input and modulation spectra sampled on the model's grid."""

    mu: float
    nbar: float
    grid: SpectrumGrid = field(repr=False)
    gin_q: FloatArray = field(repr=False)
    gin_p: FloatArray = field(repr=False)
    gmod_q: FloatArray = field(repr=False)
    gmod_p: FloatArray = field(repr=False)
    set_index: npt.NDArray[np.int8] = field(repr=False)
    capacity: float
    rate_is_global_wf: bool

    @property
    def set_labels(self) -> npt.NDArray[np.str_]:
        return SET_LABELS[self.set_index - 1]

    @property
    def lambda_(self) -> FloatArray:
        return self.gin_q + self.gin_p + self.gmod_q + self.gmod_p

    @property
    def gbar_q(self) -> FloatArray:
        return self.gin_q + self.gmod_q + self.grid.gq

    @property
    def gbar_p(self) -> FloatArray:
        return self.gin_p + self.gmod_p + self.grid.gp

    def set_fractions(self) -> dict[str, float]:
        """Measure of each set relative to the whole domain."""
        return {label: self.grid.mean(self.set_index == index + 1) for index, label in enumerate(SET_LABELS)}


def _grid(model: NoiseModel, tol: SolverTolerances) -> SpectrumGrid:
    if isinstance(model, GaussMarkov) and model.phi > 0.95:
        panel = math.pi / tol.grid_size
        if panel > 0.25 * (1.0 - model.phi):
            logger.warning(
                "grid_size={} resolves the noise peak of phi={} poorly; raise grid_size", tol.grid_size, model.phi
            )
    return model.sample(tol)


def threshold_profiles(model: NoiseModel, tol: SolverTolerances = DEFAULT_TOLERANCES) -> tuple[FloatArray, ...]:
    """Nodes with the water-filling and vacuum multipliers mu_thr(x) and mu_0(x)."""
    grid = _grid(model, tol)
    mu_thr, mu_0 = threshold_multipliers(grid.gq, grid.gp)
    return grid.nodes, mu_thr, mu_0


def classify_spectrum(
    model: NoiseModel,
    mu: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> npt.NDArray[np.str_]:
    """Set label of every grid node for the multiplier ``mu``."""
    if mu <= 0.0:
        raise DomainError("the multiplier must be positive", mu=mu)
    _, mu_thr, mu_0 = threshold_profiles(model, tol)
    labels = np.full(mu_0.shape, "N2")
    labels[(mu < mu_0) & (mu <= mu_thr)] = "N3"
    labels[mu >= mu_0] = "N1"
    return labels


def _threshold_level(grid: SpectrumGrid, model: NoiseModel) -> float:
    """Largest per-node water-filling threshold level 1/2 sqrt(gq/gp) + gq (canonical orientation)."""
    hi = np.maximum(grid.gq, grid.gp)
    lo = np.minimum(grid.gq, grid.gp)
    if grid.continuous:
        spectrum = getattr(model, "spectrum", None)
        if spectrum is not None:
            edge_q, edge_p = spectrum(np.array([0.0, math.pi]))
            hi = np.concatenate([hi, np.maximum(edge_q, edge_p)])
            lo = np.concatenate([lo, np.minimum(edge_q, edge_p)])
    symmetric = hi == lo
    if np.any((lo == 0.0) & ~symmetric):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        squeeze = np.where(symmetric, 0.5, 0.5 * np.sqrt(hi / np.where(lo > 0.0, lo, 1.0)))
    return float(np.max(squeeze + hi))


def spectral_threshold_nbar(model: NoiseModel, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Smallest nbar for which every mode is water-filled."""
    if isinstance(model, GaussMarkov):
        return gm_threshold_nbar(model.N, model.phi)
    grid = _grid(model, tol)
    level = _threshold_level(grid, model)
    if math.isinf(level):
        return math.inf
    return max(0.0, level - 0.5 * grid.mean(grid.gq + grid.gp) - 0.5)


def noiseless_capacity(nbar: float) -> float:
    """Capacity g(nbar) of the noiseless channel, the full-correlation limit."""
    return g(nbar)


def capacity_global_wf(model: NoiseModel, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Closed-form capacity when every mode is water-filled at one common level."""
    threshold = spectral_threshold_nbar(model, tol)
    if nbar < threshold * (1.0 - 1e-12):
        raise RegimeError("nbar is below the global water-filling threshold", nbar=nbar, threshold=threshold)
    grid = _grid(model, tol)
    level = nbar + 0.5 + 0.5 * grid.mean(grid.gq + grid.gp)
    return g(level - 0.5) - grid.mean(g_array(np.sqrt(grid.gq * grid.gp)))


def gm_capacity_closed_form(N: float, phi: float, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Gauss-Markov capacity g(nbar + N) - (1/pi) int g(sqrt(gq gp)) above the threshold."""
    threshold = gm_threshold_nbar(N, phi)
    if nbar < threshold * (1.0 - 1e-12):
        raise RegimeError("nbar is below the Gauss-Markov threshold", nbar=nbar, threshold=threshold)

    def output_entropy(x: FloatArray) -> FloatArray:
        gq, gp = gauss_markov_spectrum(N, phi, x)
        return g_array(np.sqrt(gq * gp))

    return g(nbar + N) - integrate(output_entropy, 0.0, math.pi, tol) / math.pi


def _from_profile(profile: ModeProfile, grid: SpectrumGrid, nbar: float) -> SpectralSolution:
    return SpectralSolution(
        mu=profile.mu,
        nbar=nbar,
        grid=grid,
        gin_q=profile.gin_q,
        gin_p=profile.gin_p,
        gmod_q=profile.gmod_q,
        gmod_p=profile.gmod_p,
        set_index=profile.set_index,
        capacity=max(grid.mean(profile.chi), 0.0),
        rate_is_global_wf=bool(np.all(profile.set_index == 3)),
    )


def _global_wf_solution(grid: SpectrumGrid, nbar: float) -> SpectralSolution:
    """Exact water-filling spectra at the common level (2 lambda_bar + mean(gq + gp)) / 2."""
    level = nbar + 0.5 + 0.5 * grid.mean(grid.gq + grid.gp)
    hi = np.maximum(grid.gq, grid.gp)
    lo = np.minimum(grid.gq, grid.gp)
    with np.errstate(divide="ignore", invalid="ignore"):
        squeeze = np.where(hi == lo, 0.5, 0.5 * np.sqrt(hi / np.where(lo > 0.0, lo, 1.0)))
    swapped = grid.gq < grid.gp
    gin_q = np.where(swapped, 0.25 / squeeze, squeeze)
    gin_p = 0.25 / gin_q
    gmod_q = np.maximum(level - gin_q - grid.gq, 0.0)
    gmod_p = np.maximum(level - gin_p - grid.gp, 0.0)
    capacity = g(level - 0.5) - grid.mean(g_array(np.sqrt(grid.gq * grid.gp)))
    mu = mu_from_nu(level) if level > 0.5 else math.inf
    return SpectralSolution(
        mu=mu,
        nbar=nbar,
        grid=grid,
        gin_q=gin_q,
        gin_p=gin_p,
        gmod_q=gmod_q,
        gmod_p=gmod_p,
        set_index=np.full(grid.size, 3, dtype=np.int8),
        capacity=capacity,
        rate_is_global_wf=True,
    )


def solve_mu_spectral(model: NoiseModel, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> SpectralSolution:
    """Common multiplier and optimal spectra for the mean photon number ``nbar`` per mode."""
    if math.isnan(nbar) or nbar < 0.0:
        raise DomainError("nbar must be nonnegative", nbar=nbar)
    grid = _grid(model, tol)
    target = 2.0 * nbar + 1.0
    mu_hi = upper_multiplier(grid.gq, grid.gp)
    if target <= 1.0 + energy_slack(target):
        return _from_profile(energies_for_mu(grid.gq, grid.gp, mu_hi, tol), grid, nbar)

    def mean_energy(mu: float) -> float:
        return grid.mean(energies_for_mu(grid.gq, grid.gp, mu, tol).lambda_)

    mu = bisect_multiplier(mean_energy, target, mu_hi, tol)
    profile = energies_for_mu(grid.gq, grid.gp, mu, tol)
    if np.all(profile.set_index == 3):
        solution = _global_wf_solution(grid, nbar)
    else:
        solution = _from_profile(profile, grid, nbar)
    logger.debug(
        "spectral solve: nbar={:.6g} mu={:.6g} capacity={:.9g} global_wf={}",
        nbar,
        solution.mu,
        solution.capacity,
        solution.rate_is_global_wf,
    )
    return solution


def capacity_spectral(model: NoiseModel, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Capacity in bits per mode, using closed forms above the global water-filling threshold."""
    if math.isnan(nbar) or nbar < 0.0:
        raise DomainError("nbar must be nonnegative", nbar=nbar)
    if nbar >= spectral_threshold_nbar(model, tol):
        if isinstance(model, GaussMarkov):
            return gm_capacity_closed_form(model.N, model.phi, nbar, tol)
        return capacity_global_wf(model, nbar, tol)
    return solve_mu_spectral(model, nbar, tol).capacity


def solve_global_wf(model: NoiseModel, nbar: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> SpectralSolution:
    """Water-filled spectra in closed form; only valid above the global threshold."""
    threshold = spectral_threshold_nbar(model, tol)
    if math.isnan(nbar) or nbar < threshold * (1.0 - 1e-12):
        raise RegimeError("nbar is below the global water-filling threshold", nbar=nbar, threshold=threshold)
    return _global_wf_solution(_grid(model, tol), nbar)
