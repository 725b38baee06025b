"""Capacity solvers: one mode, finite ensembles, spectra, coherent baselines and input states."""

from .coherent import (
    GainPoint,
    coherent_rate_one_mode,
    coherent_rate_spectral,
    coherent_water_level,
    gain,
    gain_at,
    gain_sweep,
    gm_alpha,
    gm_coherent_threshold,
    max_gain_over_nbar,
    output_eigenvalues,
    two_mode_gain,
)
from .input_state import (
    ScalarCovariance,
    ToeplitzCovariance,
    entanglement_witness,
    gm_global_wf_input,
    input_fourier_coefficients,
    modulated_output_covariance,
)
from .multi_mode import (
    BlockNoise,
    ModeEnsemble,
    MultiModeSolution,
    Partition,
    circulant_blocks,
    classify_modes,
    diagonalize_noise,
    gauss_markov_blocks,
    solve_mu,
    total_input_energy,
)
from .one_mode import (
    InputEnergy,
    OneModeNoise,
    OneModeSolution,
    Regime,
    holevo_chi,
    lambda_threshold,
    mu_threshold,
    mu_zero,
    residual_F,
    solve_above_threshold,
    solve_below_threshold,
    solve_for_mu,
    solve_one_mode,
    virtual_water_level,
)
from .spectral import (
    SpectralSolution,
    capacity_global_wf,
    capacity_spectral,
    classify_spectrum,
    gm_capacity_closed_form,
    noiseless_capacity,
    solve_global_wf,
    solve_mu_spectral,
    spectral_threshold_nbar,
    threshold_profiles,
)

__all__ = [
    "BlockNoise",
    "GainPoint",
    "InputEnergy",
    "ModeEnsemble",
    "MultiModeSolution",
    "OneModeNoise",
    "OneModeSolution",
    "Partition",
    "Regime",
    "ScalarCovariance",
    "SpectralSolution",
    "ToeplitzCovariance",
    "capacity_global_wf",
    "capacity_spectral",
    "circulant_blocks",
    "classify_modes",
    "classify_spectrum",
    "coherent_rate_one_mode",
    "coherent_rate_spectral",
    "coherent_water_level",
    "diagonalize_noise",
    "entanglement_witness",
    "gain",
    "gain_at",
    "gain_sweep",
    "gauss_markov_blocks",
    "gm_alpha",
    "gm_capacity_closed_form",
    "gm_coherent_threshold",
    "gm_global_wf_input",
    "holevo_chi",
    "input_fourier_coefficients",
    "lambda_threshold",
    "max_gain_over_nbar",
    "modulated_output_covariance",
    "mu_threshold",
    "mu_zero",
    "noiseless_capacity",
    "output_eigenvalues",
    "residual_F",
    "solve_above_threshold",
    "solve_below_threshold",
    "solve_for_mu",
    "solve_global_wf",
    "solve_mu",
    "solve_mu_spectral",
    "solve_one_mode",
    "spectral_threshold_nbar",
    "threshold_profiles",
    "total_input_energy",
    "two_mode_gain",
    "virtual_water_level",
]
