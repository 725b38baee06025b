"""Noise models, their spectra and JSON schema validation."""

from .noise import (
    MAX_PHI,
    AutoRegressive,
    GaussMarkov,
    Modes,
    NoiseModel,
    SpectrumGrid,
    Tabulated,
    ar_is_stationary,
    ar_spectrum,
    gauss_markov_spectrum,
    gm_threshold_nbar,
    mirror_p_coefficients,
)
from .schema import model_from_dict, model_schema, validate_model_document

__all__ = [
    "MAX_PHI",
    "AutoRegressive",
    "GaussMarkov",
    "Modes",
    "NoiseModel",
    "SpectrumGrid",
    "Tabulated",
    "ar_is_stationary",
    "ar_spectrum",
    "gauss_markov_spectrum",
    "gm_threshold_nbar",
    "mirror_p_coefficients",
    "model_from_dict",
    "model_schema",
    "validate_model_document",
]
