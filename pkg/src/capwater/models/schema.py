"""JSON schema validation and construction of noise models from plain documents."""

from __future__ import annotations

import json
from collections.abc import Mapping
from functools import lru_cache
from pathlib import Path
from typing import Any

from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from capwater.core.errors import ModelError

from .noise import AutoRegressive, GaussMarkov, Modes, NoiseModel, Tabulated, mirror_p_coefficients

SCHEMA_PATH = Path(__file__).with_name("noise_model.schema.json")


@lru_cache(maxsize=1)
def model_schema() -> dict[str, Any]:
    with SCHEMA_PATH.open("r", encoding="utf-8") as handle:
        schema: dict[str, Any] = json.load(handle)
    return schema


def validate_model_document(document: Mapping[str, Any]) -> None:
    """Raise :class:`ModelError` if ``document`` does not conform to the noise model schema."""
    validator = Draft202012Validator(model_schema())
    error = best_match(validator.iter_errors(document))
    if error is not None:
        location = "/".join(str(part) for part in error.absolute_path) or "<root>"
        raise ModelError(f"invalid noise model at {location}: {error.message}", path=location)


def model_from_dict(document: Mapping[str, Any]) -> NoiseModel:
    """Validate ``document`` and build the matching model.

    For ``ar`` documents the p process defaults to the sign-alternated q coefficients and the q
    innovation variance.
    """
    validate_model_document(document)
    kind = document["type"]
    if kind == "gauss_markov":
        return GaussMarkov(N=float(document["N"]), phi=float(document["phi"]))
    if kind == "ar":
        q_coeffs = [float(c) for c in document["q_coeffs"]]
        p_coeffs = document.get("p_coeffs", mirror_p_coefficients(q_coeffs))
        q_variance = float(document["q_variance"])
        return AutoRegressive(
            q_coeffs=tuple(q_coeffs),
            p_coeffs=tuple(float(c) for c in p_coeffs),
            q_variance=q_variance,
            p_variance=float(document.get("p_variance", q_variance)),
        )
    if kind == "tabulated":
        return Tabulated(x=document["x"], gq=document["gq"], gp=document["gp"])
    return Modes.from_pairs([(float(mode["gq"]), float(mode["gp"])) for mode in document["modes"]])
