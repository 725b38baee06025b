"""Reading noise model documents from disk or from strings."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from loguru import logger

from capwater.core.errors import ModelError
from capwater.models import NoiseModel, model_from_dict


def parse_model(text: str, source: str = "<string>") -> NoiseModel:
    """Parse a JSON noise model; syntax errors carry their line and column."""
    try:
        document: Any = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(
            f"malformed JSON in {source}: {exc.msg}",
            source=source,
            line=exc.lineno,
            column=exc.colno,
        ) from exc
    if not isinstance(document, dict):
        raise ModelError(f"noise model in {source} must be a JSON object", source=source)
    model = model_from_dict(document)
    logger.debug("loaded {} noise model from {}", model.kind, source)
    return model


def load_model(path: str | Path) -> NoiseModel:
    """Read and validate the noise model stored at ``path``."""
    target = Path(path)
    return parse_model(target.read_text(encoding="utf-8"), source=str(target))
