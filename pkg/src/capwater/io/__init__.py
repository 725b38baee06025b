"""Model loading and result serialization."""

from .model_loader import load_model, parse_model
from .records import OutputFormat, emit, render, write_atomic

__all__ = ["OutputFormat", "emit", "load_model", "parse_model", "render", "write_atomic"]
