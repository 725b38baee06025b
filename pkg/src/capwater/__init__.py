"""Gaussian capacity of bosonic additive-noise channels with correlated noise."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("capwater")
except PackageNotFoundError:  # pragma: no cover - resolved once installed
    __version__ = "0.0.0"

__all__ = ["__version__"]
