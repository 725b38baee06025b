"""Validated configuration of one command-line run."""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from capwater.core.errors import DomainError
from capwater.core.numerics import SolverTolerances
from capwater.io.records import OutputFormat

Command = Literal["one-mode", "finite", "spectral", "gain", "input-cov", "sweep", "verify"]

THREADS_ENV = "CAPWATER_THREADS"


def parse_grid(text: str, log: bool = False) -> list[float]:
    """Expand ``lo:hi:steps`` into ``steps`` points, log-spaced when ``log`` is set.

    A bare number is a one-point grid.
    """
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError(text)
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise DomainError("grid must read lo:hi:steps", grid=text) from exc
    if steps < 1 or math.isnan(lo) or math.isnan(hi) or hi < lo:
        raise DomainError("grid needs lo <= hi and at least one step", grid=text)
    if steps == 1:
        return [lo]
    if log:
        if lo <= 0.0:
            raise DomainError("log grids need a positive lower end", grid=text)
        return [float(v) for v in np.geomspace(lo, hi, steps)]
    return [float(v) for v in np.linspace(lo, hi, steps)]


def worker_count() -> int | None:
    """Pool size from CAPWATER_THREADS; ``None`` lets the executor decide."""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise DomainError(f"{THREADS_ENV} must be an integer", value=raw) from exc
    if value < 0:
        raise DomainError(f"{THREADS_ENV} must be nonnegative", value=value)
    return value or None


class RunConfig(BaseModel):
    """Everything one invocation needs; built from parsed arguments."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    command: Command
    model_path: Path | None = None
    gq: float | None = Field(default=None, ge=0.0)
    gp: float | None = Field(default=None, ge=0.0)
    N: float | None = Field(default=None, ge=0.0)
    phi: float | None = Field(default=None, ge=0.0, lt=1.0)
    modes: int = Field(default=2, ge=1)
    nbar: float | None = Field(default=None, ge=0.0)
    lambda_: float | None = Field(default=None, ge=0.0)
    nbar_grid: str | None = None
    log: bool = False
    snr: float | None = Field(default=None, gt=0.0)
    channel: Literal["infinite", "two_mode"] = "infinite"
    param: Literal["phi", "N"] = "phi"
    values: str | None = None
    k_max: int = Field(default=64, ge=0)
    seed: int = 0
    instances: int = Field(default=20, ge=1)
    root_tol: float = Field(default=1e-12, gt=0.0)
    mu_tol: float = Field(default=1e-10, gt=0.0)
    grid_size: int = Field(default=2048, ge=2)
    max_iter: int = Field(default=200, ge=1)
    format: OutputFormat = "csv"
    output: Path | None = None

    @model_validator(mode="after")
    def _check_inputs(self) -> RunConfig:
        if (self.gq is None) != (self.gp is None):
            raise ValueError("--gq and --gp must be given together")
        if (self.N is None) != (self.phi is None):
            raise ValueError("--N and --phi must be given together")
        if self.nbar is not None and self.lambda_ is not None:
            raise ValueError("give either --nbar or --lambda, not both")
        if self.command == "sweep" and self.values is None:
            raise ValueError("sweep needs --values")
        return self

    @classmethod
    def build(cls, **fields: object) -> RunConfig:
        """Validate ``fields``; failures surface as :class:`DomainError`."""
        try:
            return cls.model_validate({key: value for key, value in fields.items() if value is not None})
        except ValidationError as exc:
            first = exc.errors()[0]
            location = ".".join(str(part) for part in first["loc"]) or "config"
            raise DomainError(f"invalid option {location}: {first['msg']}", errors=exc.error_count()) from exc

    @property
    def tolerances(self) -> SolverTolerances:
        return SolverTolerances(
            root_tol=self.root_tol,
            mu_tol=self.mu_tol,
            grid_size=self.grid_size,
            max_iter=self.max_iter,
        )

    def nbar_values(self) -> list[float]:
        """The nbar grid if given, else the single nbar; raises when neither is set."""
        if self.nbar_grid is not None:
            return parse_grid(self.nbar_grid, self.log)
        if self.nbar is not None:
            return [self.nbar]
        raise DomainError(f"{self.command} needs --nbar or --nbar-grid")

    def sweep_values(self) -> list[float]:
        if self.values is None:
            raise DomainError("sweep needs --values")
        return parse_grid(self.values, self.log)
