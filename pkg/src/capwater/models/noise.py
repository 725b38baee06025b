"""Noise descriptions and their quadrature spectra.

Continuous models are sampled on [0, pi] with weight 1/pi (the spectra are mirror symmetric about
x = pi). A finite list of modes is sampled with equal weights so the same nodewise solvers apply.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol, runtime_checkable

import numpy as np
import numpy.typing as npt

from capwater.core.errors import DomainError, ModelError
from capwater.core.numerics import DEFAULT_TOLERANCES, SolverTolerances, composite_gauss_legendre

FloatArray = npt.NDArray[np.float64]

MAX_PHI = 0.999
STATIONARITY_MARGIN = 1e-12


def gauss_markov_spectrum(N: float, phi: float, x: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Spectra of the Gauss-Markov noise; q and p are mirror images about x = pi/2."""
    if not 0.0 <= phi < 1.0:
        raise DomainError("phi must lie in [0, 1)", phi=phi)
    if N < 0.0:
        raise DomainError("N must be nonnegative", N=N)
    nodes = np.asarray(x, dtype=np.float64)
    scale = N * (1.0 - phi * phi)
    cos_x = np.cos(nodes)
    gq = scale / (1.0 + phi * phi - 2.0 * phi * cos_x)
    gp = scale / (1.0 + phi * phi + 2.0 * phi * cos_x)
    return gq, gp


def ar_is_stationary(coeffs: Sequence[float]) -> bool:
    """True iff every root of 1 - sum_k phi_k y^k lies strictly outside the unit circle."""
    values = np.asarray(coeffs, dtype=np.float64)
    nonzero = np.flatnonzero(values)
    if nonzero.size == 0:
        return True
    values = values[: nonzero[-1] + 1]
    polynomial = np.concatenate([-values[::-1], [1.0]])
    roots = np.roots(polynomial)
    return bool(np.all(np.abs(roots) > 1.0 + STATIONARITY_MARGIN))


def ar_spectrum(coeffs: Sequence[float], variance: float, x: npt.ArrayLike) -> FloatArray:
    """Spectrum Var / |1 - sum_k phi_k e^{ikx}|^2 of a stationary autoregressive process."""
    if not ar_is_stationary(coeffs):
        raise ModelError("autoregressive coefficients are not stationary", coeffs=list(coeffs))
    if variance < 0.0:
        raise ModelError("innovation variance must be nonnegative", variance=variance)
    nodes = np.asarray(x, dtype=np.float64)
    lags = np.arange(1, len(coeffs) + 1)
    transfer = 1.0 - np.exp(1j * np.multiply.outer(nodes, lags)) @ np.asarray(coeffs, dtype=np.float64)
    return variance / np.abs(transfer) ** 2


def mirror_p_coefficients(q_coeffs: Sequence[float]) -> list[float]:
    """p-quadrature coefficients phi_k -> (-1)^k phi_k, which maps the spectrum x -> pi - x.

    This generalizes the order-one pairing of the Gauss-Markov channel to any order.
    """
    return [(-1.0) ** (k + 1) * float(value) for k, value in enumerate(q_coeffs)]


def gm_threshold_nbar(N: float, phi: float) -> float:
    """Smallest nbar for which the Gauss-Markov channel is globally water-filled."""
    if not 0.0 <= phi < 1.0:
        raise DomainError("phi must lie in [0, 1)", phi=phi)
    return 2.0 * phi * (N + 0.5) / (1.0 - phi)


@dataclass(frozen=True, slots=True)
class SpectrumGrid:
    """Noise sampled at quadrature nodes; ``weights`` sum to one so weighted sums are means."""

    nodes: FloatArray = field(repr=False)
    weights: FloatArray = field(repr=False)
    gq: FloatArray = field(repr=False)
    gp: FloatArray = field(repr=False)
    continuous: bool = True

    @property
    def size(self) -> int:
        return int(self.nodes.size)

    def mean(self, values: npt.ArrayLike) -> float:
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))


@runtime_checkable
class NoiseModel(Protocol):
    """Anything that can be sampled into a :class:`SpectrumGrid`."""

    @property
    def kind(self) -> str: ...

    def sample(self, tol: SolverTolerances = DEFAULT_TOLERANCES) -> SpectrumGrid: ...

    def as_dict(self) -> dict[str, Any]: ...


def _continuous_grid(model: _Spectral, tol: SolverTolerances) -> SpectrumGrid:
    rule = composite_gauss_legendre(0.0, math.pi, tol.grid_size)
    gq, gp = model.spectrum(rule.nodes)
    return SpectrumGrid(nodes=rule.nodes, weights=rule.weights / math.pi, gq=gq, gp=gp)


class _Spectral(Protocol):
    def spectrum(self, x: npt.ArrayLike) -> tuple[FloatArray, FloatArray]: ...


@dataclass(frozen=True, slots=True)
class GaussMarkov:
    """Noise covariance N phi^|i-j| in q and N (-phi)^|i-j| in p."""

    N: float
    phi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.N) and self.N >= 0.0):
            raise ModelError("N must be a nonnegative finite variance", N=self.N)
        if not 0.0 <= self.phi <= MAX_PHI:
            raise ModelError(f"phi must lie in [0, {MAX_PHI}]", phi=self.phi)

    @property
    def kind(self) -> str:
        return "gauss_markov"

    def spectrum(self, x: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
        return gauss_markov_spectrum(self.N, self.phi, x)

    def sample(self, tol: SolverTolerances = DEFAULT_TOLERANCES) -> SpectrumGrid:
        return _continuous_grid(self, tol)

    @property
    def threshold_nbar(self) -> float:
        return gm_threshold_nbar(self.N, self.phi)

    def as_dict(self) -> dict[str, Any]:
        return {"type": self.kind, "N": self.N, "phi": self.phi}


@dataclass(frozen=True, slots=True)
class AutoRegressive:
    """Independent autoregressive processes for the two quadratures."""

    q_coeffs: tuple[float, ...]
    p_coeffs: tuple[float, ...]
    q_variance: float
    p_variance: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "q_coeffs", tuple(float(c) for c in self.q_coeffs))
        object.__setattr__(self, "p_coeffs", tuple(float(c) for c in self.p_coeffs))
        for name, coeffs in (("q_coeffs", self.q_coeffs), ("p_coeffs", self.p_coeffs)):
            if not ar_is_stationary(coeffs):
                raise ModelError(f"{name} describe a nonstationary process", coeffs=list(coeffs))
        if self.q_variance < 0.0 or self.p_variance < 0.0:
            raise ModelError("innovation variances must be nonnegative", q=self.q_variance, p=self.p_variance)

    @classmethod
    def mirrored(cls, coeffs: Sequence[float], variance: float) -> AutoRegressive:
        """q process with the given coefficients and the p process obtained by sign alternation."""
        return cls(tuple(coeffs), tuple(mirror_p_coefficients(coeffs)), variance, variance)

    @property
    def kind(self) -> str:
        return "ar"

    def spectrum(self, x: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
        return ar_spectrum(self.q_coeffs, self.q_variance, x), ar_spectrum(self.p_coeffs, self.p_variance, x)

    def sample(self, tol: SolverTolerances = DEFAULT_TOLERANCES) -> SpectrumGrid:
        return _continuous_grid(self, tol)

    def as_dict(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "q_coeffs": list(self.q_coeffs),
            "p_coeffs": list(self.p_coeffs),
            "q_variance": self.q_variance,
            "p_variance": self.p_variance,
        }


@dataclass(frozen=True, slots=True)
class Tabulated:
    """Spectra given at nodes on [0, pi] and interpolated piecewise linearly."""

    x: FloatArray = field(repr=False)
    gq: FloatArray = field(repr=False)
    gp: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        gq = np.asarray(self.gq, dtype=np.float64)
        gp = np.asarray(self.gp, dtype=np.float64)
        if x.ndim != 1 or x.size < 2 or gq.shape != x.shape or gp.shape != x.shape:
            raise ModelError("tabulated spectra need matching 1-D arrays of at least two nodes")
        if np.any(np.diff(x) <= 0.0):
            raise ModelError("x nodes must be strictly increasing")
        if x[0] < 0.0 or x[-1] > math.pi + 1e-12:
            raise ModelError("x nodes must lie within [0, pi]", first=float(x[0]), last=float(x[-1]))
        if np.any(gq < 0.0) or np.any(gp < 0.0) or not np.all(np.isfinite(gq) & np.isfinite(gp)):
            raise ModelError("tabulated variances must be finite and nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "gq", gq)
        object.__setattr__(self, "gp", gp)

    @property
    def kind(self) -> str:
        return "tabulated"

    def spectrum(self, x: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
        nodes = np.asarray(x, dtype=np.float64)
        return np.interp(nodes, self.x, self.gq), np.interp(nodes, self.x, self.gp)

    def sample(self, tol: SolverTolerances = DEFAULT_TOLERANCES) -> SpectrumGrid:
        return _continuous_grid(self, tol)

    def as_dict(self) -> dict[str, Any]:
        return {"type": self.kind, "x": self.x.tolist(), "gq": self.gq.tolist(), "gp": self.gp.tolist()}


@dataclass(frozen=True, slots=True)
class Modes:
    """An explicit finite list of independent modes given by their quadrature variances."""

    gq: tuple[float, ...]
    gp: tuple[float, ...]

    def __post_init__(self) -> None:
        gq = tuple(float(v) for v in self.gq)
        gp = tuple(float(v) for v in self.gp)
        if not gq or len(gq) != len(gp):
            raise ModelError("modes need matching nonempty gq and gp lists", n_q=len(gq), n_p=len(gp))
        if any(v < 0.0 or not math.isfinite(v) for v in gq + gp):
            raise ModelError("mode variances must be finite and nonnegative")
        object.__setattr__(self, "gq", gq)
        object.__setattr__(self, "gp", gp)

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[float, float]]) -> Modes:
        return cls(tuple(q for q, _ in pairs), tuple(p for _, p in pairs))

    @property
    def kind(self) -> str:
        return "modes"

    def __len__(self) -> int:
        return len(self.gq)

    def sample(self, tol: SolverTolerances = DEFAULT_TOLERANCES) -> SpectrumGrid:
        n = len(self.gq)
        return SpectrumGrid(
            nodes=np.arange(n, dtype=np.float64),
            weights=np.full(n, 1.0 / n),
            gq=np.asarray(self.gq, dtype=np.float64),
            gp=np.asarray(self.gp, dtype=np.float64),
            continuous=False,
        )

    def as_dict(self) -> dict[str, Any]:
        return {"type": self.kind, "modes": [{"gq": q, "gp": p} for q, p in zip(self.gq, self.gp, strict=True)]}
