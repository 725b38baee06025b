"""Optimal input covariance in the original correlated basis.

The Toeplitz blocks of the input covariance are asymptotically diagonal in the Fourier basis, so
their k-th diagonals are the cosine coefficients of the input spectra. Spectra on [0, pi] are
extended evenly to [0, 2 pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from loguru import logger

from capwater.core.errors import DomainError, ModelError, RegimeError
from capwater.core.numerics import DEFAULT_TOLERANCES, SolverTolerances, integrate
from capwater.models.noise import GaussMarkov, gm_threshold_nbar

from .spectral import SpectralSolution, solve_global_wf

FloatArray = npt.NDArray[np.float64]

DEFAULT_K_MAX = 64
PURE_DETERMINANT = 0.25
WITNESS_MARGIN = 1e-10
CERTIFICATE_TOL = 1e-10


@dataclass(frozen=True, slots=True)
class ToeplitzCovariance:
    """Diagonals k = 0..k_max of the q and p input covariance blocks."""

    q_diagonals: FloatArray = field(repr=False)
    p_diagonals: FloatArray = field(repr=False)
    truncation_error: float = 0.0

    def __post_init__(self) -> None:
        if self.q_diagonals.shape != self.p_diagonals.shape or self.q_diagonals.size == 0:
            raise DomainError("q and p diagonals must be nonempty and of equal length")
        if self.q_diagonals[0] * self.p_diagonals[0] < PURE_DETERMINANT - 1e-9:
            raise DomainError(
                "reduced single-mode covariance violates the uncertainty relation",
                q0=float(self.q_diagonals[0]),
                p0=float(self.p_diagonals[0]),
            )

    @property
    def k_max(self) -> int:
        return int(self.q_diagonals.size - 1)

    @property
    def det0(self) -> float:
        return float(self.q_diagonals[0] * self.p_diagonals[0])

    def block(self, n: int) -> tuple[FloatArray, FloatArray]:
        """n x n symmetric Toeplitz q and p blocks built from the stored diagonals."""
        lags = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        if n - 1 > self.k_max:
            raise DomainError("block larger than the stored diagonals", n=n, k_max=self.k_max)
        return self.q_diagonals[lags], self.p_diagonals[lags]

    def rows(self) -> list[dict[str, float]]:
        return [
            {"k": float(k), "q": float(q), "p": float(p)}
            for k, (q, p) in enumerate(zip(self.q_diagonals, self.p_diagonals, strict=True))
        ]


def cosine_coefficients(nodes: FloatArray, weights: FloatArray, values: FloatArray, k_max: int) -> FloatArray:
    """(1/pi) int_0^pi cos(k x) f(x) dx for k = 0..k_max with normalized weights."""
    ks = np.arange(k_max + 1)
    return np.cos(np.multiply.outer(ks, nodes)) @ (weights * values)


def reconstruct(coefficients: FloatArray, x: npt.ArrayLike) -> FloatArray:
    """Truncated Fourier series f(x) = c_0 + 2 sum_k c_k cos(k x)."""
    nodes = np.asarray(x, dtype=np.float64)
    ks = np.arange(1, coefficients.size)
    return coefficients[0] + 2.0 * np.cos(np.multiply.outer(nodes, ks)) @ coefficients[1:]


def input_fourier_coefficients(solution: SpectralSolution, k_max: int = DEFAULT_K_MAX) -> ToeplitzCovariance:
    if k_max < 0:
        raise DomainError("k_max must be nonnegative", k_max=k_max)
    grid = solution.grid
    if not grid.continuous:
        raise ModelError("Fourier coefficients need a continuous spectral model")
    q = cosine_coefficients(grid.nodes, grid.weights, solution.gin_q, k_max)
    p = cosine_coefficients(grid.nodes, grid.weights, solution.gin_p, k_max)
    residual = max(
        float(np.max(np.abs(reconstruct(q, grid.nodes) - solution.gin_q) / solution.gin_q)),
        float(np.max(np.abs(reconstruct(p, grid.nodes) - solution.gin_p) / solution.gin_p)),
    )
    logger.debug("input covariance truncated at k={} with relative error {:.3e}", k_max, residual)
    return ToeplitzCovariance(q_diagonals=q, p_diagonals=p, truncation_error=residual)


def gm_global_wf_input(phi: float, k: int, tol: SolverTolerances = DEFAULT_TOLERANCES) -> tuple[float, float]:
    """k-th diagonals of the water-filled Gauss-Markov input covariance; independent of N."""
    if not 0.0 <= phi < 1.0:
        raise DomainError("phi must lie in [0, 1)", phi=phi)
    if k < 0:
        raise DomainError("k must be nonnegative", k=k)

    def gin_q(x: FloatArray) -> FloatArray:
        cos_x = np.cos(x)
        ratio = (1.0 + phi * phi + 2.0 * phi * cos_x) / (1.0 + phi * phi - 2.0 * phi * cos_x)
        return 0.5 * np.cos(k * x) * np.sqrt(ratio)

    q = integrate(gin_q, 0.0, math.pi, tol) / math.pi
    return q, (-1.0) ** k * q


def entanglement_witness(
    source: float | SpectralSolution | ToeplitzCovariance,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> tuple[float, bool]:
    """Determinant of the reduced single-mode input covariance and whether it flags entanglement.

    A pure global state whose single-mode reductions are mixed (det > 1/4) is entangled. A float
    argument is read as the Gauss-Markov correlation phi in the water-filling regime.
    """
    if isinstance(source, ToeplitzCovariance):
        det0 = source.det0
    elif isinstance(source, SpectralSolution):
        det0 = input_fourier_coefficients(source, 0).det0
    else:
        q0, p0 = gm_global_wf_input(float(source), 0, tol)
        det0 = q0 * p0
    return det0, det0 > PURE_DETERMINANT + WITNESS_MARGIN


@dataclass(frozen=True, slots=True)
class ScalarCovariance:
    """Covariance proportional to the identity, with the largest off-diagonal found."""

    value: float
    max_offdiagonal: float

    @property
    def certified(self) -> bool:
        return self.max_offdiagonal < CERTIFICATE_TOL


def modulated_output_covariance(
    model: GaussMarkov,
    nbar: float,
    k_max: int = 8,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> ScalarCovariance:
    """Overall output covariance in the water-filling regime: (nbar + N + 1/2) times the identity."""
    threshold = gm_threshold_nbar(model.N, model.phi)
    if nbar < threshold * (1.0 - 1e-12):
        raise RegimeError("the output is not water-filled below the threshold", nbar=nbar, threshold=threshold)
    solution = solve_global_wf(model, nbar, tol)
    grid = solution.grid
    q = cosine_coefficients(grid.nodes, grid.weights, solution.gbar_q, k_max)
    p = cosine_coefficients(grid.nodes, grid.weights, solution.gbar_p, k_max)
    off = float(max(np.max(np.abs(q[1:]), initial=0.0), np.max(np.abs(p[1:]), initial=0.0)))
    value = nbar + model.N + 0.5
    if off >= CERTIFICATE_TOL or abs(q[0] - value) > CERTIFICATE_TOL * max(1.0, value):
        logger.warning("output covariance is not scalar to {:.1e}: off-diagonal {:.3e}", CERTIFICATE_TOL, off)
    return ScalarCovariance(value=value, max_offdiagonal=off)
