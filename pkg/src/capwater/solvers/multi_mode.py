"""Finite number of modes with block-diagonalizable noise.

The modes share one Lagrange multiplier mu. Each mode falls into the vacuum set N1, the
single-quadrature set N2 or the water-filling set N3 depending on mu, and mu is fixed by the
total energy budget.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field, replace

import numpy as np
import numpy.typing as npt
from loguru import logger
from scipy.linalg import circulant, eigh

from capwater.core.errors import ConvergenceError, DomainError, InfeasibleEnergyError, ModelError
from capwater.core.numerics import DEFAULT_TOLERANCES, SolverTolerances
from capwater.models.noise import Modes, NoiseModel

from .one_mode import (
    InputEnergy,
    OneModeNoise,
    OneModeSolution,
    Regime,
    energies_for_mu,
    solve_for_mu,
    solve_one_mode,
    threshold_multipliers,
)

FloatArray = npt.NDArray[np.float64]

MU_FLOOR = 1e-12
MU_CEILING = 40.0
COMMUTATOR_TOL = 1e-8
DEGENERACY_TOL = 1e-9
IDENTICAL_RTOL = 1e-12
IDENTICAL_ATOL = 1e-14


@dataclass(frozen=True, slots=True)
class ModeEnsemble:
    """Ordered independent modes after diagonalization."""

    modes: tuple[OneModeNoise, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise ModelError("a mode ensemble needs at least one mode")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> ModeEnsemble:
        return cls(tuple(OneModeNoise(float(q), float(p)) for q, p in pairs))

    @classmethod
    def from_model(cls, model: Modes) -> ModeEnsemble:
        return cls.from_pairs(zip(model.gq, model.gp, strict=True))

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def gq(self) -> FloatArray:
        """q variances in the caller's orientation."""
        return np.array([mode.oriented()[0] for mode in self.modes], dtype=np.float64)

    @property
    def gp(self) -> FloatArray:
        return np.array([mode.oriented()[1] for mode in self.modes], dtype=np.float64)

    def to_model(self) -> Modes:
        return Modes(tuple(self.gq.tolist()), tuple(self.gp.tolist()))


@dataclass(frozen=True, slots=True)
class BlockNoise:
    """Quadrature noise covariance blocks of n correlated modes without q-p cross terms."""

    q_block: FloatArray = field(repr=False)
    p_block: FloatArray = field(repr=False)

    def __post_init__(self) -> None:
        q = np.asarray(self.q_block, dtype=np.float64)
        p = np.asarray(self.p_block, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape != p.shape:
            raise ModelError("noise blocks must be square matrices of equal size", q=q.shape, p=p.shape)
        scale = max(1.0, float(np.max(np.abs(q))), float(np.max(np.abs(p))))
        for name, block in (("q_block", q), ("p_block", p)):
            if not np.allclose(block, block.T, atol=1e-12 * scale, rtol=0.0):
                raise ModelError(f"{name} is not symmetric")
            if float(np.min(np.linalg.eigvalsh(block))) < -1e-10 * scale:
                raise ModelError(f"{name} is not positive semidefinite")
        object.__setattr__(self, "q_block", q)
        object.__setattr__(self, "p_block", p)

    @property
    def size(self) -> int:
        return int(self.q_block.shape[0])

    @property
    def commutator_norm(self) -> float:
        commutator = self.q_block @ self.p_block - self.p_block @ self.q_block
        return float(np.linalg.norm(commutator))


@dataclass(frozen=True, slots=True)
class Partition:
    """Mode indices split into the vacuum, single-quadrature and water-filling sets."""

    n1: tuple[int, ...]
    n2: tuple[int, ...]
    n3: tuple[int, ...]

    @property
    def is_global_water_filling(self) -> bool:
        return not self.n1 and not self.n2

    def label(self, index: int) -> str:
        if index in self.n1:
            return "N1"
        if index in self.n2:
            return "N2"
        return "N3"


@dataclass(frozen=True, slots=True)
class MultiModeSolution:
    mu: float
    per_mode: tuple[OneModeSolution, ...]
    partition: Partition
    c1: float
    lambda_: float

    @property
    def c1_per_mode(self) -> float:
        return self.c1 / len(self.per_mode)

    @property
    def energy_used(self) -> float:
        return math.fsum(solution.energy for solution in self.per_mode)


def diagonalize_noise(noise: BlockNoise) -> tuple[ModeEnsemble, FloatArray]:
    """Joint eigenbasis of commuting blocks; mode i pairs the q and p eigenvalues of vector i."""
    norm = noise.commutator_norm
    scale = max(1.0, float(np.linalg.norm(noise.q_block)) * float(np.linalg.norm(noise.p_block)))
    if norm > COMMUTATOR_TOL * scale:
        raise ModelError("noise blocks do not commute", commutator_norm=norm)

    q_values, basis = eigh(noise.q_block)
    spread = max(1.0, float(np.max(np.abs(q_values))))
    start = 0
    while start < q_values.size:
        stop = start + 1
        while stop < q_values.size and q_values[stop] - q_values[start] <= DEGENERACY_TOL * spread:
            stop += 1
        if stop - start > 1:
            sub = basis[:, start:stop]
            _, rotation = eigh(sub.T @ noise.p_block @ sub)
            basis[:, start:stop] = sub @ rotation
        start = stop

    q_diag = basis.T @ noise.q_block @ basis
    p_diag = basis.T @ noise.p_block @ basis
    off = max(
        float(np.max(np.abs(q_diag - np.diag(np.diag(q_diag))))),
        float(np.max(np.abs(p_diag - np.diag(np.diag(p_diag))))),
    )
    if off > COMMUTATOR_TOL * spread:
        raise ModelError("blocks could not be diagonalized jointly", off_diagonal=off)
    pairs = zip(np.clip(np.diag(q_diag), 0.0, None), np.clip(np.diag(p_diag), 0.0, None), strict=True)
    return ModeEnsemble.from_pairs(pairs), basis


def gauss_markov_blocks(N: float, phi: float) -> BlockNoise:
    """Two correlated Gauss-Markov modes: N [[1, phi], [phi, 1]] and N [[1, -phi], [-phi, 1]]."""
    if not 0.0 <= phi < 1.0:
        raise DomainError("phi must lie in [0, 1)", phi=phi)
    return BlockNoise(
        q_block=N * np.array([[1.0, phi], [phi, 1.0]]),
        p_block=N * np.array([[1.0, -phi], [-phi, 1.0]]),
    )


def circulant_blocks(model: NoiseModel, n: int) -> BlockNoise:
    """Circulant approximation of the Toeplitz noise of n modes.

    Its eigenvalues are the spectra sampled at x = 2 pi m / n, so the blocks always commute.
    """
    spectrum = getattr(model, "spectrum", None)
    if spectrum is None:
        raise ModelError("circulant blocks need a continuous spectral model", kind=model.kind)
    if n < 1:
        raise DomainError("n must be positive", n=n)
    x = 2.0 * np.pi * np.arange(n) / n
    folded = np.where(x > np.pi, 2.0 * np.pi - x, x)
    gq, gp = spectrum(folded)
    q_column = np.real(np.fft.ifft(gq))
    p_column = np.real(np.fft.ifft(gp))
    return BlockNoise(q_block=circulant(q_column), p_block=circulant(p_column))


def classify_modes(ensemble: ModeEnsemble, mu: float) -> Partition:
    if mu <= 0.0:
        raise DomainError("the multiplier must be positive", mu=mu)
    mu_thr, mu_0 = threshold_multipliers(ensemble.gq, ensemble.gp)
    n1 = tuple(int(i) for i in np.flatnonzero(mu >= mu_0))
    n3 = tuple(int(i) for i in np.flatnonzero((mu < mu_0) & (mu <= mu_thr)))
    taken = set(n1) | set(n3)
    n2 = tuple(i for i in range(len(ensemble)) if i not in taken)
    return Partition(n1=n1, n2=n2, n3=n3)


def total_input_energy(ensemble: ModeEnsemble, mu: float, tol: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Energy sum_i lambda_i(mu) drawn by all modes at the multiplier mu."""
    profile = energies_for_mu(ensemble.gq, ensemble.gp, mu, tol)
    return math.fsum(profile.lambda_.tolist())


def upper_multiplier(gq: npt.ArrayLike, gp: npt.ArrayLike) -> float:
    """Smallest multiplier at which every mode is left in vacuum.

    Noiseless symmetric modes never switch off completely; their energy above the vacuum floor
    is below 1e-24 at the ceiling used for them.
    """
    _, mu_0 = threshold_multipliers(gq, gp)
    finite = mu_0[np.isfinite(mu_0)]
    if finite.size == mu_0.size:
        return float(np.max(mu_0))
    return max(MU_CEILING, float(np.max(finite)) if finite.size else 0.0)


def energy_slack(lambda_: float) -> float:
    return max(1e-8, 1e-10 * lambda_)


def bisect_multiplier(
    energy: Callable[[float], float],
    target: float,
    mu_hi: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> float:
    """Multiplier at which the decreasing function ``energy`` meets ``target``.

    Stops once the bracket is narrower than ``tol.mu_tol`` and the energy is within the slack,
    or when the bracket can no longer be halved.
    """
    slack = energy_slack(target)
    lo, hi = MU_FLOOR, mu_hi
    for iteration in range(tol.max_iter):
        mu = 0.5 * (lo + hi)
        used = energy(mu)
        if (abs(used - target) <= slack and hi - lo <= tol.mu_tol) or mu in (lo, hi):
            logger.debug("multiplier {:.12g} after {} iterations (energy {:.12g})", mu, iteration + 1, used)
            return mu
        if used > target:
            lo = mu
        else:
            hi = mu
    raise ConvergenceError("multiplier bisection hit the iteration cap", lo=lo, hi=hi, target=target)


def _identical(modes: Sequence[OneModeNoise]) -> bool:
    first = modes[0]
    return all(
        math.isclose(mode.gq, first.gq, rel_tol=IDENTICAL_RTOL, abs_tol=IDENTICAL_ATOL)
        and math.isclose(mode.gp, first.gp, rel_tol=IDENTICAL_RTOL, abs_tol=IDENTICAL_ATOL)
        for mode in modes[1:]
    )


def _assemble(
    mu: float,
    solutions: Sequence[OneModeSolution],
    ensemble: ModeEnsemble,
    lambda_: float,
) -> MultiModeSolution:
    # vacuum modes report the common multiplier, not their own mu_0
    solutions = [replace(s, mu=mu) if s.regime is Regime.VACUUM else s for s in solutions]
    partition = classify_modes(ensemble, mu)
    c1 = math.fsum(solution.chi for solution in solutions)
    return MultiModeSolution(mu=mu, per_mode=tuple(solutions), partition=partition, c1=c1, lambda_=lambda_)


def solve_mu(
    ensemble: ModeEnsemble,
    lambda_: float,
    tol: SolverTolerances = DEFAULT_TOLERANCES,
) -> MultiModeSolution:
    """Distribute the total energy ``lambda_`` over the ensemble at a common multiplier."""
    n = len(ensemble)
    if math.isnan(lambda_) or lambda_ < n * (1.0 - 1e-12):
        raise InfeasibleEnergyError("energy is below the vacuum floor of the ensemble", lambda_=lambda_, n=n)

    if _identical(ensemble.modes):
        share = InputEnergy(lambda_ / n)
        solutions = [solve_one_mode(mode, share, tol) for mode in ensemble.modes]
        return _assemble(solutions[0].mu, solutions, ensemble, lambda_)

    mu_hi = upper_multiplier(ensemble.gq, ensemble.gp)
    if lambda_ <= n + energy_slack(lambda_):
        solutions = [solve_for_mu(mode, mu_hi, tol)[1] for mode in ensemble.modes]
        return _assemble(mu_hi, solutions, ensemble, lambda_)

    mu = bisect_multiplier(lambda m: total_input_energy(ensemble, m, tol), lambda_, mu_hi, tol)
    logger.debug("solve_mu: n={} lambda={:.6g} mu={:.12g}", n, lambda_, mu)

    partition = classify_modes(ensemble, mu)
    if partition.is_global_water_filling:
        level = (lambda_ + math.fsum((ensemble.gq + ensemble.gp).tolist())) / (2.0 * n)
        solutions = [solve_one_mode(mode, InputEnergy(2.0 * level - mode.gq - mode.gp), tol) for mode in ensemble.modes]
        return _assemble(solutions[0].mu, solutions, ensemble, lambda_)

    solutions = [solve_for_mu(mode, mu, tol)[1] for mode in ensemble.modes]
    return _assemble(mu, solutions, ensemble, lambda_)
