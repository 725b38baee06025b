"""End-to-end numerical checks of the capacity solvers against known values and the oracle."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from capwater.core.special import g
from capwater.models import GaussMarkov
from capwater.oracle import (
    brute_force_finite,
    brute_force_one_mode,
    concavity_probe,
    hessian_check,
    stationarity_residuals,
)
from capwater.solvers import (
    InputEnergy,
    ModeEnsemble,
    OneModeNoise,
    Regime,
    capacity_spectral,
    diagonalize_noise,
    entanglement_witness,
    gain_sweep,
    gauss_markov_blocks,
    lambda_threshold,
    modulated_output_covariance,
    solve_mu,
    solve_mu_spectral,
    solve_one_mode,
    two_mode_gain,
)

pytestmark = pytest.mark.integration

CORRELATED = GaussMarkov(N=1.0, phi=0.85)


@pytest.mark.parametrize(("lambda_", "mu"), [(1.006, 1.45), (1.04, 1.34), (3.0, 0.42), (35.0, 0.04)])
def test_multiplier_of_correlated_noise(lambda_: float, mu: float) -> None:
    solution = solve_mu_spectral(CORRELATED, 0.5 * (lambda_ - 1.0))
    assert solution.mu == pytest.approx(mu, abs=0.01)


def test_multiplier_at_the_threshold() -> None:
    assert solve_mu_spectral(CORRELATED, 17.0).mu == pytest.approx(0.03896, abs=1e-4)


@pytest.mark.parametrize("N", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("nbar", [0.1, 1.0, 10.0])
def test_memoryless_reduction(N: float, nbar: float) -> None:
    assert capacity_spectral(GaussMarkov(N=N, phi=0.0), nbar) == pytest.approx(g(nbar + N) - g(N), abs=1e-9)


def test_capacity_grows_with_correlation() -> None:
    phis = [0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.99]
    capacities = [capacity_spectral(GaussMarkov(N=1.0, phi=phi), 1.0) for phi in phis]
    assert all(later > earlier for earlier, later in zip(capacities, capacities[1:], strict=False))
    assert capacities[-1] < g(1.0)


def _random_instances(rng: np.random.Generator, count: int) -> list[tuple[float, float, float]]:
    gq = rng.uniform(0.05, 5.0, count)
    gp = rng.uniform(0.05, 5.0, count)
    lambdas = rng.uniform(1.05, 20.0, count)
    return list(zip(gq.tolist(), gp.tolist(), lambdas.tolist(), strict=True))


def test_one_mode_solver_matches_the_oracle(rng: np.random.Generator) -> None:
    for gq, gp, lambda_ in _random_instances(rng, 50):
        noise = OneModeNoise(gq, gp)
        solved = solve_one_mode(noise, InputEnergy(lambda_)).chi
        oracle, _ = brute_force_one_mode(noise, lambda_)
        assert abs(solved - oracle) <= 1e-4, (gq, gp, lambda_)
        assert oracle <= solved + 1e-6, (gq, gp, lambda_)


def test_two_mode_solver_matches_the_oracle(rng: np.random.Generator) -> None:
    for _ in range(10):
        pairs = rng.uniform(0.05, 5.0, (2, 2)).tolist()
        lambda_ = float(rng.uniform(2.1, 20.0))
        ensemble = ModeEnsemble.from_pairs([(q, p) for q, p in pairs])
        solved = solve_mu(ensemble, lambda_).c1
        oracle = brute_force_finite(ensemble, lambda_)
        assert abs(solved - oracle) <= 1e-4, (pairs, lambda_)


def test_gain_stays_in_its_band() -> None:
    nbars = np.geomspace(0.1, 50.0, 40).tolist()
    with ThreadPoolExecutor() as pool:
        points = gain_sweep([1.0, 3.0, 10.0], [0.0, 0.5, 0.85, 0.99], nbars, mapper=pool.map)
    assert all(1.0 - 1e-9 <= point.gain <= 1.12 for point in points)
    assert max(point.gain for point in points) > 1.0
    uncorrelated = [point.gain for point in points if point.phi == 0.0]
    assert uncorrelated == pytest.approx([1.0] * len(uncorrelated), abs=1e-9)


def test_optimality_conditions(rng: np.random.Generator) -> None:
    for gq, gp, lambda_ in _random_instances(rng, 25):
        noise = OneModeNoise(gq, gp)
        solution = solve_one_mode(noise, InputEnergy(lambda_))
        if solution.regime is Regime.WATER_FILLING:
            assert stationarity_residuals(noise, solution).max_abs <= 1e-8
        if solution.regime is not Regime.VACUUM:
            assert hessian_check(noise, solution).negative_definite
        report = concavity_probe(noise, np.linspace(1.05, 2.0 * lambda_threshold(noise), 200))
        assert len(report.lambdas) == 200
        assert report.passed


def test_solution_invariants(rng: np.random.Generator) -> None:
    for gq, gp, lambda_ in _random_instances(rng, 40):
        noise = OneModeNoise(gq, gp)
        solution = solve_one_mode(noise, InputEnergy(lambda_))
        assert solution.gin_q * solution.gin_p == pytest.approx(0.25, rel=1e-12)
        assert solution.energy == pytest.approx(lambda_, rel=1e-10)
        assert min(solution.gmod_q, solution.gmod_p) >= 0.0
        assert solution.chi >= 0.0
        above = lambda_ >= lambda_threshold(noise)
        assert (solution.regime is Regime.WATER_FILLING) == above or noise.symmetric


def test_optimal_input_state() -> None:
    det0, entangled = entanglement_witness(0.85)
    assert entangled
    assert det0 > 0.25
    assert not entanglement_witness(0.0)[1]
    covariance = modulated_output_covariance(CORRELATED, 20.0)
    assert covariance.certified
    assert covariance.value == pytest.approx(21.5)


@pytest.mark.parametrize(("N", "phi", "nbar"), [(1.0, 0.5, 1.0), (2.0, 0.85, 0.3), (0.5, 0.2, 5.0)])
def test_two_mode_pair_halves_the_ensemble_capacity(N: float, phi: float, nbar: float) -> None:
    ensemble, _ = diagonalize_noise(gauss_markov_blocks(N, phi))
    total = solve_mu(ensemble, 2.0 * (2.0 * nbar + 1.0)).c1
    assert two_mode_gain(N, phi, nbar).capacity == pytest.approx(0.5 * total, abs=1e-10)
    assert not math.isnan(total)


def test_capacity_falls_with_noise_power() -> None:
    noise_powers = [0.25, 0.5, 1.0, 2.0, 4.0]
    for phi in (0.0, 0.3, 0.5, 0.7, 0.9):
        capacities = [capacity_spectral(GaussMarkov(N=N, phi=phi), 1.0) for N in noise_powers]
        assert all(later < earlier for earlier, later in zip(capacities, capacities[1:]))
