from __future__ import annotations

import math

import numpy as np
import pytest

from capwater.core.errors import DomainError, RegimeError
from capwater.core.numerics import DEFAULT_TOLERANCES, SolverTolerances
from capwater.core.special import g
from capwater.models import AutoRegressive, GaussMarkov, Modes
from capwater.solvers.multi_mode import ModeEnsemble, solve_mu
from capwater.solvers.spectral import (
    capacity_global_wf,
    capacity_spectral,
    classify_spectrum,
    gm_capacity_closed_form,
    noiseless_capacity,
    solve_global_wf,
    solve_mu_spectral,
    spectral_threshold_nbar,
    threshold_profiles,
)

CORRELATED = GaussMarkov(N=1.0, phi=0.85)


@pytest.mark.parametrize("nbar", [0.0, 0.3, 1.0, 4.0])
def test_memoryless_channel(nbar: float) -> None:
    assert capacity_spectral(GaussMarkov(N=1.0, phi=0.0), nbar) == pytest.approx(g(nbar + 1.0) - g(1.0), abs=1e-9)


def test_noiseless_capacity() -> None:
    assert noiseless_capacity(1.0) == pytest.approx(2.0, abs=1e-12)


def test_threshold_nbar() -> None:
    assert spectral_threshold_nbar(CORRELATED) == pytest.approx(17.0, rel=1e-12)
    assert spectral_threshold_nbar(GaussMarkov(N=1.0, phi=0.5)) == pytest.approx(3.0, rel=1e-12)
    mirrored = AutoRegressive.mirrored([0.85], 1.0 - 0.85**2)
    assert spectral_threshold_nbar(mirrored) == pytest.approx(17.0, rel=1e-6)
    assert spectral_threshold_nbar(Modes.from_pairs([(1.5, 0.5), (0.5, 1.5)])) == pytest.approx(
        0.5 * math.sqrt(3.0), rel=1e-12
    )
    assert spectral_threshold_nbar(Modes.from_pairs([(1.0, 0.0), (1.0, 1.0)])) == math.inf


def test_classify_spectrum() -> None:
    _, mu_thr, _ = threshold_profiles(CORRELATED)
    assert set(classify_spectrum(CORRELATED, 0.5 * float(np.min(mu_thr)))) == {"N3"}

    labels = classify_spectrum(CORRELATED, 0.42)
    assert labels[0] == "N2"
    assert labels[-1] == "N2"
    assert labels[labels.size // 2] == "N3"
    with pytest.raises(DomainError):
        classify_spectrum(CORRELATED, 0.0)


def test_spectral_solution_meets_the_energy() -> None:
    solution = solve_mu_spectral(CORRELATED, 1.0)
    assert solution.grid.mean(solution.lambda_) == pytest.approx(3.0, abs=1e-7)
    assert not solution.rate_is_global_wf
    fractions = solution.set_fractions()
    assert math.fsum(fractions.values()) == pytest.approx(1.0, abs=1e-12)
    assert fractions["N2"] > 0.0
    assert fractions["N3"] > 0.0
    np.testing.assert_allclose(solution.gin_q * solution.gin_p, 0.25, atol=1e-12)
    assert 0.0 < solution.capacity < noiseless_capacity(1.0)


def test_water_filled_nodes_share_one_level() -> None:
    solution = solve_mu_spectral(CORRELATED, 1.0)
    filled = solution.set_index == 3
    levels = solution.gbar_q[filled]
    np.testing.assert_allclose(levels, levels[0], rtol=1e-8)
    np.testing.assert_allclose(solution.gbar_p[filled], levels[0], rtol=1e-8)


def test_vacuum_input_has_zero_capacity() -> None:
    solution = solve_mu_spectral(CORRELATED, 0.0)
    assert solution.capacity == pytest.approx(0.0, abs=1e-12)
    assert capacity_spectral(CORRELATED, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_global_water_filling_above_threshold() -> None:
    solution = solve_mu_spectral(CORRELATED, 25.0)
    assert solution.rate_is_global_wf
    level = 25.0 + 0.5 + 1.0
    assert solution.mu == pytest.approx(0.5 * math.log2((level + 0.5) / (level - 0.5)), rel=1e-10)
    assert solution.capacity == pytest.approx(gm_capacity_closed_form(1.0, 0.85, 25.0), abs=1e-9)
    assert solve_global_wf(CORRELATED, 25.0).capacity == pytest.approx(solution.capacity, abs=1e-12)


def test_solver_meets_the_closed_form_at_the_threshold() -> None:
    solution = solve_mu_spectral(CORRELATED, 17.0)
    assert solution.capacity == pytest.approx(gm_capacity_closed_form(1.0, 0.85, 17.0), abs=1e-6)


def test_closed_forms_need_the_global_regime() -> None:
    with pytest.raises(RegimeError):
        gm_capacity_closed_form(1.0, 0.85, 1.0)
    with pytest.raises(RegimeError):
        capacity_global_wf(CORRELATED, 1.0)
    with pytest.raises(RegimeError):
        solve_global_wf(CORRELATED, 16.0)


def test_autoregressive_order_one_matches_gauss_markov() -> None:
    mirrored = AutoRegressive.mirrored([0.5], 0.75)
    expected = capacity_spectral(GaussMarkov(N=1.0, phi=0.5), 1.0)
    assert capacity_spectral(mirrored, 1.0) == pytest.approx(expected, abs=1e-8)


def test_finite_modes_average_the_per_mode_capacity() -> None:
    pairs = [(1.5, 0.5), (0.5, 1.5)]
    nbar = 0.5
    spectral = capacity_spectral(Modes.from_pairs(pairs), nbar)
    finite = solve_mu(ModeEnsemble.from_pairs(pairs), 2.0 * (2.0 * nbar + 1.0))
    assert spectral == pytest.approx(finite.c1 / 2.0, abs=1e-7)


def test_negative_nbar() -> None:
    with pytest.raises(DomainError):
        solve_mu_spectral(CORRELATED, -0.1)
    with pytest.raises(DomainError):
        capacity_spectral(CORRELATED, -0.1)


def test_coarse_grid_warns_near_unit_correlation(coarse_tol: SolverTolerances, captured_warnings: list[str]) -> None:
    threshold_profiles(GaussMarkov(N=1.0, phi=0.99), coarse_tol)
    assert any("resolves the noise peak" in message for message in captured_warnings)


def test_moderate_correlation_does_not_warn(coarse_tol: SolverTolerances, captured_warnings: list[str]) -> None:
    threshold_profiles(CORRELATED, coarse_tol)
    assert captured_warnings == []


@pytest.mark.parametrize(("phi", "nbar"), [(0.5, 1.0), (0.85, 4.0), (0.9, 2.0)])
def test_capacity_is_stable_under_grid_refinement(phi: float, nbar: float) -> None:
    model = GaussMarkov(N=1.0, phi=phi)
    coarse = capacity_spectral(model, nbar, DEFAULT_TOLERANCES.with_grid_size(1024))
    fine = capacity_spectral(model, nbar, DEFAULT_TOLERANCES.with_grid_size(2048))
    assert abs(coarse - fine) < 1e-5


def test_input_spectra_are_mirror_images() -> None:
    solution = solve_mu_spectral(CORRELATED, 1.0)
    assert set(classify_spectrum(CORRELATED, solution.mu)) >= {"N2", "N3"}
    np.testing.assert_allclose(solution.grid.nodes + solution.grid.nodes[::-1], math.pi, atol=1e-12)
    np.testing.assert_allclose(solution.gin_q, solution.gin_p[::-1], atol=1e-10)
    np.testing.assert_allclose(solution.gmod_q, solution.gmod_p[::-1], atol=1e-10)
