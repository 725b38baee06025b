from __future__ import annotations

import pytest

from capwater.core.errors import DomainError, InfeasibleEnergyError, SizeError
from capwater.oracle.brute_force import (
    GridSpec,
    brute_force_finite,
    brute_force_one_mode,
    cross_term_spot_check,
)
from capwater.solvers.multi_mode import ModeEnsemble, solve_mu
from capwater.solvers.one_mode import InputEnergy, OneModeNoise, solve_one_mode

SMALL = GridSpec(gin_q_points=24, split_points=24, refine_rounds=3)


@pytest.mark.parametrize(
    ("gq", "gp", "lambda_"),
    [(2.0, 0.5, 5.0), (2.0, 0.5, 2.0), (0.3, 3.0, 1.5), (1.0, 1.0, 4.0), (2.0, 0.0, 3.0)],
)
def test_oracle_agrees_with_the_solver(gq: float, gp: float, lambda_: float) -> None:
    noise = OneModeNoise(gq, gp)
    chi, point = brute_force_one_mode(noise, lambda_)
    solved = solve_one_mode(noise, InputEnergy(lambda_)).chi
    assert chi == pytest.approx(solved, abs=1e-4)
    assert chi <= solved + 1e-6
    assert point.gin_q * point.gin_p == pytest.approx(0.25, rel=1e-12)
    assert point.gin_q + point.gin_p + point.gmod_q + point.gmod_p == pytest.approx(lambda_, rel=1e-12)
    assert 0.0 <= point.split <= 1.0


def test_oracle_reports_the_caller_orientation() -> None:
    _, straight = brute_force_one_mode(OneModeNoise(2.0, 0.5), 2.0)
    _, swapped = brute_force_one_mode(OneModeNoise(0.5, 2.0), 2.0)
    assert swapped.gin_q == pytest.approx(straight.gin_p, rel=1e-9)
    assert swapped.gmod_p == pytest.approx(straight.gmod_q, abs=1e-9)


def test_oracle_edges() -> None:
    chi, point = brute_force_one_mode(OneModeNoise(2.0, 0.5), 1.0)
    assert chi == 0.0
    assert point.split == 0.0
    with pytest.raises(DomainError):
        brute_force_one_mode(OneModeNoise(2.0, 0.5), 0.9)
    with pytest.raises(DomainError):
        GridSpec(gin_q_points=8)
    with pytest.raises(DomainError):
        GridSpec(refine_rounds=-1)


def test_finite_oracle_matches_the_common_multiplier() -> None:
    ensemble = ModeEnsemble.from_pairs([(2.0, 0.5), (1.0, 1.0)])
    oracle = brute_force_finite(ensemble, 6.0, SMALL)
    solved = solve_mu(ensemble, 6.0).c1
    assert oracle == pytest.approx(solved, abs=1e-3)
    assert oracle <= solved + 1e-6


def test_finite_oracle_limits() -> None:
    with pytest.raises(SizeError):
        brute_force_finite(ModeEnsemble.from_pairs([(1.0, 1.0)] * 3), 6.0)
    with pytest.raises(InfeasibleEnergyError):
        brute_force_finite(ModeEnsemble.from_pairs([(1.0, 1.0), (2.0, 0.5)]), 1.5)
    single = brute_force_finite(ModeEnsemble.from_pairs([(2.0, 0.5)]), 3.0, SMALL)
    assert single == pytest.approx(brute_force_one_mode(OneModeNoise(2.0, 0.5), 3.0, SMALL)[0])


@pytest.mark.parametrize("lambda_", [2.0, 5.0])
def test_cross_terms_do_not_beat_the_diagonal_optimum(lambda_: float) -> None:
    noise = OneModeNoise(2.0, 0.5)
    report = cross_term_spot_check(noise, lambda_)
    assert report.gain >= 0.0
    assert report.with_cross_terms <= solve_one_mode(noise, InputEnergy(lambda_)).chi + 1e-9


def test_cross_term_check_arguments() -> None:
    assert cross_term_spot_check(OneModeNoise(2.0, 0.5), 1.0).gain == 0.0
    with pytest.raises(DomainError):
        cross_term_spot_check(OneModeNoise(2.0, 0.5), 3.0, points=7)


@pytest.mark.parametrize(("gq", "gp", "lambda_"), [(2.0, 0.5, 5.0), (2.0, 0.5, 2.0), (0.5, 2.0, 8.0)])
def test_oracle_argmax_sits_next_to_the_analytic_input(gq: float, gp: float, lambda_: float) -> None:
    noise = OneModeNoise(gq, gp)
    _, point = brute_force_one_mode(noise, lambda_)
    solution = solve_one_mode(noise, InputEnergy(lambda_))
    assert point.gin_q_step > 0.0
    assert abs(point.gin_q - solution.gin_q) <= 2.0 * point.gin_q_step
