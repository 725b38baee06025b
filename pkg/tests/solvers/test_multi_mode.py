from __future__ import annotations

import math

import numpy as np
import pytest

from capwater.core.errors import InfeasibleEnergyError, ModelError
from capwater.core.numerics import DEFAULT_TOLERANCES
from capwater.models import GaussMarkov, Modes, gauss_markov_spectrum
from capwater.solvers.multi_mode import (
    BlockNoise,
    ModeEnsemble,
    Partition,
    circulant_blocks,
    classify_modes,
    diagonalize_noise,
    gauss_markov_blocks,
    solve_mu,
    total_input_energy,
    upper_multiplier,
)
from capwater.solvers.one_mode import InputEnergy, OneModeNoise, Regime, solve_one_mode

MIXED = [(2.0, 0.5), (1.0, 1.0), (3.0, 0.1), (0.2, 0.8)]


def test_ensemble_keeps_caller_orientation() -> None:
    ensemble = ModeEnsemble.from_pairs([(0.5, 2.0), (1.0, 1.0)])
    np.testing.assert_allclose(ensemble.gq, [0.5, 1.0])
    np.testing.assert_allclose(ensemble.gp, [2.0, 1.0])
    assert ensemble.to_model() == Modes((0.5, 1.0), (2.0, 1.0))
    assert len(ModeEnsemble.from_model(Modes.from_pairs(MIXED))) == 4
    with pytest.raises(ModelError):
        ModeEnsemble(())


def test_block_validation() -> None:
    with pytest.raises(ModelError):
        BlockNoise(np.eye(2), np.eye(3))
    with pytest.raises(ModelError):
        BlockNoise(np.array([[1.0, 0.2], [0.0, 1.0]]), np.eye(2))
    with pytest.raises(ModelError):
        BlockNoise(np.array([[1.0, 2.0], [2.0, 1.0]]), np.eye(2))


def test_gauss_markov_pair_diagonalizes_to_mirrored_modes() -> None:
    ensemble, basis = diagonalize_noise(gauss_markov_blocks(1.0, 0.5))
    pairs = sorted(zip(ensemble.gq.tolist(), ensemble.gp.tolist(), strict=True))
    np.testing.assert_allclose(pairs, [[0.5, 1.5], [1.5, 0.5]], atol=1e-12)
    np.testing.assert_allclose(basis.T @ basis, np.eye(2), atol=1e-12)


def test_noncommuting_blocks_are_rejected() -> None:
    noise = BlockNoise(np.array([[1.0, 0.5], [0.5, 1.0]]), np.diag([2.0, 1.0]))
    assert noise.commutator_norm > 0.1
    with pytest.raises(ModelError):
        diagonalize_noise(noise)


def test_degenerate_eigenspaces_are_resolved_by_the_p_block() -> None:
    q = np.eye(3)
    p = np.array([[2.0, 0.5, 0.0], [0.5, 2.0, 0.0], [0.0, 0.0, 1.0]])
    ensemble, _ = diagonalize_noise(BlockNoise(q, p))
    np.testing.assert_allclose(sorted(ensemble.gp.tolist()), [1.0, 1.5, 2.5], atol=1e-12)
    np.testing.assert_allclose(ensemble.gq, 1.0, atol=1e-12)


def test_circulant_blocks_sample_the_spectrum() -> None:
    n = 8
    blocks = circulant_blocks(GaussMarkov(N=1.0, phi=0.5), n)
    ensemble, _ = diagonalize_noise(blocks)
    x = 2.0 * math.pi * np.arange(n) / n
    gq, gp = gauss_markov_spectrum(1.0, 0.5, np.where(x > math.pi, 2.0 * math.pi - x, x))
    np.testing.assert_allclose(sorted(ensemble.gq.tolist()), sorted(gq.tolist()), atol=1e-10)
    np.testing.assert_allclose(sorted(ensemble.gp.tolist()), sorted(gp.tolist()), atol=1e-10)
    with pytest.raises(ModelError):
        circulant_blocks(Modes.from_pairs([(1.0, 1.0)]), 4)


def test_energy_is_decreasing_in_the_multiplier() -> None:
    ensemble = ModeEnsemble.from_pairs(MIXED)
    mu_grid = np.linspace(0.02, upper_multiplier(ensemble.gq, ensemble.gp), 30)
    energies = [total_input_energy(ensemble, mu) for mu in mu_grid]
    assert np.all(np.diff(energies) <= 1e-12)
    assert energies[-1] == pytest.approx(len(MIXED))


def test_infeasible_energy() -> None:
    with pytest.raises(InfeasibleEnergyError):
        solve_mu(ModeEnsemble.from_pairs(MIXED), 3.0)


def test_vacuum_floor_leaves_every_mode_unmodulated() -> None:
    solution = solve_mu(ModeEnsemble.from_pairs(MIXED), 4.0)
    assert solution.c1 == 0.0
    assert solution.partition.n1 == (0, 1, 2, 3)
    assert all(mode.regime is Regime.VACUUM for mode in solution.per_mode)


def test_energy_closure_and_set_structure() -> None:
    ensemble = ModeEnsemble.from_pairs(MIXED)
    solution = solve_mu(ensemble, 12.0)
    assert solution.energy_used == pytest.approx(12.0, abs=1e-7)
    assert solution.c1 > 0.0
    for index, mode in enumerate(solution.per_mode):
        assert solution.partition.label(index) == mode.regime.set_label
        assert mode.gin_q * mode.gin_p == pytest.approx(0.25, abs=1e-12)
        if mode.regime is Regime.WATER_FILLING:
            assert mode.gbar_q == pytest.approx(mode.gbar_p, rel=1e-9)
        if mode.regime is Regime.SINGLE_QUADRATURE:
            noisy_modulation = mode.gmod_q if mode.env_q >= mode.env_p else mode.gmod_p
            assert noisy_modulation == 0.0


def test_vacuum_modes_report_the_common_multiplier() -> None:
    solution = solve_mu(ModeEnsemble.from_pairs([(0.1, 0.1), (5.0, 5.0)]), 2.5)
    assert solution.partition.n1 == (1,)
    assert solution.partition.n3 == (0,)
    assert solution.mu == pytest.approx(0.5 * math.log2(1.35 / 0.35), abs=1e-8)
    for mode in solution.per_mode:
        assert mode.mu == pytest.approx(solution.mu, abs=DEFAULT_TOLERANCES.mu_tol)
    assert solution.per_mode[1].regime is Regime.VACUUM
    assert solution.per_mode[1].chi == 0.0


def test_permutation_invariance() -> None:
    forward = solve_mu(ModeEnsemble.from_pairs(MIXED), 9.0)
    backward = solve_mu(ModeEnsemble.from_pairs(MIXED[::-1]), 9.0)
    assert forward.mu == pytest.approx(backward.mu, abs=1e-14)
    assert forward.c1 == pytest.approx(backward.c1, abs=1e-12)


def test_global_water_filling_has_a_common_level() -> None:
    ensemble = ModeEnsemble.from_pairs([(2.0, 0.5), (1.0, 1.0), (0.5, 1.5)])
    solution = solve_mu(ensemble, 30.0)
    assert solution.partition.is_global_water_filling
    levels = [mode.nu_bar for mode in solution.per_mode]
    assert max(levels) - min(levels) < 1e-12
    assert levels[0] == pytest.approx((30.0 + 2.5 + 2.0 + 2.0) / 6.0)


def test_identical_modes_share_the_energy_equally() -> None:
    ensemble = ModeEnsemble.from_pairs([(1.5, 0.5), (1.5, 0.5), (1.5, 0.5)])
    solution = solve_mu(ensemble, 7.5)
    single = solve_one_mode(OneModeNoise(1.5, 0.5), InputEnergy(2.5))
    assert solution.c1 == pytest.approx(3.0 * single.chi, abs=1e-12)
    assert solution.c1_per_mode == pytest.approx(single.chi, abs=1e-12)


def test_classify_modes() -> None:
    ensemble = ModeEnsemble.from_pairs([(2.0, 0.5), (1.0, 1.0)])
    assert classify_modes(ensemble, 10.0) == Partition(n1=(0, 1), n2=(), n3=())
    assert classify_modes(ensemble, 0.01).is_global_water_filling
    assert classify_modes(ensemble, 0.5).label(0) == "N2"
