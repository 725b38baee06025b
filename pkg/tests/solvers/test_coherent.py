from __future__ import annotations

import math

import numpy as np
import pytest

from capwater.core.errors import DomainError
from capwater.core.special import g
from capwater.models import AutoRegressive, GaussMarkov
from capwater.solvers.coherent import (
    GainPoint,
    coherent_rate_one_mode,
    coherent_rate_spectral,
    coherent_water_level,
    gain,
    gain_at,
    gain_sweep,
    gm_alpha,
    gm_coherent_threshold,
    max_gain_over_nbar,
    output_eigenvalues,
    two_mode_gain,
)
from capwater.solvers.one_mode import InputEnergy, OneModeNoise, solve_one_mode


def test_symmetric_mode_gains_nothing() -> None:
    noise = OneModeNoise(1.0, 1.0)
    energy = InputEnergy.from_nbar(2.0)
    rate = coherent_rate_one_mode(noise, energy)
    assert rate == pytest.approx(g(3.0) - g(1.0), abs=1e-10)
    assert solve_one_mode(noise, energy).chi == pytest.approx(rate, abs=1e-10)


def test_asymmetric_mode_beats_coherent_states() -> None:
    noise = OneModeNoise(2.0, 0.5)
    energy = InputEnergy.from_nbar(1.0)
    assert solve_one_mode(noise, energy).chi > coherent_rate_one_mode(noise, energy)


def test_memoryless_coherent_rate() -> None:
    assert coherent_rate_spectral(GaussMarkov(N=1.0, phi=0.0), 1.5) == pytest.approx(g(2.5) - g(1.0), abs=1e-9)


def test_gauss_markov_threshold_and_band_edge() -> None:
    assert gm_coherent_threshold(1.0, 0.5) == pytest.approx(2.0)
    assert gm_alpha(1.0, 0.5, 2.0) == 0.0
    assert gm_alpha(1.0, 0.5, 0.0) == math.pi

    alpha = gm_alpha(1.0, 0.5, 0.5)
    assert 0.0 < alpha < math.pi
    model = GaussMarkov(N=1.0, phi=0.5)
    level = float(model.spectrum(alpha)[0])
    assert coherent_water_level(model, 0.5) == pytest.approx(level, rel=1e-5)


@pytest.mark.parametrize("nbar", [0.5, 3.0])
def test_closed_form_rate_matches_the_grid(nbar: float) -> None:
    closed = coherent_rate_spectral(GaussMarkov(N=1.0, phi=0.5), nbar)
    generic = coherent_rate_spectral(AutoRegressive.mirrored([0.5], 0.75), nbar)
    assert closed == pytest.approx(generic, abs=1e-5)


def test_output_eigenvalues_order() -> None:
    coherent, squeezed = output_eigenvalues(GaussMarkov(N=1.0, phi=0.85).sample())
    assert np.all(coherent >= squeezed - 1e-15)


def test_gain_of_correlated_noise() -> None:
    point = gain(GaussMarkov(N=1.0, phi=0.85), 1.0)
    assert isinstance(point, GainPoint)
    assert point.snr == pytest.approx(1.0)
    assert point.phi == 0.85
    assert 1.0 < point.gain <= 1.12
    assert point.as_record()["gain"] == point.gain
    with pytest.raises(DomainError):
        gain(GaussMarkov(N=1.0, phi=0.85), 0.0)


def test_two_mode_gain() -> None:
    assert two_mode_gain(1.0, 0.0, 1.0).gain == pytest.approx(1.0, abs=1e-9)
    point = two_mode_gain(1.0, 0.5, 1.0)
    assert point.gain > 1.0
    assert point.capacity == pytest.approx(solve_one_mode(OneModeNoise(1.5, 0.5), InputEnergy(3.0)).chi)
    with pytest.raises(DomainError):
        two_mode_gain(1.0, 1.0, 1.0)


def test_gain_at_fixed_snr() -> None:
    point = gain_at("infinite", 2.0, 0.7, 1.0)
    assert point.snr == pytest.approx(2.0)
    assert point.capacity == pytest.approx(gain(GaussMarkov(N=0.5, phi=0.7), 1.0).capacity, abs=1e-12)
    with pytest.raises(DomainError):
        gain_at("infinite", 0.0, 0.7, 1.0)


def test_max_gain_over_nbar() -> None:
    grid = [4.0, 0.5, 1.0, 2.0]
    best = max_gain_over_nbar(1.0, 0.8, grid, channel="two_mode")
    points = [gain_at("two_mode", 1.0, 0.8, nbar) for nbar in grid]
    assert best.gain == max(point.gain for point in points)
    with pytest.raises(DomainError):
        max_gain_over_nbar(1.0, 0.8, [])


def test_gain_sweep_order() -> None:
    points = gain_sweep([1.0, 2.0], [0.3, 0.6], [0.5, 1.0], channel="two_mode")
    assert len(points) == 8
    assert [(p.snr, p.phi, p.nbar) for p in points[:3]] == [
        pytest.approx((1.0, 0.3, 0.5)),
        pytest.approx((1.0, 0.3, 1.0)),
        pytest.approx((1.0, 0.6, 0.5)),
    ]
    assert all(point.gain >= 1.0 - 1e-9 for point in points)
