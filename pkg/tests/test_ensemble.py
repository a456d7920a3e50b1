import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakval import extract_weak_value, load_preset
from weakval.ensemble import (
    CHUNK_SIZE,
    WeaknessWarning,
    build_cdf,
    grid_mean,
    sample_pointer,
    sample_stats,
    sqrtn_study,
    stderr_ratios,
)
from weakval.errors import DegenerateDensity
from weakval.pointer import PostselectedWave
from weakval.scenarios import OpticalParams, optical_wavefunction


def gaussian(beta, c=0.0):
    return PostselectedWave((1.0,), (c,), beta)


def test_eps03_preset_tracks_weak_value():
    s = load_preset("ritchie-eps03")
    wave = s.wave()
    target = extract_weak_value(wave).weak_value.real
    stats = sample_stats(sample_pointer(wave, 100_000, 1234))
    assert stats.n == 100_000
    assert abs(stats.mean - target) <= 3 * stats.std_error


def test_ritchie_preset_mean_is_biased_at_this_weakness():
    # At beta*a^2 = 0.01 with tan(0.1) in the denominator the pointer mean has
    # not converged to Re C_w; the bias dwarfs the sampling error.
    wave = load_preset("ritchie").wave()
    target = extract_weak_value(wave).weak_value.real
    bias = grid_mean(wave) - target
    stats = sample_stats(sample_pointer(wave, 100_000, 1234))
    assert bias > 0.5
    assert abs(stats.mean - target) > 3 * stats.std_error
    assert abs(stats.mean - grid_mean(wave)) <= 3 * stats.std_error


def test_deterministic_for_seed():
    wave = gaussian(0.05, 1.0)
    a = sample_pointer(wave, 5000, 7)
    assert np.array_equal(a, sample_pointer(wave, 5000, 7))
    assert not np.array_equal(a, sample_pointer(wave, 5000, 8))


def test_worker_split_is_invisible():
    wave = gaussian(0.5)
    n = 3 * CHUNK_SIZE + 17
    assert np.array_equal(sample_pointer(wave, n, 99, workers=1), sample_pointer(wave, n, 99, workers=4))


def test_prefix_stability_across_sizes():
    wave = gaussian(1.0)
    assert np.array_equal(sample_pointer(wave, 1000, 3), sample_pointer(wave, 3000, 3)[:1000])


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 5), st.floats(-3, 3), st.floats(0.05, 0.95), st.floats(0, 2 * math.pi))
def test_cdf_monotone_and_normalized(beta, c, w, phase):
    wave = PostselectedWave((w, (1 - w) * complex(math.cos(phase), math.sin(phase))), (c, 0.0), beta)
    cdf = build_cdf(wave)
    assert cdf.cdf[0] == 0
    assert abs(cdf.cdf[-1] - 1) <= 1e-12
    assert np.all(np.diff(cdf.cdf) >= 0)


def test_degenerate_density():
    with pytest.raises(DegenerateDensity):
        build_cdf(lambda q: 0 * q, (-1, 1, 11))


def test_needs_positive_width():
    with pytest.raises(ValueError):
        build_cdf(PostselectedWave((1.0,), (0.0,), 0.0))


def test_weakness_warning():
    with pytest.warns(WeaknessWarning):
        sample_pointer(gaussian(1.0, 2.0), 100, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error", WeaknessWarning)
        sample_pointer(gaussian(0.01, 2.0), 100, 0)


def test_gaussian_spread():
    beta = 0.5
    stats = sample_stats(sample_pointer(gaussian(beta), 100_000, 11))
    assert math.isclose(stats.std_dev, 1 / math.sqrt(2 * beta), rel_tol=0.05)
    assert abs(stats.mean) <= 4 * stats.std_error


@pytest.mark.parametrize("name", ["ritchie", "spin-imaginary", "eigenstate", "optical-30-60"])
def test_weak_regime_grid_mean(name):
    s = load_preset(name)
    target = extract_weak_value(s.wave()).weak_value.real
    beta = 1e-3 / s.max_shift() ** 2
    mean = grid_mean(s.wave(beta), s.grid_tuple(beta))
    assert abs(mean - target) <= 0.05 * max(abs(target), 1.0)


def test_sqrtn_scaling():
    stats = sqrtn_study(load_preset("ritchie-eps03").wave(), [25_000, 100_000], 1234)
    ratio = stderr_ratios(stats)[25_000]
    assert 1.6 <= ratio <= 2.4


def test_study_input_checks():
    with pytest.raises(ValueError):
        sqrtn_study(gaussian(1.0), [50, 200], 0)
    with pytest.raises(ValueError):
        sqrtn_study(gaussian(1.0), [400, 100], 0)


def test_sample_stats_small():
    s = sample_stats([1.0, 2.0, 3.0])
    assert (s.n, s.mean, s.std_dev) == (3, 2.0, 1.0)
    assert math.isclose(s.std_error, 1 / math.sqrt(3))


def test_interference_shifts_mean_beyond_spectrum():
    p = OpticalParams(math.pi / 4, 3 * math.pi / 4 + 0.3, 1.0, 1e-4)
    assert grid_mean(optical_wavefunction(p)) < -1.5  # outside [-a, 0]
