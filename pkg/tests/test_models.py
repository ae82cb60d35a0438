import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.signal import firwin

from spectral_mi.errors import ContractError, DomainError, UnsupportedModelError
from spectral_mi.models import (CosineModelConfig, LinearModelConfig, bandpass_taps, coherence,
                                expected_index_pairs, frequency_response, gen_cosine_square,
                                gen_linear, gen_two_cosine_square, is_real_bin, lowpass_taps,
                                oracle_for, oracle_mi_gaussian, oracle_mif_gaussian, rayleigh)
from spectral_mi.spectral import power_spectrum, spectral_increments
from spectral_mi.timeseries import WindowPlan


def two_tap_closed_form(beta, sigma_x=1.0, sigma_w=1.0):
    # 1 + snr |H|^2 = a + b cos(2 pi lam); int_0^1/2 ln(a + b cos) = 1/2 ln((a + sqrt(a^2-b^2))/2)
    snr = sigma_x ** 2 / sigma_w ** 2
    a = 1 + snr * (beta ** 2 + (1 - beta) ** 2)
    b = 2 * snr * beta * (1 - beta)
    return 0.5 * math.log((a + math.sqrt(a * a - b * b)) / 2)


# -- linear model -------------------------------------------------------------------

def test_identity_filter_noiseless():
    x, y = gen_linear(LinearModelConfig((1.0,), sigma_w=0.0, n_samples=1000, seed=3))
    assert np.array_equal(x.samples, y.samples)


def test_causal_delay():
    x, y = gen_linear(LinearModelConfig((0.0, 1.0), sigma_w=0.0, n_samples=100, seed=1))
    assert np.array_equal(y.samples[1:], x.samples[:-1])


def test_centered_alignment_removes_group_delay():
    cfg = LinearModelConfig((0.0, 1.0, 0.0), sigma_w=0.0, n_samples=100, seed=1, align="centered")
    x, y = gen_linear(cfg)
    assert np.array_equal(x.samples, y.samples)


def test_first_sample_uses_warm_up():
    cfg = LinearModelConfig((0.5, 0.5), sigma_w=0.0, n_samples=50, seed=2)
    x, y = gen_linear(cfg)
    rng = np.random.default_rng(2)
    ext = rng.standard_normal(51)
    assert y.samples[0] == 0.5 * ext[1] + 0.5 * ext[0]
    assert x.samples[0] == ext[1]


@pytest.mark.parametrize("beta", [0.0, 0.3, 0.5])
def test_output_variance(beta):
    x, y = gen_linear(LinearModelConfig(lowpass_taps(beta), sigma_w=0.7, n_samples=100_000, seed=9))
    expected = beta ** 2 + (1 - beta) ** 2 + 0.49
    assert abs(y.samples.var() / expected - 1) < 0.02
    assert abs(x.samples.var() - 1) < 0.02


def test_linear_reproducible_and_seed_dependent():
    cfg = LinearModelConfig((0.2, 0.8), n_samples=500, seed=4)
    a, b = gen_linear(cfg), gen_linear(cfg)
    assert np.array_equal(a[0].samples, b[0].samples)
    assert np.array_equal(a[1].samples, b[1].samples)
    c = gen_linear(LinearModelConfig((0.2, 0.8), n_samples=500, seed=5))
    assert not np.array_equal(a[0].samples, c[0].samples)


def test_linear_config_contracts():
    with pytest.raises(ContractError):
        LinearModelConfig(())
    with pytest.raises(ContractError):
        LinearModelConfig((1.0, np.nan))
    with pytest.raises(ContractError):
        LinearModelConfig((1.0,), sigma_x=0)
    with pytest.raises(ContractError):
        LinearModelConfig((1.0,), sigma_w=-1)
    with pytest.raises(ContractError):
        LinearModelConfig((1.0,), align="acausal")


# -- taps -----------------------------------------------------------------------------

def test_lowpass_taps():
    assert list(lowpass_taps(0)) == [0, 1]
    assert list(lowpass_taps(1)) == [1, 0]
    assert list(lowpass_taps(0.5)) == [0.5, 0.5]
    for bad in (-0.1, 1.1):
        with pytest.raises(DomainError):
            lowpass_taps(bad)


def test_bandpass_design():
    taps = bandpass_taps()
    assert taps.size == 33
    assert np.array_equal(taps, taps[::-1])
    lam = np.linspace(0, 0.5, 2001)
    mag = np.abs(frequency_response(taps, lam))
    peak = mag.max()
    assert np.all(mag[(lam >= 0.18) & (lam <= 0.32)] >= 0.9 * peak)
    assert np.all(mag[(lam <= 0.12) | (lam >= 0.38)] <= 0.1 * peak)
    assert abs(frequency_response(taps, 0.0)) <= 0.1 * peak
    assert abs(frequency_response(taps, 0.25)) >= 0.9 * peak


def test_bandpass_matches_reference_design():
    ref = firwin(33, [0.3, 0.7], pass_zero=False, window="hamming")
    assert np.allclose(bandpass_taps(), ref, rtol=0, atol=1e-12)


def test_frequency_response_direct():
    taps = np.array([0.3, -0.2, 0.9])
    lam = 0.17
    direct = sum(h * np.exp(-2j * np.pi * lam * n) for n, h in enumerate(taps))
    assert np.isclose(frequency_response(taps, lam), direct)


# -- cosine models ----------------------------------------------------------------------

def test_rayleigh_mean():
    draws = rayleigh(np.random.default_rng(0), 1_000_000)
    assert abs(draws.mean() / math.sqrt(math.pi / 2) - 1) < 0.01
    assert np.all(draws >= 0)


def test_cosine_noiseless_square():
    x, y = gen_cosine_square(CosineModelConfig(sigma_w=0.0, n_samples=3200, seed=1))
    assert np.array_equal(y.samples, x.samples ** 2)


def test_cosine_energy_on_grid():
    x, _ = gen_cosine_square(CosineModelConfig(n_samples=32 * 200, seed=2))
    inc = spectral_increments(x, WindowPlan(32, 200, demean=False))
    power = power_spectrum(inc).power
    assert set(np.flatnonzero(power > 1e-9 * power.max())) == {4, 28}


def test_cosine_parameters_redrawn_per_window():
    x, _ = gen_cosine_square(CosineModelConfig(n_samples=32 * 50, seed=3))
    inc = spectral_increments(x, WindowPlan(32, 50, demean=False))
    row = inc.values[4]
    # amplitude A n_f / 2 and phase theta held within a window, fresh across windows
    assert np.unique(np.round(np.abs(row), 9)).size == 50


def test_two_cosine_noiseless():
    cfg = CosineModelConfig(lambda2=6 / 32, sigma_w=0.0, n_samples=3200, seed=4)
    x, y = gen_two_cosine_square(cfg)
    assert np.array_equal(y.samples, x.samples ** 2)
    inc = spectral_increments(x, WindowPlan(32, 100, demean=False))
    power = power_spectrum(inc).power
    assert set(np.flatnonzero(power > 1e-9 * power.max())) == {4, 6, 26, 28}


def test_cosine_reproducible():
    cfg = CosineModelConfig(lambda2=6 / 32, n_samples=640, seed=8)
    a, b = gen_two_cosine_square(cfg), gen_two_cosine_square(cfg)
    assert np.array_equal(a[1].samples, b[1].samples)


def test_cosine_contracts():
    with pytest.raises(ContractError):
        CosineModelConfig(lambda1=0.5)
    with pytest.raises(ContractError):
        CosineModelConfig(lambda1=0.1, lambda2=0.0)
    with pytest.raises(ContractError):
        gen_cosine_square(CosineModelConfig(lambda2=0.2))
    with pytest.raises(ContractError):
        gen_two_cosine_square(CosineModelConfig())


def test_expected_pairs():
    assert expected_index_pairs(CosineModelConfig()) == [(4, 0), (4, 8)]
    pairs = expected_index_pairs(CosineModelConfig(lambda2=6 / 32))
    assert pairs == [(4, 0), (4, 2), (4, 8), (4, 10), (6, 0), (6, 2), (6, 10), (6, 12)]
    assert len({j for _, j in pairs}) == 5


# -- oracles ---------------------------------------------------------------------------

def test_oracle_identity_filter():
    assert abs(oracle_mi_gaussian([1.0, 0.0]) - 0.5 * math.log(2)) < 1e-10
    assert abs(oracle_mi_gaussian([1.0, 0.0]) - 0.34657) < 1e-5


@given(st.floats(0, 1), st.floats(0.3, 3), st.floats(0.3, 3))
def test_oracle_two_tap_closed_form(beta, sx, sw):
    got = oracle_mi_gaussian(lowpass_taps(beta), sx, sw)
    assert abs(got - two_tap_closed_form(beta, sx, sw)) < 1e-8


def test_oracle_midpoint_value():
    value = oracle_mi_gaussian([0.5, 0.5])
    assert abs(value - 0.5 * math.log((1.5 + math.sqrt(2)) / 2)) < 1e-10


def test_oracle_low_snr_asymptote():
    taps = bandpass_taps()
    approx = (taps ** 2).sum() / (2 * 100.0 ** 2)
    assert abs(oracle_mi_gaussian(taps, 1.0, 100.0) / approx - 1) < 0.05


@given(st.floats(0.1, 10), st.floats(0.2, 5))
def test_oracle_scale_identity(c, sw):
    taps = bandpass_taps()
    a = oracle_mi_gaussian(c * taps, 1.0, sw)
    b = oracle_mi_gaussian(taps, 1.0, sw / c)
    assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def test_oracle_diverges_without_noise():
    with pytest.raises(DomainError):
        oracle_mi_gaussian([1.0], 1.0, 0.0)
    with pytest.raises(DomainError):
        oracle_mif_gaussian([1.0], 1.0, 0.0, 0.1)


def test_mif_oracle():
    assert math.isclose(oracle_mif_gaussian([1.0], 1, 1, 0.123), math.log(2))
    assert oracle_mif_gaussian([0.5, 0.5], 1, 1, 0.5) < 1e-20
    assert math.isclose(oracle_mif_gaussian([1.0], 1, 1, 0.0, real=True), 0.5 * math.log(2))
    vals = [oracle_mif_gaussian([1.0], 1, sw, 0.2) for sw in (2.0, 1.0, 0.5, 0.1, 0.01)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    c = coherence([0.3, 0.7], 1, 1, 0.1)
    assert math.isclose(oracle_mif_gaussian([0.3, 0.7], 1, 1, 0.1), -math.log(1 - c))


def test_real_bins():
    assert is_real_bin(0, 64) and is_real_bin(32, 64)
    assert not is_real_bin(1, 64)
    assert not is_real_bin(3, 7)


def test_oracle_dispatch():
    assert math.isclose(oracle_for("lowpass", beta=1.0), 0.5 * math.log(2), rel_tol=1e-10)
    assert oracle_for("bandpass", sigma_w=2.0) > 0
    for model in ("cosine2", "twocosine2", "nope"):
        with pytest.raises(UnsupportedModelError):
            oracle_for(model)
