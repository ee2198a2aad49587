import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from jamscope.channel import (
    FreqSelective,
    Gaussian,
    RayleighBlock,
    apply_channel,
    awgn,
    block_gain,
    channel_from_tag,
    multipath,
)
from jamscope.signals import ComplexSeries, SignalError, measure_power

FS = 2e6


def tone(n=600, f=0.1):
    return ComplexSeries(np.cos(2 * np.pi * f * np.arange(n)), FS)


def test_zero_db_unit_power_gives_unit_variance():
    x = np.ones(100_000, dtype=complex)
    n = awgn(x, 0.0, np.random.default_rng(0))
    assert abs(np.mean(np.abs(n) ** 2) - 1.0) < 0.02


def test_awgn_moments():
    x = np.ones(100_000, dtype=complex) * 2.0  # power 4
    n = awgn(x, 3.0, np.random.default_rng(1))
    var = 4.0 * 10 ** (-0.3)
    assert abs(n.mean()) < 0.02
    assert abs(np.var(n) / var - 1) < 0.05
    # Equal split between real and imaginary parts.
    assert abs(np.var(n.real) / np.var(n.imag) - 1) < 0.05


@pytest.mark.parametrize("ch", [Gaussian(), RayleighBlock(), FreqSelective()])
@pytest.mark.parametrize("snr", [-6.0, 2.0, 10.0])
def test_empirical_snr_average(ch, snr):
    x = tone()
    measured = []
    for seed in range(100):
        y = apply_channel(x, ch, snr, seed).samples
        clean = apply_channel(x, ch, math.inf, seed).samples
        noise = y - clean
        measured.append(10 * np.log10(np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noise) ** 2)))
    assert abs(np.mean(measured) - snr) < 0.3


def test_rayleigh_magnitudes_ks():
    rng = np.random.default_rng(2)
    ch = RayleighBlock(0.5)
    mags = np.array([abs(block_gain(ch, rng)) for _ in range(10_000)])
    assert stats.kstest(mags, stats.rayleigh(scale=0.5).cdf).pvalue > 0.01


def test_rayleigh_is_one_gain_per_frame():
    x = tone()
    y = apply_channel(x, RayleighBlock(), math.inf, 5).samples
    ratio = y / x.samples
    ok = np.abs(x.samples) > 1e-6
    np.testing.assert_allclose(ratio[ok], ratio[ok][0], rtol=1e-9)


def test_freq_selective_identity_taps():
    x = tone()
    y = multipath(x.samples, FreqSelective((0,), (1.0,)))
    np.testing.assert_array_equal(y, x.samples)


def test_freq_selective_two_path_formula():
    x = np.arange(1, 101, dtype=complex)
    ch = FreqSelective((0, 50), (1.0, 1.0))
    y = multipath(x, ch)
    g = 1 / math.sqrt(2)
    expected = g * x.copy()
    expected[50:] += g * x[:50]
    np.testing.assert_allclose(y, expected)


def test_freq_selective_normalizes_gains():
    ch = FreqSelective((0, 3), (3.0, 4.0))
    assert sum(abs(g) ** 2 for g in ch.tap_gains) == pytest.approx(1.0)


@pytest.mark.parametrize("delays,gains", [((1, 2), (1, 1)), ((0, 0), (1, 1)), ((0,), (1, 1)), ((0,), (0,))])
def test_freq_selective_validation(delays, gains):
    with pytest.raises(SignalError):
        FreqSelective(delays, gains)


def test_rayleigh_sigma_positive():
    with pytest.raises(SignalError):
        RayleighBlock(0.0)


def test_channel_tags():
    assert isinstance(channel_from_tag("rayleigh"), RayleighBlock)
    with pytest.raises(SignalError):
        channel_from_tag("ionosphere")


@given(tag=st.sampled_from(["gaussian", "rayleigh", "freq-selective"]), n=st.integers(1, 700),
       seed=st.integers(0, 2**32), snr=st.floats(-10, 20))
@settings(max_examples=40, deadline=None)
def test_length_and_rate_preserved(tag, n, seed, snr):
    x = ComplexSeries(np.random.default_rng(seed).standard_normal(n), FS)
    y = apply_channel(x, channel_from_tag(tag), snr, seed)
    assert len(y) == n and y.sample_rate == FS


def test_deterministic_and_shared_noise_stream():
    x = tone()
    a = apply_channel(x, Gaussian(), 0.0, 7).samples
    b = apply_channel(x, Gaussian(), 0.0, 7).samples
    assert a.tobytes() == b.tobytes()
    # The same seed draws the same standardized noise for every channel model.
    fs = apply_channel(x, FreqSelective(), 0.0, 7)
    clean = apply_channel(x, FreqSelective(), math.inf, 7)
    n_fs = (fs.samples - clean.samples) / math.sqrt(measure_power(clean))
    n_g = (a - x.samples) / math.sqrt(measure_power(x))
    np.testing.assert_allclose(n_fs, n_g, atol=1e-12)


def test_zero_input_stays_zero():
    z = ComplexSeries(np.zeros(10), FS)
    assert not np.any(apply_channel(z, Gaussian(), 0.0, 0).samples)
