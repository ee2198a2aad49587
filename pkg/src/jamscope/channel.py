"""Propagation channels followed by SNR-calibrated complex AWGN.

SNR is always measured against the signal power *after* the channel (faded or
filtered), so the SNR axis means the same thing for every channel model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .signals import ComplexSeries, SignalError, measure_power


@dataclass(frozen=True)
class Gaussian:
    tag = "gaussian"


@dataclass(frozen=True)
class RayleighBlock:
    sigma: float = 0.5
    tag = "rayleigh"

    def __post_init__(self):
        if not self.sigma > 0:
            raise SignalError("Rayleigh sigma must be positive")


@dataclass(frozen=True)
class FreqSelective:
    tap_delays: tuple = (0, 50)
    tap_gains: tuple = (1 / math.sqrt(2), 1 / math.sqrt(2))
    tag = "freq-selective"

    def __post_init__(self):
        d = tuple(int(v) for v in self.tap_delays)
        g = np.asarray(self.tap_gains, dtype=complex)
        if not d or d[0] != 0 or any(b <= a for a, b in zip(d, d[1:])):
            raise SignalError("tap delays must start at 0 and strictly increase")
        if len(g) != len(d):
            raise SignalError("need one gain per tap")
        total = np.sum(np.abs(g) ** 2)
        if total == 0:
            raise SignalError("tap gains are all zero")
        object.__setattr__(self, "tap_delays", d)
        object.__setattr__(self, "tap_gains", tuple(complex(x) for x in g / math.sqrt(total)))


ChannelModel = Union[Gaussian, RayleighBlock, FreqSelective]
CHANNELS = {"gaussian": Gaussian, "rayleigh": RayleighBlock, "freq-selective": FreqSelective}


def channel_from_tag(tag: str) -> ChannelModel:
    try:
        return CHANNELS[tag]()
    except KeyError:
        raise SignalError(f"unknown channel {tag!r}; choose from {sorted(CHANNELS)}") from None


def _streams(seed):
    # Separate streams keep the AWGN draw identical across channel models.
    noise, fading = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(noise), np.random.default_rng(fading)


def block_gain(ch: RayleighBlock, rng) -> complex:
    """One flat-fading gain: Rayleigh(sigma) magnitude, uniform phase."""
    mag = rng.rayleigh(ch.sigma)
    return mag * np.exp(1j * rng.uniform(0, 2 * np.pi))


def awgn(x: np.ndarray, snr_db: float, rng) -> np.ndarray:
    """Circular complex Gaussian noise with variance P_x * 10^(-SNR/10) per sample."""
    p = float(np.mean(np.abs(x) ** 2))
    var = p * 10 ** (-snr_db / 10)
    z = rng.standard_normal((2, x.size))
    return math.sqrt(var / 2) * (z[0] + 1j * z[1])


def multipath(x: np.ndarray, ch: FreqSelective) -> np.ndarray:
    y = np.zeros(x.size, dtype=complex)
    for d, g in zip(ch.tap_delays, ch.tap_gains):
        if d < x.size:
            y[d:] += g * x[: x.size - d]
    return y


def apply_channel(x: ComplexSeries, ch: ChannelModel, snr_db: float, rng_seed=None) -> ComplexSeries:
    noise_rng, fade_rng = _streams(rng_seed)
    s = x.samples
    if isinstance(ch, RayleighBlock):
        s = block_gain(ch, fade_rng) * s
    elif isinstance(ch, FreqSelective):
        s = multipath(s, ch)
    elif not isinstance(ch, Gaussian):
        raise SignalError(f"unknown channel model {ch!r}")
    if measure_power(x.with_samples(s)) == 0:
        return x.with_samples(s)
    return x.with_samples(s + awgn(s, snr_db, noise_rng))
