"""Synthetic communication signals: two normal classes, seven jammers, two novel FM probes.

All generators return real-valued waveforms stored in a :class:`ComplexSeries`
with zero imaginary part.  Random draws come from a numpy ``Generator`` (or an
integer seed that is turned into one), so every waveform is a pure function of
``(spec, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

FRAME_LEN = 600
N_HOPS = 6
SAMPLES_PER_HOP = FRAME_LEN // N_HOPS
FRAME_RATE = 2_000_000.0  # Hz, shared by every class so mixtures line up

# Fraction-of-fs band that random frequencies are drawn from.
BAND_LO = 0.05
BAND_HI = 0.45


class SignalError(ValueError):
    """Invalid signal parameters."""


class SignalClass(str, Enum):
    FH = "fh"
    BPSK = "bpsk"
    TRACKING = "tracking-jamming"
    SWEEPING = "sweeping"
    NOISE_FM = "noise-fm"
    PULSE = "pulse"
    SINGLE_TONE = "single-tone"
    MULTI_TONE = "multi-tone"
    COMB = "comb-spectrum"
    NOVEL_POWER_LAW = "novel-power-law-fm"
    NOVEL_PARABOLIC = "novel-parabolic-fm"

    @property
    def is_novel(self) -> bool:
        return self in (SignalClass.NOVEL_POWER_LAW, SignalClass.NOVEL_PARABOLIC)

    @property
    def is_abnormal(self) -> bool:
        return self not in (SignalClass.FH, SignalClass.BPSK)


# Label order used everywhere: alphabetical by tag.
CLOSED_SET = tuple(sorted((c for c in SignalClass if not c.is_novel), key=lambda c: c.value))
NOVEL_SET = (SignalClass.NOVEL_POWER_LAW, SignalClass.NOVEL_PARABOLIC)


def class_index(cls: SignalClass) -> int:
    return CLOSED_SET.index(SignalClass(cls))


@dataclass(frozen=True, eq=False)
class ComplexSeries:
    """Uniformly sampled complex time series."""

    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128).ravel()
        if s.size == 0:
            raise SignalError("series is empty")
        if not np.all(np.isfinite(s)):
            raise SignalError("series has non-finite samples")
        if not self.sample_rate > 0:
            raise SignalError(f"sample_rate must be positive, got {self.sample_rate}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def time(self) -> np.ndarray:
        return np.arange(len(self)) / self.sample_rate

    def is_real(self) -> bool:
        return not np.any(self.samples.imag)

    def with_samples(self, samples) -> "ComplexSeries":
        return ComplexSeries(samples, self.sample_rate)


def measure_power(series: ComplexSeries) -> float:
    """Mean of |sample|^2 over the frame."""
    s = series.samples
    return float(np.mean(s.real**2 + s.imag**2))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_freq(name, f, fs):
    if not 0 < f < fs / 2:
        raise SignalError(f"{name}={f:g} Hz outside (0, {fs / 2:g}) Hz")


# -- normal signals ---------------------------------------------------------


@dataclass(frozen=True)
class FHSpec:
    hop_freqs: tuple
    hop_phases: tuple
    samples_per_hop: int = SAMPLES_PER_HOP
    sample_rate: float = FRAME_RATE

    def __post_init__(self):
        object.__setattr__(self, "hop_freqs", tuple(float(f) for f in self.hop_freqs))
        object.__setattr__(self, "hop_phases", tuple(float(p) for p in self.hop_phases))
        if len(self.hop_freqs) != N_HOPS or len(self.hop_phases) != N_HOPS:
            raise SignalError(f"FH needs {N_HOPS} hop frequencies and phases")
        if self.samples_per_hop < 1:
            raise SignalError("samples_per_hop must be >= 1")
        for j, f in enumerate(self.hop_freqs):
            _check_freq(f"hop_freqs[{j}]", f, self.sample_rate)

    @property
    def n_samples(self) -> int:
        return N_HOPS * self.samples_per_hop


@dataclass(frozen=True)
class BPSKSpec:
    symbol_rate: float
    carrier_freq: float
    bit_prob_zero: float = 0.5
    n_samples: int = FRAME_LEN
    sample_rate: float = FRAME_RATE

    def __post_init__(self):
        if not 0 <= self.bit_prob_zero <= 1:
            raise SignalError("bit_prob_zero must lie in [0, 1]")
        if self.symbol_rate <= 0 or self.n_samples < 1:
            raise SignalError("symbol_rate and n_samples must be positive")
        _check_freq("carrier_freq", self.carrier_freq, self.sample_rate)

    @property
    def n_symbols(self) -> int:
        return int(math.ceil(self.n_samples * self.symbol_rate / self.sample_rate))


def gen_fh(spec: FHSpec) -> ComplexSeries:
    """Six-hop frequency-hopping carrier, phase referenced to the global sample index."""
    n = np.arange(spec.n_samples)
    hop = n // spec.samples_per_hop
    f = np.asarray(spec.hop_freqs)[hop]
    theta = np.asarray(spec.hop_phases)[hop]
    return ComplexSeries(np.cos(2 * np.pi * f / spec.sample_rate * n + theta), spec.sample_rate)


def bpsk_bits(spec: BPSKSpec, rng) -> np.ndarray:
    """Draw the bit stream: True is symbol '1' (phase pi)."""
    return ~(_rng(rng).random(spec.n_symbols) < spec.bit_prob_zero)


def gen_bpsk(spec: BPSKSpec, rng_seed=None) -> ComplexSeries:
    bits = bpsk_bits(spec, rng_seed)
    n = np.arange(spec.n_samples)
    sym = np.minimum((n * spec.symbol_rate / spec.sample_rate).astype(int), bits.size - 1)
    a = np.where(bits, -1.0, 1.0)[sym]
    carrier = np.cos(2 * np.pi * spec.carrier_freq / spec.sample_rate * n)
    return ComplexSeries(a * carrier, spec.sample_rate)


# -- jammers ----------------------------------------------------------------


@dataclass(frozen=True)
class TrackingSpec:
    amplitudes: tuple
    delay_samples: int
    base: FHSpec

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        if len(self.amplitudes) != N_HOPS or min(self.amplitudes) <= 0:
            raise SignalError(f"tracking jammer needs {N_HOPS} positive amplitudes")
        if not 0 <= self.delay_samples < self.base.samples_per_hop:
            raise SignalError("tracking delay must satisfy 0 <= m < samples_per_hop")


@dataclass(frozen=True)
class SweepSpec:
    amplitude: float
    start_freq: float
    chirp_rate: float  # Hz/s
    phase: float = 0.0
    duration: Optional[float] = None  # seconds; None spans the frame


@dataclass(frozen=True)
class NoiseFMSpec:
    amplitude: float
    center_freq: float
    fm_coeff: float
    noise_variance: float = 1.0


@dataclass(frozen=True)
class PulseSpec:
    amplitude: float
    pulse_width: int = 20
    period: int = 120
    n_pulses: int = 4
    start_offsets: Optional[tuple] = None  # drawn from the rng when None


@dataclass(frozen=True)
class SingleToneSpec:
    power: float
    freq: float
    phase: float = 0.0


@dataclass(frozen=True)
class MultiToneSpec:
    total_power: float
    tone_freqs: tuple
    phases: tuple

    @property
    def n_tones(self) -> int:
        return len(self.tone_freqs)


@dataclass(frozen=True)
class CombSpec:
    tooth_powers: tuple
    tooth_centers: tuple
    half_bandwidth: float
    alpha: float
    beta: float

    @property
    def n_teeth(self) -> int:
        return len(self.tooth_centers)


JammerSpec = Union[TrackingSpec, SweepSpec, NoiseFMSpec, PulseSpec, SingleToneSpec, MultiToneSpec, CombSpec]


def _positive(name, v):
    if not v > 0:
        raise SignalError(f"{name} must be positive, got {v}")


def _gen_tracking(spec: TrackingSpec, n_samples, fs, rng):
    base = spec.base
    if base.n_samples != n_samples:
        raise SignalError("tracking jammer frame length differs from its FH base")
    n = np.arange(n_samples)
    hop = n // base.samples_per_hop
    on = (n - hop * base.samples_per_hop) >= spec.delay_samples
    f = np.asarray(base.hop_freqs)[hop]
    theta = np.asarray(base.hop_phases)[hop]
    amp = np.asarray(spec.amplitudes)[hop]
    return np.where(on, amp * np.cos(2 * np.pi * f / base.sample_rate * n + theta), 0.0)


def _gen_sweep(spec: SweepSpec, n_samples, fs, rng):
    _positive("amplitude", spec.amplitude)
    t = np.arange(n_samples) / fs
    duration = t[-1] if spec.duration is None else spec.duration
    f_end = spec.start_freq + spec.chirp_rate * duration
    _check_freq("start_freq", spec.start_freq, fs)
    _check_freq("sweep end frequency", f_end, fs)
    phase = 2 * np.pi * spec.start_freq * t + np.pi * spec.chirp_rate * t**2 + spec.phase
    return np.where(t <= duration, spec.amplitude * np.cos(phase), 0.0)


def noise_fm_phase(spec: NoiseFMSpec, n_samples, fs, rng) -> np.ndarray:
    """Wiener phase 2*pi*K_FM*int(u); increments ~ N(0, sigma^2 * Ts) before scaling."""
    if spec.noise_variance < 0:
        raise SignalError("noise_variance must be non-negative")
    w = _rng(rng).normal(0.0, math.sqrt(spec.noise_variance / fs), n_samples - 1)
    return np.concatenate(([0.0], np.cumsum(2 * np.pi * spec.fm_coeff * w)))


def _gen_noise_fm(spec: NoiseFMSpec, n_samples, fs, rng):
    _positive("amplitude", spec.amplitude)
    _check_freq("center_freq", spec.center_freq, fs)
    n = np.arange(n_samples)
    phi = noise_fm_phase(spec, n_samples, fs, rng)
    return spec.amplitude * np.cos(2 * np.pi * spec.center_freq / fs * n + phi)


def pulse_onsets(spec: PulseSpec, n_samples, rng) -> tuple:
    """Pulse onset indices: one burst per period slot, jittered inside its slot."""
    if spec.start_offsets is not None:
        return tuple(int(o) for o in spec.start_offsets)
    rng = _rng(rng)
    span = spec.n_pulses * spec.period
    if spec.pulse_width > spec.period or span > n_samples:
        raise SignalError("pulse train does not fit the frame")
    base = int(rng.integers(0, n_samples - span + 1))
    jitter = rng.integers(0, spec.period - spec.pulse_width + 1, spec.n_pulses)
    return tuple(base + i * spec.period + int(j) for i, j in enumerate(jitter))


def _gen_pulse(spec: PulseSpec, n_samples, fs, rng):
    _positive("amplitude", spec.amplitude)
    if spec.pulse_width < 1 or spec.n_pulses < 1:
        raise SignalError("pulse_width and n_pulses must be >= 1")
    out = np.zeros(n_samples)
    for onset in pulse_onsets(spec, n_samples, rng):
        if not 0 <= onset <= n_samples - spec.pulse_width:
            raise SignalError(f"pulse onset {onset} runs off the frame")
        out[onset : onset + spec.pulse_width] = spec.amplitude
    return out


def _gen_single_tone(spec: SingleToneSpec, n_samples, fs, rng):
    _positive("power", spec.power)
    _check_freq("freq", spec.freq, fs)
    n = np.arange(n_samples)
    return math.sqrt(2 * spec.power) * np.cos(2 * np.pi * spec.freq / fs * n + spec.phase)


def _gen_multi_tone(spec: MultiToneSpec, n_samples, fs, rng):
    _positive("total_power", spec.total_power)
    if spec.n_tones < 1 or len(spec.phases) != spec.n_tones:
        raise SignalError("multi-tone needs one phase per tone")
    n = np.arange(n_samples)
    amp = math.sqrt(2 * spec.total_power / spec.n_tones)
    out = np.zeros(n_samples)
    for i, (f, ph) in enumerate(zip(spec.tone_freqs, spec.phases)):
        _check_freq(f"tone_freqs[{i}]", f, fs)
        out += amp * np.cos(2 * np.pi * f / fs * n + ph)
    return out


def _gen_comb(spec: CombSpec, n_samples, fs, rng):
    if spec.n_teeth < 1 or len(spec.tooth_powers) != spec.n_teeth:
        raise SignalError("comb needs one power per tooth")
    if not 0 <= spec.alpha <= 1 or spec.half_bandwidth <= 0 or spec.beta <= 0:
        raise SignalError("comb needs 0 <= alpha <= 1, half_bandwidth > 0, beta > 0")
    t = np.arange(n_samples) / fs
    # Tooth k sweeps f_k + alpha*df*cos(beta*pi*t), staying inside f_k +- df.
    wobble = (2 * spec.alpha * spec.half_bandwidth / spec.beta) * np.sin(spec.beta * np.pi * t)
    out = np.zeros(n_samples)
    for k, (p, fk) in enumerate(zip(spec.tooth_powers, spec.tooth_centers)):
        _positive(f"tooth_powers[{k}]", p)
        if fk - spec.half_bandwidth <= 0 or fk + spec.half_bandwidth >= fs / 2:
            raise SignalError(f"comb tooth {k} band [{fk - spec.half_bandwidth:g}, "
                              f"{fk + spec.half_bandwidth:g}] Hz exceeds (0, {fs / 2:g}) Hz")
        out += math.sqrt(2 * p) * np.cos(2 * np.pi * fk * t + wobble)
    return out


_JAMMERS = {
    TrackingSpec: _gen_tracking,
    SweepSpec: _gen_sweep,
    NoiseFMSpec: _gen_noise_fm,
    PulseSpec: _gen_pulse,
    SingleToneSpec: _gen_single_tone,
    MultiToneSpec: _gen_multi_tone,
    CombSpec: _gen_comb,
}


def gen_jammer(spec: JammerSpec, n_samples=FRAME_LEN, sample_rate=FRAME_RATE, rng_seed=None) -> ComplexSeries:
    try:
        gen = _JAMMERS[type(spec)]
    except KeyError:
        raise SignalError(f"unknown jammer spec {type(spec).__name__}") from None
    return ComplexSeries(gen(spec, n_samples, sample_rate, _rng(rng_seed)), sample_rate)


def mix_at_jsr(signal: ComplexSeries, jammer: ComplexSeries, jsr_db: float) -> ComplexSeries:
    """Rescale ``jammer`` so that P_jam / P_sig equals ``jsr_db`` and add it to ``signal``."""
    if len(signal) != len(jammer) or signal.sample_rate != jammer.sample_rate:
        raise SignalError("signal and jammer differ in length or sample rate")
    ps, pj = measure_power(signal), measure_power(jammer)
    if ps == 0 or pj == 0:
        raise SignalError("JSR undefined for a zero-power signal or jammer")
    scale = math.sqrt(ps * 10 ** (jsr_db / 10) / pj)
    return signal.with_samples(signal.samples + scale * jammer.samples)


# -- novel FM probes --------------------------------------------------------

POWER_LAW_RANGE = (0.15, 0.5)
PARABOLA_RANGE = (0.1, 0.45)


@dataclass(frozen=True)
class PowerLawFMSpec:
    exponent: float
    amplitude: float = 1.0
    n_samples: int = FRAME_LEN
    sample_rate: float = FRAME_RATE

    def __post_init__(self):
        lo, hi = POWER_LAW_RANGE
        if not lo <= self.exponent <= hi:
            raise SignalError(f"power-law exponent {self.exponent} outside [{lo}, {hi}]")


@dataclass(frozen=True)
class ParabolicFMSpec:
    control_ordinates: tuple  # fractions of Nyquist at t = 0, T/2, T
    amplitude: float = 1.0
    n_samples: int = FRAME_LEN
    sample_rate: float = FRAME_RATE

    def __post_init__(self):
        object.__setattr__(self, "control_ordinates", tuple(float(c) for c in self.control_ordinates))
        lo, hi = PARABOLA_RANGE
        if len(self.control_ordinates) != 3:
            raise SignalError("parabolic FM needs exactly 3 control ordinates")
        if not all(lo <= c <= hi for c in self.control_ordinates):
            raise SignalError(f"parabola ordinates {self.control_ordinates} outside [{lo}, {hi}]")


NovelFMSpec = Union[PowerLawFMSpec, ParabolicFMSpec]


def novel_inst_freq(spec: NovelFMSpec) -> np.ndarray:
    """Instantaneous frequency in Hz for every sample."""
    nyq = spec.sample_rate / 2
    u = np.arange(spec.n_samples) / max(spec.n_samples - 1, 1)  # t / T
    if isinstance(spec, PowerLawFMSpec):
        return 0.9 * nyq * u**spec.exponent
    c0, c1, c2 = spec.control_ordinates
    # Lagrange quadratic through (0, c0), (1/2, c1), (1, c2).
    frac = c0 * 2 * (u - 0.5) * (u - 1) - c1 * 4 * u * (u - 1) + c2 * 2 * u * (u - 0.5)
    return frac * nyq


def gen_novel(spec: NovelFMSpec, rng_seed=None) -> ComplexSeries:
    if not isinstance(spec, (PowerLawFMSpec, ParabolicFMSpec)):
        raise SignalError(f"unknown novel spec {type(spec).__name__}")
    phase0 = _rng(rng_seed).uniform(0, 2 * np.pi)
    f = novel_inst_freq(spec)
    phase = phase0 + 2 * np.pi * np.concatenate(([0.0], np.cumsum(f[:-1]))) / spec.sample_rate
    return ComplexSeries(spec.amplitude * np.cos(phase), spec.sample_rate)


# -- per-class random parameter draws ---------------------------------------

# Nominal table values mapped to the 2 MHz frame rate.
DEFAULT_SYMBOL_RATE = FRAME_RATE / 100  # six symbols per frame
NOISE_FM_COEFF = 50_000 * FRAME_RATE / 60_000_000  # K_FM rescaled from 60 MHz
COMB_BAND = (200e3, 500e3)
COMB_HALF_BW = (10e3, 25e3)
COMB_ALPHA = (0.0, 0.5)
COMB_BETA = (180.0, 220.0)
COMB_TEETH = (3, 5)
MULTI_TONES = 7
TRACKING_DELAY = (20, 60)
MIN_SWEEP_SPAN = 0.15  # fraction of fs between sweep start and end
MIN_TONE_GAP = 0.04  # fraction of fs between a single-tone jammer and the carrier


def _band_away(rng, fs, centre, gap):
    """Uniform draw from the band, redrawn until it is at least ``gap * fs`` from ``centre``."""
    while True:
        f = float(_band(rng, fs))
        if abs(f - centre) >= gap * fs:
            return f


def _band(rng, fs, size=None):
    return rng.uniform(BAND_LO * fs, BAND_HI * fs, size)


def draw_fh(rng, fs=FRAME_RATE) -> FHSpec:
    return FHSpec(tuple(_band(rng, fs, N_HOPS)), tuple(rng.uniform(0, 2 * np.pi, N_HOPS)), sample_rate=fs)


def draw_bpsk(rng, fs=FRAME_RATE) -> BPSKSpec:
    return BPSKSpec(DEFAULT_SYMBOL_RATE * fs / FRAME_RATE, float(_band(rng, fs)), sample_rate=fs)


def draw_jammer(cls: SignalClass, rng, fs=FRAME_RATE, host=None) -> JammerSpec:
    """Random jammer parameters for one abnormal class (powers are relative; JSR sets scale).

    ``host`` is the signal being jammed: the FH plan for tracking jamming, the
    BPSK spec otherwise.
    """
    cls = SignalClass(cls)
    T = (FRAME_LEN - 1) / fs
    if cls is SignalClass.TRACKING:
        return TrackingSpec(tuple(rng.uniform(1.0, 2.0, N_HOPS)), int(rng.integers(*TRACKING_DELAY, endpoint=True)), host)
    if cls is SignalClass.SWEEPING:
        f0 = float(_band(rng, fs))
        f1 = _band_away(rng, fs, f0, MIN_SWEEP_SPAN)
        return SweepSpec(1.0, float(f0), float((f1 - f0) / T), float(rng.uniform(0, 2 * np.pi)))
    if cls is SignalClass.NOISE_FM:
        return NoiseFMSpec(1.0, float(_band(rng, fs)), NOISE_FM_COEFF * fs / FRAME_RATE, 1.0)
    if cls is SignalClass.PULSE:
        spec = PulseSpec(1.0)
        return PulseSpec(1.0, start_offsets=pulse_onsets(spec, FRAME_LEN, rng))
    if cls is SignalClass.SINGLE_TONE:
        carrier = host.carrier_freq if isinstance(host, BPSKSpec) else -fs
        return SingleToneSpec(1.0, _band_away(rng, fs, carrier, MIN_TONE_GAP), float(rng.uniform(0, 2 * np.pi)))
    if cls is SignalClass.MULTI_TONE:
        return MultiToneSpec(1.0, tuple(_band(rng, fs, MULTI_TONES)), tuple(rng.uniform(0, 2 * np.pi, MULTI_TONES)))
    if cls is SignalClass.COMB:
        k = int(rng.integers(*COMB_TEETH, endpoint=True))
        half_bw = float(rng.uniform(*COMB_HALF_BW))
        lo, hi = COMB_BAND
        centers = np.linspace(lo + half_bw, hi - half_bw, k) * fs / FRAME_RATE
        return CombSpec((1.0,) * k, tuple(centers), half_bw * fs / FRAME_RATE,
                        float(rng.uniform(*COMB_ALPHA)), float(rng.uniform(*COMB_BETA)))
    raise SignalError(f"{cls.value} has no jammer")


def draw_novel(cls: SignalClass, rng, fs=FRAME_RATE) -> NovelFMSpec:
    cls = SignalClass(cls)
    if cls is SignalClass.NOVEL_POWER_LAW:
        return PowerLawFMSpec(float(rng.uniform(*POWER_LAW_RANGE)), sample_rate=fs)
    if cls is SignalClass.NOVEL_PARABOLIC:
        return ParabolicFMSpec(tuple(rng.uniform(*PARABOLA_RANGE, 3)), sample_rate=fs)
    raise SignalError(f"{cls.value} is not a novel class")


@dataclass
class Synthesis:
    """Everything drawn for one sample: the clean frame and the specs behind it."""

    cls: SignalClass
    series: ComplexSeries
    signal_spec: object
    jammer_spec: Optional[object] = None
    jsr_db: Optional[float] = None
    extra: dict = field(default_factory=dict)


def synthesize(cls: SignalClass, jsr_db: float, rng, fs=FRAME_RATE, overrides=None) -> Synthesis:
    """Draw parameters for ``cls`` and build the (possibly jammed) frame.

    FH and tracking jamming share the FH hop plan; every other jammer and both
    novel probes ride on a BPSK carrier.  ``overrides`` maps ``signal.<field>``
    or ``jammer.<field>`` to replacement values.
    """
    from dataclasses import replace

    cls = SignalClass(cls)
    rng = _rng(rng)
    overrides = dict(overrides or {})
    sig_over = {k.split(".", 1)[1]: v for k, v in overrides.items() if k.startswith("signal.")}
    jam_over = {k.split(".", 1)[1]: v for k, v in overrides.items() if k.startswith("jammer.")}
    unknown = set(overrides) - {f"signal.{k}" for k in sig_over} - {f"jammer.{k}" for k in jam_over}
    if unknown:
        raise SignalError(f"override keys must start with 'signal.' or 'jammer.': {sorted(unknown)}")

    if cls in (SignalClass.FH, SignalClass.TRACKING):
        sig_spec = replace(draw_fh(rng, fs), **sig_over)
        signal = gen_fh(sig_spec)
    else:
        sig_spec = replace(draw_bpsk(rng, fs), **sig_over)
        signal = gen_bpsk(sig_spec, rng)
    if not cls.is_abnormal:
        if jam_over:
            raise SignalError(f"{cls.value} has no jammer to override")
        return Synthesis(cls, signal, sig_spec)

    if cls.is_novel:
        jam_spec = replace(draw_novel(cls, rng, fs), **jam_over)
        jammer = gen_novel(jam_spec, rng)
    else:
        jam_spec = draw_jammer(cls, rng, fs, host=sig_spec)
        if cls is SignalClass.TRACKING:
            jam_spec = replace(jam_spec, base=sig_spec)
        jam_spec = replace(jam_spec, **jam_over)
        jammer = gen_jammer(jam_spec, len(signal), fs, rng)
    return Synthesis(cls, mix_at_jsr(signal, jammer, jsr_db), sig_spec, jam_spec, jsr_db)
