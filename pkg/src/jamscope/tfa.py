"""Wigner-Ville family time-frequency distributions and spectrogram images.

Discrete convention: the instantaneous autocorrelation uses integer lags,
``r(n, m) = x(n + m) * conj(x(n - m))``, with samples outside the frame taken
as zero.  The distribution is the DFT of ``r`` over ``m`` evaluated at
``n_freq_bins`` points, so bin ``k`` sits at ``k * fs / (2 * n_freq_bins)``
and the grid spans ``[0, fs/2)``.  With this normalization the frequency
marginal is ``sum_k W[n, k] / n_freq_bins == |x(n)|^2`` whenever every nonzero
lag is shorter than ``n_freq_bins``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .signals import ComplexSeries, SignalError

DEFAULT_TIME_WINDOW = 33
DEFAULT_LAG_WINDOW = 129
DEFAULT_FREQ_BINS = 256
DEFAULT_IMAGE_SIZE = (64, 64)
DB_RANGE = 60.0


@dataclass(frozen=True, eq=False)
class TFGrid:
    values: np.ndarray  # (T, F)
    time_axis: np.ndarray  # seconds
    freq_axis: np.ndarray  # Hz

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape != (self.time_axis.size, self.freq_axis.size):
            raise SignalError("TFGrid values do not match its axes")
        if not np.all(np.isfinite(self.values)):
            raise SignalError("TFGrid has non-finite values")

    @property
    def shape(self):
        return self.values.shape


def _check_window(name, w):
    w = np.asarray(w, dtype=float).ravel()
    if w.size % 2 == 0:
        raise SignalError(f"{name} window must have odd length, got {w.size}")
    if not np.allclose(w, w[::-1], rtol=0, atol=1e-12):
        raise SignalError(f"{name} window is not symmetric")
    if w[w.size // 2] != 1.0 or np.max(np.abs(w)) > 1.0:
        raise SignalError(f"{name} window must peak at 1 in its centre")
    return w


@dataclass(frozen=True, eq=False)
class WindowSpec:
    """Time-smoothing window ``g`` and lag window ``h`` (odd, symmetric, centre 1)."""

    time_window: np.ndarray
    lag_window: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "time_window", _check_window("time", self.time_window))
        object.__setattr__(self, "lag_window", _check_window("lag", self.lag_window))

    @classmethod
    def hamming(cls, time_len=DEFAULT_TIME_WINDOW, lag_len=DEFAULT_LAG_WINDOW):
        return cls(_hamming(time_len), _hamming(lag_len))

    @classmethod
    def trivial(cls, n_samples):
        """Dirac time window and all-ones lag window: SPWVD reduces to WVD."""
        return cls(np.ones(1), np.ones(2 * n_samples - 1))

    @classmethod
    def pseudo(cls, lag_window):
        return cls(np.ones(1), lag_window)


def _hamming(n):
    if n == 1:
        return np.ones(1)
    return np.hamming(n)


def analytic_signal(x: ComplexSeries) -> ComplexSeries:
    """Zero negative-frequency DFT bins and double the positive ones.

    For complex input the same projection is applied, which keeps the
    positive-frequency half of both signal and noise.
    """
    s = x.samples
    n = s.size
    spec = np.fft.fft(s)
    weight = np.zeros(n)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[1 : n // 2] = 2.0
        weight[n // 2] = 1.0
    else:
        weight[1 : (n + 1) // 2] = 2.0
    z = np.fft.ifft(spec * weight)
    if x.is_real():
        z.real = s.real  # exact by construction; removes FFT round-off
    return x.with_samples(z)


def spwvd(x: ComplexSeries, w: WindowSpec, n_freq_bins=DEFAULT_FREQ_BINS) -> TFGrid:
    """Smoothed pseudo Wigner-Ville distribution.

    ``W[n, k] = sum_m h(m) sum_p g'(p) x(n+p+m) conj(x(n+p-m)) e^{-2j pi k m / K}``
    where ``g'`` is the time window scaled to unit sum (a local average).
    """
    s = x.samples
    n = s.size
    g, h = w.time_window, w.lag_window
    if g.size > 2 * n or h.size > 2 * n:
        raise SignalError(f"window longer than twice the signal ({2 * n} samples)")
    if n_freq_bins < 1:
        raise SignalError("n_freq_bins must be >= 1")
    lg = g.size // 2
    lh = min(h.size // 2, n - 1)  # longer lags only ever see zero padding
    lags = np.arange(-lh, lh + 1)
    pad = lh + lg
    xp = np.zeros(n + 2 * pad, dtype=complex)
    xp[pad : pad + n] = s

    centres = np.arange(-lg, n + lg)[:, None] + pad
    r = xp[centres + lags] * np.conj(xp[centres - lags])

    gn = g / g.sum()
    acc = gn[0] * r[0:n]
    for p in range(1, g.size):
        acc = acc + gn[p] * r[p : p + n]
    acc = acc * h[h.size // 2 + lags]

    # Fold lags modulo K, then one FFT samples the lag-DTFT exactly.
    folded = np.zeros((n, n_freq_bins), dtype=complex)
    idx = lags % n_freq_bins
    for start in range(0, lags.size, n_freq_bins):
        sl = slice(start, start + n_freq_bins)
        folded[:, idx[sl]] += acc[:, sl]
    values = np.fft.fft(folded, axis=1).real

    fs = x.sample_rate
    return TFGrid(values, np.arange(n) / fs, np.arange(n_freq_bins) * fs / (2 * n_freq_bins))


def wvd(x: ComplexSeries, n_freq_bins=DEFAULT_FREQ_BINS) -> TFGrid:
    return spwvd(x, WindowSpec.trivial(len(x)), n_freq_bins)


def pwvd(x: ComplexSeries, lag_window, n_freq_bins=DEFAULT_FREQ_BINS) -> TFGrid:
    return spwvd(x, WindowSpec.pseudo(lag_window), n_freq_bins)


def tf_distribution(x: ComplexSeries, method: str, windows: WindowSpec, n_freq_bins=DEFAULT_FREQ_BINS) -> TFGrid:
    method = method.lower()
    if method == "wvd":
        return wvd(x, n_freq_bins)
    if method == "pwvd":
        return pwvd(x, windows.lag_window, n_freq_bins)
    if method == "spwvd":
        return spwvd(x, windows, n_freq_bins)
    raise SignalError(f"unknown tf method {method!r}")


def _area_weights(n_in, n_out):
    """(n_out, n_in) matrix averaging input cells over equal-width output cells."""
    edges = np.arange(n_out + 1) * (n_in / n_out)
    lo = np.maximum(edges[:-1, None], np.arange(n_in)[None, :])
    hi = np.minimum(edges[1:, None], np.arange(n_in)[None, :] + 1)
    overlap = np.clip(hi - lo, 0, None)
    return overlap / overlap.sum(axis=1, keepdims=True)


def to_image(grid: TFGrid, height=DEFAULT_IMAGE_SIZE[0], width=DEFAULT_IMAGE_SIZE[1]) -> np.ndarray:
    """8-bit grayscale image, rows = frequency (row 0 lowest), columns = time."""
    mag = np.abs(grid.values)
    peak = mag.max()
    if peak == 0:
        return np.zeros((height, width), dtype=np.uint8)
    db = 10 * np.log10(np.maximum(mag, peak * 10 ** (-DB_RANGE / 10)))
    lo, hi = db.min(), db.max()
    if hi == lo:
        return np.zeros((height, width), dtype=np.uint8)
    norm = (db - lo) / (hi - lo)  # (T, F)
    resized = _area_weights(norm.shape[1], height) @ norm.T @ _area_weights(norm.shape[0], width).T
    return np.clip(np.round(resized * 255), 0, 255).astype(np.uint8)


def save_tfgrid(grid: TFGrid, path) -> None:
    """Raw dump: uint32 LE (T, F) header followed by float32 LE values, row-major."""
    t, f = grid.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<II", t, f))
        fh.write(grid.values.astype("<f4").tobytes())


def load_tfgrid(path) -> np.ndarray:
    data = Path(path).read_bytes()
    t, f = struct.unpack("<II", data[:8])
    values = np.frombuffer(data, dtype="<f4", offset=8)
    if values.size != t * f:
        raise SignalError(f"{path}: expected {t * f} values, found {values.size}")
    return values.reshape(t, f)
