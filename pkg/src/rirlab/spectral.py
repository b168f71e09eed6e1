"""Magnitude spectrum, STFT spectrogram and cumulative-spectral-decay waterfall."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft
from scipy.signal import get_window

from .core import ImpulseResponse
from .errors import LengthError

FLOOR_DB = -140.0
SMOOTHING_FRACTION = 6  # 1/6 octave


@dataclass(frozen=True)
class SpectrumFrame:
    freqs_hz: np.ndarray
    magnitude_db: np.ndarray
    n_fft: int

    def peak_hz(self, f_lo: float = 0.0, f_hi: float = np.inf) -> float:
        mask = (self.freqs_hz >= f_lo) & (self.freqs_hz <= f_hi)
        idx = np.flatnonzero(mask)
        return float(self.freqs_hz[idx[np.argmax(self.magnitude_db[idx])]])


@dataclass(frozen=True)
class TimeFrequencyGrid:
    times_s: np.ndarray
    freqs_hz: np.ndarray
    magnitude_db: np.ndarray  # shape (len(times_s), len(freqs_hz))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_s"] + [repr(float(f)) for f in self.freqs_hz])
        for t, row in zip(self.times_s, self.magnitude_db):
            w.writerow([repr(float(t))] + [f"{v:.3f}" for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "times_s": self.times_s.tolist(),
            "freqs_hz": self.freqs_hz.tolist(),
            "magnitude_db": np.round(self.magnitude_db, 3).tolist(),
        }


def _db(mag: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.maximum(20.0 * np.log10(mag), FLOOR_DB)


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def fractional_octave_smooth(values_db: np.ndarray, fraction: int = SMOOTHING_FRACTION) -> np.ndarray:
    """Moving average of dB values over a 1/``fraction``-octave window per bin.

    Assumes a uniform frequency grid starting at DC; bin 0 is left untouched.
    """
    k = np.arange(len(values_db))
    half = 2.0 ** (1.0 / (2 * fraction))
    lo = np.clip(np.ceil(k / half - 1e-9), 0, len(values_db) - 1).astype(int)
    hi = np.clip(np.floor(k * half + 1e-9), 0, len(values_db) - 1).astype(int)
    lo = np.minimum(lo, k)
    hi = np.maximum(hi, k)
    csum = np.concatenate([[0.0], np.cumsum(values_db)])
    out = (csum[hi + 1] - csum[lo]) / (hi - lo + 1)
    out[0] = values_db[0]
    return out


def magnitude_spectrum(rir: ImpulseResponse, smoothing: str = "none") -> SpectrumFrame:
    """dB magnitude of one zero-padded FFT over the whole response.

    ``smoothing`` is ``"none"`` or ``"1/6"`` (sixth-octave, averaged in dB).
    """
    x = rir.mono
    if len(x) < 64:
        raise LengthError(f"spectrum needs at least 64 samples, got {len(x)}")
    n_fft = _next_pow2(len(x))
    mag = np.abs(sfft.rfft(x, n_fft))
    freqs = np.fft.rfftfreq(n_fft, 1.0 / rir.sample_rate)
    db = _db(mag)
    if smoothing in ("1/6", "sixth-octave"):
        db = np.maximum(fractional_octave_smooth(db), FLOOR_DB)
    elif smoothing != "none":
        raise ValueError(f"unknown smoothing {smoothing!r}")
    return SpectrumFrame(freqs, db, n_fft)


def spectrogram(rir: ImpulseResponse, window_s: float = 0.025,
                hop_s: float = 0.010) -> TimeFrequencyGrid:
    """Hann-windowed STFT magnitude in dB (linear frequency axis)."""
    x = rir.mono
    fs = rir.sample_rate
    win_len = int(round(window_s * fs))
    hop = max(1, int(round(hop_s * fs)))
    if win_len < 2 or len(x) < win_len:
        raise LengthError(f"spectrogram window of {win_len} samples exceeds signal length {len(x)}")
    frames = np.lib.stride_tricks.sliding_window_view(x, win_len)[::hop]
    window = get_window("hann", win_len)
    mag = np.abs(sfft.rfft(frames * window, axis=1))
    starts = np.arange(frames.shape[0]) * hop
    times = (starts + win_len / 2.0) / fs
    freqs = np.fft.rfftfreq(win_len, 1.0 / fs)
    return TimeFrequencyGrid(times, freqs, _db(mag))


def waterfall(rir: ImpulseResponse, n_slices: int = 40, fade_s: float = 0.002) -> TimeFrequencyGrid:
    """Cumulative spectral decay.

    Slice ``k`` is the spectrum of the response from offset
    ``k * duration / n_slices`` onwards. Every slice after the first gets a
    half-Hann fade-in of ``fade_s`` to soften the truncation edge. All slices
    share the FFT size of the full response, so row 0 equals
    :func:`magnitude_spectrum`.
    """
    x = rir.mono
    n = len(x)
    if n < 256:
        raise LengthError(f"waterfall needs at least 256 samples, got {n}")
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    n_fft = _next_pow2(n)
    fade_len = max(2, int(round(fade_s * rir.sample_rate)))
    fade = np.hanning(2 * fade_len)[:fade_len]
    offsets = (np.arange(n_slices) * n) // n_slices
    rows = np.empty((n_slices, n_fft // 2 + 1))
    for k, off in enumerate(offsets):
        seg = x[off:].copy()
        if off > 0:
            m = min(fade_len, len(seg))
            seg[:m] *= fade[:m]
        rows[k] = np.abs(sfft.rfft(seg, n_fft))
    freqs = np.fft.rfftfreq(n_fft, 1.0 / rir.sample_rate)
    return TimeFrequencyGrid(offsets / rir.sample_rate, freqs, _db(rows))


def spectrum_to_csv(frame: SpectrumFrame) -> str:
    lines = ["freq_hz,magnitude_db"]
    lines += [f"{f!r},{v:.4f}" for f, v in zip(frame.freqs_hz.tolist(), frame.magnitude_db.tolist())]
    return "\n".join(lines) + "\n"
