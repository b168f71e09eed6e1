"""FFT convolution of dry audio with a room impulse response."""

from __future__ import annotations

import warnings

import numpy as np

from .core import ImpulseResponse
from .errors import DegenerateInputError

OUTPUT_PEAK = 0.95


def resample_linear(x: np.ndarray, rate_in: int, rate_out: int) -> np.ndarray:
    """Linear-interpolation resampler.

    No anti-alias filtering: content above the lower Nyquist folds back, and
    the interpolation itself rolls off highs (about -3.9 dB at half Nyquist).
    """
    if rate_in == rate_out:
        return np.asarray(x, dtype=float)
    n_out = max(1, int(round(len(x) * rate_out / rate_in)))
    t_out = np.arange(n_out) * (rate_in / rate_out)
    return np.interp(t_out, np.arange(len(x)), x)


def fft_convolve(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Full linear convolution via one zero-padded real FFT."""
    n = len(x) + len(h) - 1
    n_fft = 1 << (n - 1).bit_length()
    y = np.fft.irfft(np.fft.rfft(x, n_fft) * np.fft.rfft(h, n_fft), n_fft)
    return y[:n]


def convolve_raw(dry: ImpulseResponse, rir: ImpulseResponse) -> np.ndarray:
    """Un-normalised convolution of every dry channel with the mono RIR."""
    h = rir.mono
    if not np.any(h):
        raise DegenerateInputError("impulse response has zero energy")
    if rir.sample_rate != dry.sample_rate:
        warnings.warn(
            f"resampling RIR from {rir.sample_rate} Hz to {dry.sample_rate} Hz (linear interpolation)",
            stacklevel=2,
        )
        h = resample_linear(h, rir.sample_rate, dry.sample_rate)
    return np.stack([fft_convolve(ch, h) for ch in dry.samples])


def convolve(dry: ImpulseResponse, rir: ImpulseResponse) -> ImpulseResponse:
    """Auralise ``dry`` through ``rir``; the joint peak is scaled to 0.95."""
    y = convolve_raw(dry, rir)
    peak = np.abs(y).max()
    if peak > 0:
        y = y * (OUTPUT_PEAK / peak)
    return ImpulseResponse(y, dry.sample_rate)
