import numpy as np
import pytest

from rirlab.core import ImpulseResponse
from rirlab.errors import LengthError
from rirlab.spectral import (
    FLOOR_DB,
    fractional_octave_smooth,
    magnitude_spectrum,
    spectrogram,
    spectrum_to_csv,
    waterfall,
)
from synth import exp_decay

FS = 48000


def test_impulse_is_flat():
    h = np.zeros(1000)
    h[0] = 1.0
    spec = magnitude_spectrum(ImpulseResponse(h, FS))
    assert spec.n_fft == 1024
    np.testing.assert_allclose(spec.magnitude_db, 0.0, atol=1e-9)


def test_sine_peak():
    n = 4096
    k = 100
    x = np.sin(2 * np.pi * k * np.arange(n) / n)
    spec = magnitude_spectrum(ImpulseResponse(x, FS))
    f0 = k * FS / n
    assert spec.peak_hz() == pytest.approx(f0)
    assert spec.magnitude_db[k] - np.median(spec.magnitude_db) >= 40


def test_parseval():
    x = np.random.default_rng(0).standard_normal(4096)
    spec = magnitude_spectrum(ImpulseResponse(x, FS))
    mag2 = 10 ** (spec.magnitude_db / 10)
    energy = (mag2[0] + 2 * mag2[1:-1].sum() + mag2[-1]) / spec.n_fft
    assert energy == pytest.approx(np.sum(x * x), rel=1e-9)


def test_spectrum_short_input():
    with pytest.raises(LengthError):
        magnitude_spectrum(ImpulseResponse(np.ones(63), FS))


def test_smoothing_preserves_constant_and_reduces_ripple():
    flat = np.full(500, -12.0)
    np.testing.assert_allclose(fractional_octave_smooth(flat), flat)
    x = np.random.default_rng(1).standard_normal(8192)
    raw = magnitude_spectrum(ImpulseResponse(x, FS))
    smooth = magnitude_spectrum(ImpulseResponse(x, FS), smoothing="1/6")
    hi = raw.freqs_hz > 1000
    assert np.std(smooth.magnitude_db[hi]) < np.std(raw.magnitude_db[hi]) / 3
    with pytest.raises(ValueError):
        magnitude_spectrum(ImpulseResponse(x, FS), smoothing="1/3")


def test_spectrum_csv():
    x = np.random.default_rng(2).standard_normal(128)
    text = spectrum_to_csv(magnitude_spectrum(ImpulseResponse(x, FS)))
    lines = text.strip().split("\n")
    assert lines[0] == "freq_hz,magnitude_db"
    assert len(lines) == 1 + 65


def test_spectrogram_white_noise_stationary():
    x = np.random.default_rng(3).standard_normal(FS)
    grid = spectrogram(ImpulseResponse(x, FS))
    assert grid.magnitude_db.shape == (len(grid.times_s), len(grid.freqs_hz))
    assert grid.times_s[0] == pytest.approx(0.0125)
    assert np.diff(grid.times_s) == pytest.approx(0.010)
    band = (grid.freqs_hz > 200) & (grid.freqs_hz < 20000)
    med = np.median(grid.magnitude_db[:, band], axis=1)
    assert med.max() - med.min() < 3.0


def test_spectrogram_decaying_noise_energy_falls():
    grid = spectrogram(exp_decay(0.5, fs=FS, duration=1.0, noise=True))
    power = (10 ** (grid.magnitude_db / 10)).sum(axis=1)
    smooth = np.convolve(power, np.ones(3) / 3, mode="valid")
    assert np.all(np.diff(smooth) < 0)


def test_spectrogram_silence_floor():
    x = np.r_[np.random.default_rng(4).standard_normal(4800), np.zeros(9600)]
    grid = spectrogram(ImpulseResponse(x, FS))
    silent = grid.times_s - 0.0125 >= 0.1
    assert np.all(grid.magnitude_db[silent] == FLOOR_DB)
    csv = grid.to_csv().split("\n")
    assert csv[0].startswith("time_s,")


def test_spectrogram_window_too_long():
    with pytest.raises(LengthError):
        spectrogram(ImpulseResponse(np.ones(100), FS))


def test_waterfall_first_slice_matches_spectrum():
    rir = exp_decay(0.4, fs=FS, duration=0.5, noise=True)
    wf = waterfall(rir, n_slices=20)
    spec = magnitude_spectrum(rir)
    assert wf.magnitude_db.shape == (20, len(spec.freqs_hz))
    assert np.max(np.abs(wf.magnitude_db[0] - spec.magnitude_db)) <= 0.5
    assert wf.times_s[1] == pytest.approx(0.025)


def test_waterfall_band_level_non_increasing():
    wf = waterfall(exp_decay(1.0, fs=FS, duration=1.0, noise=True, seed=7), n_slices=40)
    band = (wf.freqs_hz >= 500) & (wf.freqs_hz <= 2000)
    level = 10 * np.log10(np.mean(10 ** (wf.magnitude_db[:, band] / 10), axis=1))
    assert np.all(np.diff(level) <= 1.0)


def test_waterfall_damped_sinusoid_slope():
    tau, f0 = 0.05, 1000.0
    t = np.arange(int(0.5 * FS)) / FS
    x = np.exp(-t / tau) * np.sin(2 * np.pi * f0 * t)
    wf = waterfall(ImpulseResponse(x, FS), n_slices=40)
    k = int(np.argmin(np.abs(wf.freqs_hz - f0)))
    level = wf.magnitude_db[:, k]
    use = slice(1, 20)
    slope = np.polyfit(wf.times_s[use], level[use], 1)[0]
    expected = -20 * np.log10(np.e) / tau
    assert slope == pytest.approx(expected, rel=0.10)


def test_waterfall_short_input():
    with pytest.raises(LengthError):
        waterfall(ImpulseResponse(np.ones(200), FS))
