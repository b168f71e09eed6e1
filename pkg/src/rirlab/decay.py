"""Schroeder decay curves, reverberation-time regression and octave bands."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .core import ImpulseResponse
from .errors import BandOutOfRangeError, DegenerateInputError, InsufficientDecayRangeError

EDC_FLOOR_DB = -140.0
MIN_FIT_SAMPLES = 8
OCTAVE_CENTERS_HZ = (125, 250, 500, 1000, 2000, 4000)
FILTER_ORDER = 4

# (name, upper dB, lower dB)
DECAY_RANGES = {
    "edt": (0.0, -10.0),
    "t20": (-5.0, -25.0),
    "t30": (-5.0, -35.0),
}


@dataclass(frozen=True)
class EnergyDecayCurve:
    values_db: np.ndarray
    sample_rate: int
    floor_db: float = EDC_FLOOR_DB

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.values_db)) / self.sample_rate


@dataclass(frozen=True)
class SlopeFit:
    slope_db_per_s: float
    intercept_db: float
    r2: float
    n_samples: int


@dataclass(frozen=True)
class DecayMetrics:
    """EDT/T20/T30 in seconds; a missing value comes with a reason string."""

    edt_s: float | None
    t20_s: float | None
    t30_s: float | None
    fit_r2_edt: float | None
    fit_r2_t20: float | None
    fit_r2_t30: float | None
    reasons: dict

    def get(self, name: str) -> float | None:
        return getattr(self, f"{name}_s")

    def best_rt60(self) -> tuple[float | None, str | None]:
        """RT60 estimate used downstream: T30, else T20 (name of the source too)."""
        for name in ("t30", "t20"):
            value = self.get(name)
            if value is not None:
                return value, name
        return None, None

    def to_dict(self) -> dict:
        return {
            "edt_s": self.edt_s,
            "t20_s": self.t20_s,
            "t30_s": self.t30_s,
            "fit_r2_edt": self.fit_r2_edt,
            "fit_r2_t20": self.fit_r2_t20,
            "fit_r2_t30": self.fit_r2_t30,
            "reasons": dict(self.reasons),
        }


@dataclass(frozen=True)
class OctaveBandResult:
    center_hz: int
    lower_hz: float
    upper_hz: float
    metrics: DecayMetrics

    def to_dict(self) -> dict:
        return {
            "center_hz": self.center_hz,
            "lower_hz": self.lower_hz,
            "upper_hz": self.upper_hz,
            "metrics": self.metrics.to_dict(),
        }


def schroeder_edc(rir: ImpulseResponse) -> EnergyDecayCurve:
    """Backward-integrated energy in dB relative to the total energy.

    Values below -140 dB (including log of zero) are clamped to the floor.
    """
    h = rir.mono
    energy = np.cumsum((h * h)[::-1])[::-1]
    total = energy[0]
    if total <= 0.0:
        raise DegenerateInputError("impulse response has zero energy")
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(energy / total)
    db = np.maximum(db, EDC_FLOOR_DB)
    db[0] = 0.0
    # roundoff in the reverse cumsum can break monotonicity by a few ulps
    db = np.minimum.accumulate(db)
    return EnergyDecayCurve(db, rir.sample_rate)


def regression_slope(edc: EnergyDecayCurve, upper_db: float, lower_db: float) -> SlopeFit:
    """Least-squares line through every EDC sample with ``upper >= EDC >= lower``."""
    if not upper_db > lower_db:
        raise ValueError("upper_db must exceed lower_db")
    if upper_db > 0:
        raise ValueError("dB range must be at or below 0 dB")
    y_all = edc.values_db
    deepest = float(y_all.min())
    if deepest > lower_db:
        raise InsufficientDecayRangeError(
            f"EDC only reaches {deepest:.1f} dB, range needs {lower_db:.1f} dB", deepest
        )
    mask = (y_all <= upper_db) & (y_all >= lower_db)
    n = int(mask.sum())
    if n < MIN_FIT_SAMPLES:
        raise InsufficientDecayRangeError(
            f"{n} EDC samples between {upper_db} and {lower_db} dB "
            f"(need {MIN_FIT_SAMPLES})",
            deepest,
        )
    t = np.flatnonzero(mask) / edc.sample_rate
    y = y_all[mask]
    dt = t - t.mean()
    dy = y - y.mean()
    sxx = float(dt @ dt)
    slope = float(dt @ dy) / sxx
    intercept = float(y.mean() - slope * t.mean())
    syy = float(dy @ dy)
    r2 = 1.0 if syy == 0.0 else min(1.0, max(0.0, float(dt @ dy) ** 2 / (sxx * syy)))
    return SlopeFit(slope, intercept, r2, n)


def decay_metrics(edc: EnergyDecayCurve) -> DecayMetrics:
    values, r2s, reasons = {}, {}, {}
    for name, (upper, lower) in DECAY_RANGES.items():
        values[name] = r2s[name] = None
        try:
            fit = regression_slope(edc, upper, lower)
        except InsufficientDecayRangeError as exc:
            reasons[name] = f"insufficient decay range: {exc}"
            continue
        if not fit.slope_db_per_s < 0:
            reasons[name] = f"non-negative slope {fit.slope_db_per_s:.3g} dB/s"
            continue
        values[name] = -60.0 / fit.slope_db_per_s
        r2s[name] = fit.r2
    return DecayMetrics(
        edt_s=values["edt"],
        t20_s=values["t20"],
        t30_s=values["t30"],
        fit_r2_edt=r2s["edt"],
        fit_r2_t20=r2s["t20"],
        fit_r2_t30=r2s["t30"],
        reasons=reasons,
    )


def band_edges(center_hz: float) -> tuple[float, float]:
    return center_hz / math.sqrt(2.0), center_hz * math.sqrt(2.0)


def octave_sos(center_hz: float, sample_rate: int) -> np.ndarray:
    """Butterworth band-pass (4th-order prototype) as second-order sections."""
    lower, upper = band_edges(center_hz)
    if upper >= sample_rate / 2.0:
        raise BandOutOfRangeError(
            f"{center_hz} Hz band (upper edge {upper:.0f} Hz) exceeds Nyquist "
            f"{sample_rate / 2.0:.0f} Hz"
        )
    return signal.butter(FILTER_ORDER, [lower, upper], btype="bandpass", output="sos", fs=sample_rate)


def octave_filter(rir: ImpulseResponse, center_hz: float) -> ImpulseResponse:
    """Causal single-pass octave filtering; output length equals input length."""
    sos = octave_sos(center_hz, rir.sample_rate)
    return ImpulseResponse(signal.sosfilt(sos, rir.mono), rir.sample_rate)


def omitted_bands(sample_rate: int) -> list[int]:
    return [fc for fc in OCTAVE_CENTERS_HZ if band_edges(fc)[1] >= sample_rate / 2.0]


def octave_band_analysis(rir: ImpulseResponse) -> list[OctaveBandResult]:
    """Decay metrics for each standard octave band that fits below Nyquist."""
    results = []
    for fc in OCTAVE_CENTERS_HZ:
        lower, upper = band_edges(fc)
        try:
            band = octave_filter(rir, fc)
        except BandOutOfRangeError as exc:
            warnings.warn(f"octave band omitted: {exc}", stacklevel=2)
            continue
        try:
            metrics = decay_metrics(schroeder_edc(band))
        except DegenerateInputError as exc:
            reason = f"no energy in band: {exc}"
            metrics = DecayMetrics(None, None, None, None, None, None,
                                   {k: reason for k in DECAY_RANGES})
        results.append(OctaveBandResult(fc, lower, upper, metrics))
    return results
