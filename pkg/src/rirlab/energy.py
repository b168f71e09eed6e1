"""Early/late energy ratios, the STI proxy and the wellness score."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ImpulseResponse
from .errors import DegenerateInputError

SATURATION_DB = 100.0
SATURATION_FRACTION = 1e-12
DIRECT_WINDOW_S = 0.0025
DEFAULT_SNR_DB = 15.0
SNR_RANGE_DB = (0.0, 60.0)
MIN_SNR_DURATION_S = 0.2


@dataclass(frozen=True)
class EnergyRatios:
    c80_db: float
    c80_saturated: bool
    d50: float
    drr_db: float | None
    drr_saturated: bool = False

    def to_dict(self) -> dict:
        return {
            "c80_db": self.c80_db,
            "c80_saturated": self.c80_saturated,
            "d50": self.d50,
            "drr_db": self.drr_db,
            "drr_saturated": self.drr_saturated,
        }


@dataclass(frozen=True)
class StiInputs:
    rt60_s: float
    snr_db: float
    snr_source: str = "estimated"  # or "user-supplied" / "default"

    def __post_init__(self):
        if not self.rt60_s > 0:
            raise ValueError("rt60_s must be positive")


@dataclass(frozen=True)
class WellnessInputs:
    rt60_s: float
    sti: float
    d50: float
    c80_db: float
    volume_m3: float

    def __post_init__(self):
        if not self.volume_m3 > 0:
            raise ValueError("volume_m3 must be positive")


@dataclass(frozen=True)
class SnrEstimate:
    snr_db: float
    fallback: bool
    reason: str | None = None


def _energy(rir: ImpulseResponse) -> np.ndarray:
    h = rir.mono
    e = h * h
    if not e.sum() > 0.0:
        raise DegenerateInputError("impulse response has zero energy")
    return e


def _saturating_ratio_db(num: float, den: float) -> tuple[float, bool]:
    total = num + den
    if den < SATURATION_FRACTION * total:
        return SATURATION_DB, True
    if num < SATURATION_FRACTION * total:
        return -SATURATION_DB, True
    return 10.0 * math.log10(num / den), False


def clarity_c80(rir: ImpulseResponse) -> tuple[float, bool]:
    """C80 in dB and whether it hit the +/-100 dB saturation clamp.

    Sample ``floor(0.080 * fs)`` itself counts as early energy.
    """
    e = _energy(rir)
    n80 = int(math.floor(0.080 * rir.sample_rate))
    return _saturating_ratio_db(float(e[: n80 + 1].sum()), float(e[n80 + 1 :].sum()))


def definition_d50(rir: ImpulseResponse) -> float:
    e = _energy(rir)
    n50 = int(math.floor(0.050 * rir.sample_rate))
    return min(1.0, float(e[: n50 + 1].sum()) / float(e.sum()))


def _direct_window(rir: ImpulseResponse) -> slice:
    h = rir.mono
    peak = int(np.argmax(np.abs(h)))
    half = int(round(DIRECT_WINDOW_S * rir.sample_rate))
    return slice(max(0, peak - half), min(len(h), peak + half + 1))


def drr(rir: ImpulseResponse) -> tuple[float, bool]:
    """Direct-to-reverberant ratio: energy within +/-2.5 ms of the peak vs the rest."""
    e = _energy(rir)
    win = _direct_window(rir)
    direct = float(e[win].sum())
    return _saturating_ratio_db(direct, float(e.sum()) - direct)


def energy_ratios(rir: ImpulseResponse) -> EnergyRatios:
    c80, c80_sat = clarity_c80(rir)
    drr_db, drr_sat = drr(rir)
    return EnergyRatios(c80, c80_sat, definition_d50(rir), drr_db, drr_sat)


def estimate_snr(rir: ImpulseResponse) -> SnrEstimate:
    """Peak-to-noise-floor ratio in dB, clamped to [0, 60].

    The signal level is the peak instantaneous power in the direct window;
    the noise level is the mean square of the final 10 % of the response.
    Responses shorter than 0.2 s fall back to 15 dB.
    """
    if rir.duration < MIN_SNR_DURATION_S:
        return SnrEstimate(DEFAULT_SNR_DB, True, f"response shorter than {MIN_SNR_DURATION_S} s")
    e = _energy(rir)
    signal_level = float(e[_direct_window(rir)].max())
    tail = e[int(len(e) * 0.9) :]
    noise = float(tail.mean())
    lo, hi = SNR_RANGE_DB
    if noise <= signal_level * 10.0 ** (-hi / 10.0):
        return SnrEstimate(hi, False)
    snr = 10.0 * math.log10(signal_level / noise)
    return SnrEstimate(min(hi, max(lo, snr)), False)


def sti_proxy(inputs: StiInputs) -> float:
    """Reverberation/noise proxy for the speech transmission index, in [0.15, 1]."""
    r_t = 1.0 / (1.0 + (inputs.rt60_s / 0.8) ** 1.6)
    # overflow guard for very negative SNR; the term tends to zero there
    exponent = -(inputs.snr_db - 15.0) / 10.0
    r_s = 0.0 if exponent > 300 else 1.0 / (1.0 + 10.0**exponent)
    return 0.15 + 0.85 * (0.65 * r_t + 0.35 * r_s)


def _clip(x: float, lo: float = 0.0, hi: float = 1.0) -> float:
    return max(lo, min(x, hi))


def volume_adjustment(volume_m3: float) -> float:
    return 1.0 / (1.0 + max(0.0, volume_m3 - 300.0) / 800.0)


def wellness_terms(inputs: WellnessInputs) -> dict:
    return {
        "f_rt": 1.0 / (1.0 + (inputs.rt60_s / 0.9) ** 1.8),
        "f_sti": _clip(inputs.sti),
        "f_d50": _clip(inputs.d50),
        "f_c80": _clip((inputs.c80_db + 2.0) / 10.0),
        "v_adj": volume_adjustment(inputs.volume_m3),
    }


def wellness_score(inputs: WellnessInputs) -> float:
    t = wellness_terms(inputs)
    weighted = 0.45 * t["f_rt"] + 0.25 * t["f_sti"] + 0.20 * t["f_d50"] + 0.10 * t["f_c80"]
    return 100.0 * t["v_adj"] * weighted
