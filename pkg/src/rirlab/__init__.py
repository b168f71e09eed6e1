"""Room impulse response analysis toolkit."""

from .auralize import convolve
from .compliance import ComplianceOutcome, ComplianceRule, builtin_rules, check
from .core import ImpulseResponse, PreprocessReport, RoomGeometry, load_wav, preprocess, save_wav, to_mono
from .decay import (
    DecayMetrics,
    EnergyDecayCurve,
    OctaveBandResult,
    decay_metrics,
    octave_band_analysis,
    octave_filter,
    regression_slope,
    schroeder_edc,
)
from .energy import (
    EnergyRatios,
    StiInputs,
    WellnessInputs,
    clarity_c80,
    definition_d50,
    drr,
    estimate_snr,
    sti_proxy,
    wellness_score,
)
from .simulate import SimulationConfig, generate_dataset, simulate_ism, validate_batch
from .spatial import first_order_reflections, iacc, room_modes, schroeder_frequency
from .spectral import magnitude_spectrum, spectrogram, waterfall

__version__ = "0.1.0"
