"""Shoebox image-source simulator, dataset generation and the validation battery."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SPEED_OF_SOUND, ImpulseResponse, RoomGeometry, preprocess, save_wav
from .decay import decay_metrics, regression_slope, schroeder_edc
from .energy import clarity_c80, definition_d50, drr
from .errors import ConfigError, InsufficientDecayRangeError, PlacementError
from .spatial import SURFACES, first_order_reflections, room_modes
from .spectral import magnitude_spectrum

MAX_ORDER_LIMIT = 20
WALL_CLEARANCE_M = 0.5
MIN_SEPARATION_M = 1.0
MAX_PLACEMENT_ATTEMPTS = 1000
TAILS = ("none", "exponential-noise")

# Ranges for random rooms.
LENGTH_RANGE_M = (3.0, 25.0)
WIDTH_RANGE_M = (3.0, 20.0)
HEIGHT_RANGE_M = (2.4, 8.0)
ABSORPTION_RANGE = (0.15, 0.54)

METADATA_FIELDS = (
    "length_m", "width_m", "height_m", "source_xyz_m", "receiver_xyz_m", "absorption",
    "max_order", "rt60_s", "drr_db", "c80_db", "d50", "sample_rate", "wav_path",
)


@dataclass(frozen=True)
class SimulationConfig:
    """One simulated source/receiver pair.

    ``absorption`` maps each surface name (``x0, xL, y0, yW, floor, ceiling``)
    to a broadband energy absorption coefficient; a single float applies to
    all six. ``duration_s=None`` picks a length long enough for the decay.
    """

    geom: RoomGeometry
    absorption: dict | float = 0.3
    max_order: int = 4
    sample_rate: int = 48000
    tail: str = "exponential-noise"
    seed: int = 0
    duration_s: float | None = None

    def __post_init__(self):
        alpha = self.absorption
        if not isinstance(alpha, dict):
            alpha = {s: float(alpha) for s in SURFACES}
        alpha = {s: float(alpha[s]) for s in SURFACES} if set(alpha) >= set(SURFACES) else None
        if alpha is None:
            raise ConfigError(f"absorption needs all surfaces {SURFACES}")
        if not all(0.0 < a < 1.0 for a in alpha.values()):
            raise ConfigError("absorption coefficients must lie strictly between 0 and 1")
        object.__setattr__(self, "absorption", alpha)
        if not 0 <= int(self.max_order) <= MAX_ORDER_LIMIT:
            raise ConfigError(f"max_order must be in [0, {MAX_ORDER_LIMIT}]")
        if self.tail not in TAILS:
            raise ConfigError(f"tail must be one of {TAILS}")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        g = self.geom
        for name, p in (("source", g.source), ("receiver", g.receiver)):
            if g.wall_clearance(p) < WALL_CLEARANCE_M:
                raise ConfigError(f"{name} closer than {WALL_CLEARANCE_M} m to a wall")
        if g.distance < MIN_SEPARATION_M:
            raise ConfigError(f"source and receiver closer than {MIN_SEPARATION_M} m")

    @property
    def mean_absorption(self) -> float:
        """Area-weighted mean absorption coefficient."""
        L, W, H = self.geom.dims
        areas = {"x0": W * H, "xL": W * H, "y0": L * H, "yW": L * H, "floor": L * W, "ceiling": L * W}
        return sum(areas[s] * self.absorption[s] for s in SURFACES) / sum(areas.values())

    def to_dict(self) -> dict:
        return {
            **self.geom.to_dict(),
            "absorption": dict(self.absorption),
            "max_order": self.max_order,
            "sample_rate": self.sample_rate,
            "tail": self.tail,
            "seed": self.seed,
            "duration_s": self.duration_s,
        }


@dataclass(frozen=True)
class ImageSources:
    """Image-source lattice for one config; row ``i`` is one arrival."""

    indices: np.ndarray  # (n, 3) lattice indices
    positions: np.ndarray  # (n, 3) metres
    distances: np.ndarray  # metres
    amplitudes: np.ndarray  # reflection product / distance

    @property
    def orders(self) -> np.ndarray:
        return np.abs(self.indices).sum(axis=1)

    @property
    def delays_s(self) -> np.ndarray:
        return self.distances / SPEED_OF_SOUND


@dataclass(frozen=True)
class RirRecord:
    rir: ImpulseResponse
    config: SimulationConfig
    metrics: dict
    wav_path: str | None = None


@dataclass
class ValidationReport:
    edc_r2: list
    median_edc_r2: float | None
    t30_measured: list
    t30_sabine: list
    sabine_correlation: float | None
    timing_error_samples: list
    max_timing_error_samples: float
    modal_check: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "energy_decay_linearity": {
                "range_db": [-5.0, -35.0],
                "per_record_r2": self.edc_r2,
                "median_r2": self.median_edc_r2,
            },
            "rt60_vs_sabine": {
                "measured_t30_s": self.t30_measured,
                "sabine_s": self.t30_sabine,
                "pearson_r": self.sabine_correlation,
            },
            "reflection_timing": {
                "per_record_max_error_samples": self.timing_error_samples,
                "max_error_samples": self.max_timing_error_samples,
            },
            "modal_frequencies": self.modal_check,
        }


# ------------------------------------------------------------------ image sources


def lattice_indices(max_order: int) -> np.ndarray:
    """Every integer triple with ``|i| + |j| + |k| <= max_order``."""
    r = np.arange(-max_order, max_order + 1)
    grid = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    return grid[np.abs(grid).sum(axis=1) <= max_order]


def wall_hits(index: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bounces off the low (coordinate 0) and high wall of one axis for lattice index ``index``."""
    pos = index > 0
    high = np.where(pos, (index + 1) // 2, (-index) // 2)
    low = np.where(pos, index // 2, (-index + 1) // 2)
    return low, high


def image_sources(config: SimulationConfig) -> ImageSources:
    g = config.geom
    idx = lattice_indices(config.max_order)
    beta = {s: math.sqrt(1.0 - a) for s, a in config.absorption.items()}
    walls = (("x0", "xL"), ("y0", "yW"), ("floor", "ceiling"))
    positions = np.empty(idx.shape, dtype=float)
    gain = np.ones(len(idx))
    for axis, (dim, src) in enumerate(zip(g.dims, g.source)):
        i = idx[:, axis]
        positions[:, axis] = i * dim + np.where(i % 2 == 0, src, dim - src)
        low, high = wall_hits(i)
        gain *= beta[walls[axis][0]] ** low * beta[walls[axis][1]] ** high
    dist = np.linalg.norm(positions - np.asarray(g.receiver), axis=1)
    return ImageSources(idx, positions, dist, gain / dist)


def eyring_rt60(config: SimulationConfig) -> float:
    g = config.geom
    return 0.161 * g.volume / (-g.surface_area * math.log(1.0 - config.mean_absorption))


def sabine_rt60(geom: RoomGeometry, mean_absorption: float) -> float:
    return 0.161 * geom.volume / (geom.surface_area * mean_absorption)


def _tail_level(images: ImageSources, config: SimulationConfig, rt60: float) -> float:
    """Energy per second at t=0 of the exponential envelope matching the ISM arrivals.

    The fit window runs from the first reflection to the nearest missing
    image (beyond it the lattice is incomplete). With too few arrivals in
    that window the diffuse-field value ``4*pi*c/V`` is used instead.
    """
    g = config.geom
    diffuse = 4.0 * math.pi * SPEED_OF_SOUND / g.volume
    orders = images.orders
    reflected = orders > 0
    if config.max_order < 2 or reflected.sum() < 20:
        return diffuse
    nxt = lattice_indices(config.max_order + 1)
    nxt = nxt[np.abs(nxt).sum(axis=1) == config.max_order + 1]
    missing = _image_distances(config, nxt)
    t_lo = float(images.delays_s[reflected].min())
    t_hi = float(missing.min()) / SPEED_OF_SOUND
    in_window = reflected & (images.delays_s >= t_lo) & (images.delays_s < t_hi)
    if t_hi <= t_lo or in_window.sum() < 20:
        return diffuse
    k = 6.0 * math.log(10.0) / rt60
    shape = (math.exp(-k * t_lo) - math.exp(-k * t_hi)) / k
    return float(np.sum(images.amplitudes[in_window] ** 2)) / shape


def _image_distances(config: SimulationConfig, idx: np.ndarray) -> np.ndarray:
    g = config.geom
    pos = np.empty(idx.shape, dtype=float)
    for axis, (dim, src) in enumerate(zip(g.dims, g.source)):
        i = idx[:, axis]
        pos[:, axis] = i * dim + np.where(i % 2 == 0, src, dim - src)
    return np.linalg.norm(pos - np.asarray(g.receiver), axis=1)


def default_duration(config: SimulationConfig, images: ImageSources | None = None) -> float:
    images = images or image_sources(config)
    last = float(images.delays_s.max())
    if config.tail == "none":
        return last + 0.05
    return min(10.0, last + 1.4 * eyring_rt60(config))


def simulate_ism(config: SimulationConfig) -> ImpulseResponse:
    """Render the image-source response, optionally with a noise tail.

    Each image contributes its amplitude at delay ``distance / c`` spread
    over two neighbouring samples by linear interpolation. The exponential
    noise tail decays at the Eyring rate of the room and is weighted by the
    fraction of image sources the truncated lattice is missing at each
    delay, so it takes over smoothly where the image sources thin out and
    carries the whole decay after the last deterministic arrival.
    """
    fs = config.sample_rate
    images = image_sources(config)
    duration = config.duration_s or default_duration(config, images)
    n = int(math.ceil(duration * fs)) + 2
    h = np.zeros(n)
    pos = images.delays_s * fs
    i0 = np.floor(pos).astype(np.int64)
    frac = pos - i0
    keep = i0 + 1 < n
    np.add.at(h, i0[keep], images.amplitudes[keep] * (1.0 - frac[keep]))
    np.add.at(h, i0[keep] + 1, images.amplitudes[keep] * frac[keep])

    if config.tail == "exponential-noise":
        rt60 = eyring_rt60(config)
        level = _tail_level(images, config, rt60)
        t = np.arange(n) / fs
        weight = missing_image_fraction(images, config.geom.volume, t)
        rng = np.random.default_rng(config.seed)
        envelope = np.sqrt(level * weight / fs) * 10.0 ** (-3.0 * t / rt60)
        h += envelope * rng.standard_normal(n)
    return ImpulseResponse(h, fs)


def missing_image_fraction(images: ImageSources, volume: float, t: np.ndarray,
                           bin_s: float = 0.01) -> np.ndarray:
    """Share of the full image lattice absent from ``images`` around each time in ``t``.

    Images fill space with density ``1/V``, so a complete lattice puts
    ``4*pi*((c*t2)**3 - (c*t1)**3) / (3*V)`` of them in each delay bin.
    Zero before the direct sound, one after the last rendered arrival.
    """
    delays = images.delays_s
    t0 = float(delays.min())
    edges = np.arange(t0, max(float(t[-1]), float(delays.max())) + 2 * bin_s, bin_s)
    counts, _ = np.histogram(delays, edges)
    r = SPEED_OF_SOUND * edges
    expected = 4.0 * math.pi * (r[1:] ** 3 - r[:-1] ** 3) / (3.0 * volume)
    frac = np.clip(1.0 - counts / expected, 0.0, 1.0)
    # the first bins are sparse by nature; treat them as complete
    frac[edges[1:] <= float(delays[images.orders > 0].min(initial=t0))] = 0.0
    centers = 0.5 * (edges[:-1] + edges[1:])
    out = np.interp(t, centers, frac, left=0.0, right=1.0)
    out[t > delays.max()] = 1.0
    out[t < t0] = 0.0
    return out


# ----------------------------------------------------------------------- datasets


@dataclass(frozen=True)
class DatasetRanges:
    """Uniform sampling ranges for random rooms (metres, absorption, optional m^3)."""

    length: tuple[float, float] = LENGTH_RANGE_M
    width: tuple[float, float] = WIDTH_RANGE_M
    height: tuple[float, float] = HEIGHT_RANGE_M
    absorption: tuple[float, float] = ABSORPTION_RANGE
    volume: tuple[float, float] | None = None


def record_metrics(rir: ImpulseResponse) -> dict:
    """The four precomputed metadata metrics, via the analysis modules."""
    mono, _ = preprocess(rir)
    dm = decay_metrics(schroeder_edc(mono))
    rt60, _ = dm.best_rt60()
    c80, _ = clarity_c80(mono)
    drr_db, _ = drr(mono)
    return {"rt60_s": rt60, "drr_db": drr_db, "c80_db": c80, "d50": definition_d50(mono)}


def sample_config(rng: np.random.Generator, ranges: DatasetRanges = DatasetRanges(),
                  max_order: int = 4, sample_rate: int = 48000,
                  tail: str = "exponential-noise") -> SimulationConfig:
    """Draw one room, absorption set and valid source/receiver placement."""
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        dims = [rng.uniform(*r) for r in (ranges.length, ranges.width, ranges.height)]
        if ranges.volume is not None and not ranges.volume[0] <= math.prod(dims) <= ranges.volume[1]:
            continue
        lo = WALL_CLEARANCE_M
        src = [rng.uniform(lo, d - lo) for d in dims]
        rcv = [rng.uniform(lo, d - lo) for d in dims]
        if math.dist(src, rcv) < MIN_SEPARATION_M:
            continue
        alpha = {s: float(rng.uniform(*ranges.absorption)) for s in SURFACES}
        seed = int(rng.integers(0, 2**31 - 1))
        return SimulationConfig(RoomGeometry(*dims, src, rcv), alpha, max_order, sample_rate, tail, seed)
    raise PlacementError(f"no valid room/placement after {MAX_PLACEMENT_ATTEMPTS} attempts")


def metadata_line(record: RirRecord) -> dict:
    cfg = record.config
    out = {
        **cfg.geom.to_dict(),
        "absorption": {"surfaces": dict(cfg.absorption), "mean": cfg.mean_absorption},
        "max_order": cfg.max_order,
        **record.metrics,
        "sample_rate": cfg.sample_rate,
        "wav_path": record.wav_path,
    }
    return {k: out[k] for k in METADATA_FIELDS}


def generate_dataset(n: int, seed: int = 0, out_dir=None, ranges: DatasetRanges = DatasetRanges(),
                     max_order: int = 4, sample_rate: int = 48000,
                     tail: str = "exponential-noise") -> list[RirRecord]:
    """Simulate ``n`` random rooms; deterministic for a given ``seed``.

    With ``out_dir`` set, each RIR is written as ``rir_NNNNN.wav`` (float32)
    next to a ``metadata.jsonl`` holding one object per record.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    children = np.random.SeedSequence(seed).spawn(n)
    records = []
    for i, child in enumerate(children):
        cfg = sample_config(np.random.default_rng(child), ranges, max_order, sample_rate, tail)
        rir = simulate_ism(cfg)
        wav_path = f"rir_{i:05d}.wav" if out_dir is not None else None
        records.append(RirRecord(rir, cfg, record_metrics(rir), wav_path))
    if out_dir is not None:
        write_dataset(records, out_dir)
    return records


def write_dataset(records: list[RirRecord], out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for rec in records:
        if rec.wav_path is not None:
            save_wav(out / rec.wav_path, rec.rir)
        lines.append(json.dumps(metadata_line(rec)))
    path = out / "metadata.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# --------------------------------------------------------------------- validation


def pearson(x, y) -> float | None:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2 or np.std(x) == 0 or np.std(y) == 0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


_FIRST_ORDER_INDEX = {
    "x0": (-1, 0, 0), "xL": (1, 0, 0), "y0": (0, -1, 0),
    "yW": (0, 1, 0), "floor": (0, 0, -1), "ceiling": (0, 0, 1),
}


def reflection_timing_error(record: RirRecord) -> float:
    """Worst gap, in samples, between simulated and geometric first-order arrivals.

    Compares the simulator's lattice delays with the closed-form first-order
    image positions, and checks that the rendered RIR carries energy on the
    two interpolation taps of each arrival (a missing arrival counts as inf).
    """
    cfg = record.config
    fs = cfg.sample_rate
    images = image_sources(cfg)
    lookup = {tuple(ix): d for ix, d in zip(images.indices.tolist(), images.delays_s)}
    direct, reflections = first_order_reflections(cfg.geom)
    expected = [((0, 0, 0), direct.arrival_s)]
    if cfg.max_order >= 1:
        expected += [(_FIRST_ORDER_INDEX[p.surface], p.arrival_s) for p in reflections]
    h = record.rir.mono
    worst = 0.0
    for idx, t_geo in expected:
        t_sim = lookup[idx]
        worst = max(worst, abs(t_sim - t_geo) * fs)
        tap = int(math.floor(t_sim * fs))
        if not np.any(h[tap : tap + 2] != 0.0):
            return math.inf
    return worst


def modal_check(config: SimulationConfig, n_peaks: int = 3) -> dict:
    """Lowest spectral peaks of a long, tail-free render vs analytic room modes."""
    cfg = SimulationConfig(config.geom, config.absorption, MAX_ORDER_LIMIT, config.sample_rate, "none", config.seed)
    spec = magnitude_spectrum(simulate_ism(cfg))
    modes = room_modes(cfg.geom, 400.0)
    distinct = sorted({round(m.f_hz, 6) for m in modes})
    if len(distinct) < n_peaks:
        return {"checked": False, "reason": "too few modes below 400 Hz"}
    f_lo, f_hi = 0.7 * distinct[0], 1.15 * distinct[n_peaks - 1]
    f, db = spec.freqs_hz, spec.magnitude_db
    band = np.flatnonzero((f >= f_lo) & (f <= f_hi))
    local = [i for i in band if db[i] >= db[i - 1] and db[i] >= db[i + 1]]
    top = sorted(sorted(local, key=lambda i: db[i], reverse=True)[:n_peaks])
    rows = []
    for i in top:
        nearest = min(distinct, key=lambda m: abs(m - f[i]))
        rows.append({"peak_hz": float(f[i]), "nearest_mode_hz": nearest,
                     "relative_error": abs(f[i] - nearest) / nearest})
    return {
        "checked": True,
        "room_m": list(cfg.geom.dims),
        "analytic_modes_hz": distinct[: n_peaks + 3],
        "peaks": rows,
        "max_relative_error": max((r["relative_error"] for r in rows), default=None),
    }


def validate_batch(records: list[RirRecord], designated: int = 0) -> ValidationReport:
    """Run the four physical-plausibility checks over a simulated batch."""
    if not records:
        raise ValueError("empty batch")
    r2s, measured, predicted, timing = [], [], [], []
    for rec in records:
        mono, _ = preprocess(rec.rir)
        edc = schroeder_edc(mono)
        try:
            r2s.append(regression_slope(edc, -5.0, -35.0).r2)
        except InsufficientDecayRangeError:
            r2s.append(None)
        t30 = decay_metrics(edc).t30_s
        if t30 is not None:
            measured.append(t30)
            predicted.append(sabine_rt60(rec.config.geom, rec.config.mean_absorption))
        timing.append(reflection_timing_error(rec))
    valid_r2 = [r for r in r2s if r is not None]
    return ValidationReport(
        edc_r2=r2s,
        median_edc_r2=float(np.median(valid_r2)) if valid_r2 else None,
        t30_measured=measured,
        t30_sabine=predicted,
        sabine_correlation=pearson(measured, predicted),
        timing_error_samples=timing,
        max_timing_error_samples=max(timing),
        modal_check=modal_check(records[designated].config),
    )
