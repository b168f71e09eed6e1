"""IACC, rectangular-room modes, Schroeder frequency and first-order reflections."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import SPEED_OF_SOUND, ImpulseResponse, RoomGeometry
from .errors import ChannelCountError, DegenerateInputError

IACC_MAX_LAG_S = 0.001
MODE_TYPES = {1: "axial", 2: "tangential", 3: "oblique"}
SURFACES = ("x0", "xL", "y0", "yW", "floor", "ceiling")


@dataclass(frozen=True)
class RoomMode:
    f_hz: float
    indices: tuple[int, int, int]
    mode_type: str


@dataclass(frozen=True)
class ReflectionPath:
    image_source: tuple[float, float, float]
    surface: str | None  # None for the direct path
    path_length: float
    arrival_s: float

    def to_dict(self) -> dict:
        return {
            "surface": self.surface or "direct",
            "image_source": list(self.image_source),
            "path_length_m": self.path_length,
            "arrival_s": self.arrival_s,
        }


def iacc(rir: ImpulseResponse, integration_limit_s: float | None = 0.080) -> float:
    """Interaural cross-correlation coefficient over lags within +/-1 ms.

    Both channels are cut to ``[0, integration_limit_s]`` (``None`` keeps the
    full length) and correlated on the sample grid.
    """
    if rir.channels != 2:
        raise ChannelCountError("IACC needs a two-channel impulse response")
    n = rir.n_samples
    if integration_limit_s is not None:
        n = min(n, int(round(integration_limit_s * rir.sample_rate)))
    left, right = rir.samples[0, :n], rir.samples[1, :n]
    e_l, e_r = float(left @ left), float(right @ right)
    if e_l <= 0.0 or e_r <= 0.0:
        raise DegenerateInputError("a channel has no energy inside the IACC window")
    max_lag = int(math.floor(IACC_MAX_LAG_S * rir.sample_rate))
    max_lag = min(max_lag, n - 1)
    best = 0.0
    for lag in range(-max_lag, max_lag + 1):
        if lag >= 0:
            c = float(left[: n - lag] @ right[lag:])
        else:
            c = float(left[-lag:] @ right[: n + lag])
        best = max(best, abs(c))
    return min(1.0, best / math.sqrt(e_l * e_r))


def mode_frequency(indices, dims, c: float = SPEED_OF_SOUND) -> float:
    return c / 2.0 * math.sqrt(sum((n / d) ** 2 for n, d in zip(indices, dims)))


def room_modes(geom: RoomGeometry, f_max_hz: float) -> list[RoomMode]:
    """All modes up to ``f_max_hz``, sorted by frequency, degenerate ones kept."""
    if not f_max_hz > 0:
        raise ValueError("f_max_hz must be positive")
    dims = geom.dims
    bounds = [int(math.ceil(2.0 * f_max_hz * d / SPEED_OF_SOUND)) for d in dims]
    modes = []
    for idx in itertools.product(*(range(b + 1) for b in bounds)):
        nonzero = sum(1 for i in idx if i)
        if nonzero == 0:
            continue
        f = mode_frequency(idx, dims)
        if f <= f_max_hz:
            modes.append(RoomMode(f, idx, MODE_TYPES[nonzero]))
    modes.sort(key=lambda m: (m.f_hz, m.indices))
    return modes


def schroeder_frequency(rt60_s: float, volume_m3: float, formula: str = "standard") -> float:
    """Modal/diffuse crossover frequency in Hz.

    ``standard`` is ``2000 * sqrt(RT60 / V)``; ``literal`` evaluates
    ``4 * RT60 * V**(1/3)`` for side-by-side comparison only.
    """
    if not (rt60_s > 0 and volume_m3 > 0):
        raise ValueError("rt60_s and volume_m3 must be positive")
    if formula == "standard":
        return 2000.0 * math.sqrt(rt60_s / volume_m3)
    if formula == "literal":
        return 4.0 * rt60_s * volume_m3 ** (1.0 / 3.0)
    raise ValueError(f"unknown formula {formula!r}")


def first_order_images(geom: RoomGeometry) -> dict[str, tuple[float, float, float]]:
    L, W, H = geom.dims
    sx, sy, sz = geom.source
    return {
        "x0": (-sx, sy, sz),
        "xL": (2 * L - sx, sy, sz),
        "y0": (sx, -sy, sz),
        "yW": (sx, 2 * W - sy, sz),
        "floor": (sx, sy, -sz),
        "ceiling": (sx, sy, 2 * H - sz),
    }


def _path(point, surface, receiver) -> ReflectionPath:
    d = float(np.linalg.norm(np.subtract(point, receiver)))
    return ReflectionPath(tuple(point), surface, d, d / SPEED_OF_SOUND)


def first_order_reflections(geom: RoomGeometry) -> tuple[ReflectionPath, list[ReflectionPath]]:
    """Direct path and the six single-bounce paths (one per wall)."""
    direct = _path(geom.source, None, geom.receiver)
    images = first_order_images(geom)
    return direct, [_path(images[s], s, geom.receiver) for s in SURFACES]


def modes_summary(modes: list[RoomMode], f_max_hz: float, lowest: int = 10) -> dict:
    counts = {t: 0 for t in MODE_TYPES.values()}
    for m in modes:
        counts[m.mode_type] += 1
    return {
        "f_max_hz": f_max_hz,
        "count": len(modes),
        "counts_by_type": counts,
        "lowest": [
            {"f_hz": m.f_hz, "indices": list(m.indices), "type": m.mode_type}
            for m in modes[:lowest]
        ],
    }
