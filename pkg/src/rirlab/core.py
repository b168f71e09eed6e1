"""Domain types, WAV I/O and the preprocessing stage.

Every analysis function in the package consumes an :class:`ImpulseResponse`.
Samples are stored as a read-only ``(channels, n)`` float64 array.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ChannelCountError,
    ConfigError,
    DegenerateInputError,
    EmptyInputError,
    FormatError,
    UnsupportedFormatError,
)

MIN_SAMPLES = 16
TRIM_THRESHOLD = 1e-4
MAX_DURATION_S = 10.0
SPEED_OF_SOUND = 343.0

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class ImpulseResponse:
    """Sampled room impulse response with one or two channels."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        data = np.array(self.samples, dtype=np.float64)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2:
            raise ChannelCountError(f"samples must be 1-D or 2-D, got {data.ndim}-D")
        if data.shape[0] not in (1, 2):
            raise ChannelCountError(f"expected 1 or 2 channels, got {data.shape[0]}")
        if data.shape[1] < MIN_SAMPLES:
            raise DegenerateInputError(
                f"need at least {MIN_SAMPLES} samples per channel, got {data.shape[1]}"
            )
        if not np.all(np.isfinite(data)):
            raise DegenerateInputError("samples contain NaN or Inf")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def mono(self) -> np.ndarray:
        """The single channel of a mono response (raises for stereo)."""
        if self.channels != 1:
            raise ChannelCountError("operation requires a mono impulse response")
        return self.samples[0]


@dataclass(frozen=True)
class PreprocessReport:
    samples_trimmed_leading: int
    truncated: bool
    peak_before_normalize: float
    original_sample_rate: int

    def to_dict(self) -> dict:
        return {
            "samples_trimmed_leading": self.samples_trimmed_leading,
            "truncated": self.truncated,
            "peak_before_normalize": self.peak_before_normalize,
            "original_sample_rate": self.original_sample_rate,
        }


@dataclass(frozen=True)
class RoomGeometry:
    """Shoebox room of size ``length x width x height`` (x, y, z) in metres."""

    length: float
    width: float
    height: float
    source: tuple[float, float, float]
    receiver: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(float(v) for v in self.source))
        object.__setattr__(self, "receiver", tuple(float(v) for v in self.receiver))
        if min(self.length, self.width, self.height) <= 0:
            raise ConfigError("room dimensions must be positive")
        for name, p in (("source", self.source), ("receiver", self.receiver)):
            if len(p) != 3:
                raise ConfigError(f"{name} must have three coordinates")
            if not all(0 < c < d for c, d in zip(p, self.dims)):
                raise ConfigError(f"{name} {p} is not strictly inside the room {self.dims}")

    @property
    def dims(self) -> tuple[float, float, float]:
        return (self.length, self.width, self.height)

    @property
    def volume(self) -> float:
        return self.length * self.width * self.height

    @property
    def surface_area(self) -> float:
        L, W, H = self.dims
        return 2.0 * (L * W + L * H + W * H)

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(np.subtract(self.source, self.receiver)))

    def wall_clearance(self, point) -> float:
        """Smallest distance from ``point`` to any of the six walls."""
        return min(min(c, d - c) for c, d in zip(point, self.dims))

    def scaled(self, factor: float) -> RoomGeometry:
        return RoomGeometry(
            self.length * factor,
            self.width * factor,
            self.height * factor,
            tuple(c * factor for c in self.source),
            tuple(c * factor for c in self.receiver),
        )

    def to_dict(self) -> dict:
        return {
            "length_m": self.length,
            "width_m": self.width,
            "height_m": self.height,
            "source_xyz_m": list(self.source),
            "receiver_xyz_m": list(self.receiver),
        }


# --------------------------------------------------------------------------- WAV


def _read_chunks(data: bytes):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file")
    pos = 12
    chunks = {}
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size and cid != b"data":
            raise FormatError(f"chunk {cid!r} truncated")
        chunks.setdefault(cid, body)
        pos += 8 + size + (size & 1)
    return chunks


def load_wav(path) -> ImpulseResponse:
    """Read a PCM16/24/32 or float32 WAV file with one or two channels.

    Integer samples are scaled by ``2**(bits-1)`` into [-1, 1).
    """
    data = Path(path).read_bytes()
    chunks = _read_chunks(data)
    fmt = chunks.get(b"fmt ")
    if fmt is None or len(fmt) < 16:
        raise FormatError("missing or short fmt chunk")
    if b"data" not in chunks:
        raise FormatError("missing data chunk")
    code, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", fmt)
    if code == _WAVE_FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise FormatError("short WAVE_FORMAT_EXTENSIBLE fmt chunk")
        code = struct.unpack_from("<H", fmt, 24)[0]
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"{channels} channels (only mono/stereo supported)")
    if rate <= 0:
        raise FormatError("sample rate is zero")
    if code == _WAVE_FORMAT_PCM and bits in (16, 24, 32):
        pass
    elif code == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        pass
    else:
        raise UnsupportedFormatError(f"format code {code} with {bits} bits")
    width = bits // 8
    if block_align != width * channels:
        raise FormatError(f"block_align {block_align} inconsistent with {channels}x{bits} bits")

    raw = chunks[b"data"]
    n_frames = len(raw) // block_align
    if n_frames == 0:
        raise EmptyInputError(f"{path}: no audio frames")
    raw = raw[: n_frames * block_align]

    if code == _WAVE_FORMAT_IEEE_FLOAT:
        x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    elif bits == 16:
        x = np.frombuffer(raw, dtype="<i2") / 32768.0
    elif bits == 32:
        x = np.frombuffer(raw, dtype="<i4") / 2147483648.0
    else:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        x = ints / 8388608.0
    x = x.reshape(n_frames, channels).T
    return ImpulseResponse(x, rate)


def save_wav(path, rir: ImpulseResponse, encoding: str = "float32") -> None:
    """Write ``rir`` to ``path``.

    ``encoding`` is one of ``float32`` (default), ``pcm16``, ``pcm24``, ``pcm32``.
    Integer encodings clip to the representable range.
    """
    x = rir.samples.T  # frames x channels
    channels = rir.channels
    if encoding == "float32":
        code, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
        payload = x.astype("<f4").tobytes()
    elif encoding in ("pcm16", "pcm24", "pcm32"):
        code, bits = _WAVE_FORMAT_PCM, int(encoding[3:])
        scale = float(2 ** (bits - 1))
        ints = np.clip(np.round(x * scale), -scale, scale - 1).astype(np.int64)
        if bits == 16:
            payload = ints.astype("<i2").tobytes()
        elif bits == 32:
            payload = ints.astype("<i4").tobytes()
        else:
            u = (ints & 0xFFFFFF).astype("<u4").reshape(-1)
            payload = u.view(np.uint8).reshape(-1, 4)[:, :3].tobytes()
    else:
        raise ValueError(f"unknown encoding {encoding!r}")

    block_align = channels * bits // 8
    fmt = struct.pack(
        "<HHIIHH", code, channels, rir.sample_rate, rir.sample_rate * block_align, block_align, bits
    )
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) & 1:
        body += b"\x00"
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(body)) + body)


# ------------------------------------------------------------------ preprocessing


def to_mono(rir: ImpulseResponse) -> ImpulseResponse:
    """Average the channels of a stereo response; mono input is returned as is."""
    if rir.channels == 1:
        return rir
    return ImpulseResponse(rir.samples.mean(axis=0), rir.sample_rate)


def preprocess(rir: ImpulseResponse) -> tuple[ImpulseResponse, PreprocessReport]:
    """Trim leading silence, cap the length at 10 s and peak-normalise.

    The trim threshold is ``1e-4`` of the joint peak over all channels, and
    everything strictly before the first sample reaching it is dropped.
    Normalisation divides every channel by the same joint peak so that
    interchannel level differences survive.
    """
    x = rir.samples
    mag = np.abs(x).max(axis=0)
    peak = float(mag.max())
    if peak == 0.0:
        raise DegenerateInputError("impulse response is all zeros")

    start = int(np.argmax(mag >= TRIM_THRESHOLD * peak))
    x = x[:, start:]
    max_len = int(round(MAX_DURATION_S * rir.sample_rate))
    truncated = x.shape[1] > max_len
    if truncated:
        x = x[:, :max_len]
    if x.shape[1] < MIN_SAMPLES:
        raise DegenerateInputError(
            f"only {x.shape[1]} samples remain after trimming (need {MIN_SAMPLES})"
        )
    peak_after = float(np.abs(x).max())
    out = ImpulseResponse(x / peak_after, rir.sample_rate)
    report = PreprocessReport(
        samples_trimmed_leading=start,
        truncated=truncated,
        peak_before_normalize=peak_after,
        original_sample_rate=rir.sample_rate,
    )
    return out, report
