import math

import numpy as np
import pytest

from rirlab.core import ImpulseResponse, RoomGeometry
from rirlab.errors import ChannelCountError, DegenerateInputError
from rirlab.spatial import (
    first_order_reflections,
    iacc,
    mode_frequency,
    modes_summary,
    room_modes,
    schroeder_frequency,
)

FS = 48000


def _stereo(left, right):
    return ImpulseResponse(np.vstack([left, right]), FS)


def _noise(seed, n=int(0.08 * FS)):
    return np.random.default_rng(seed).standard_normal(n)


def test_iacc_identical_delayed_and_inverted():
    x = _noise(0)
    assert iacc(_stereo(x, x)) == pytest.approx(1.0)
    shift = int(0.0005 * FS)
    delayed = np.r_[np.zeros(shift), x[:-shift]]
    assert iacc(_stereo(x, delayed)) > 0.99
    assert iacc(_stereo(x, -x)) == pytest.approx(1.0)


def test_iacc_outside_lag_range_is_low():
    x = np.zeros(4000)
    x[100] = 1.0
    y = np.zeros(4000)
    y[100 + int(0.002 * FS)] = 1.0
    assert iacc(_stereo(x, y)) == 0.0


def test_iacc_independent_noise():
    vals = np.array([iacc(_stereo(_noise(2 * s), _noise(2 * s + 1))) for s in range(200)])
    assert np.mean(vals < 0.15) >= 0.99


def test_iacc_window_cut():
    x = _noise(5, n=2 * FS)
    y = x.copy()
    y[int(0.08 * FS):] = _noise(6, n=len(x) - int(0.08 * FS))
    assert iacc(_stereo(x, y)) == pytest.approx(1.0)
    assert iacc(_stereo(x, y), integration_limit_s=None) < 0.2


def test_iacc_errors():
    with pytest.raises(ChannelCountError):
        iacc(ImpulseResponse(_noise(0), FS))
    silent = np.r_[np.zeros(int(0.08 * FS)), np.ones(100)]
    with pytest.raises(DegenerateInputError):
        iacc(_stereo(silent, silent))


def _geom(L, W, H):
    return RoomGeometry(L, W, H, (L / 3, W / 3, H / 3), (2 * L / 3, 2 * W / 3, H / 2))


def test_cube_axial_mode():
    modes = room_modes(_geom(3.43, 3.43, 3.43), 60)
    assert len(modes) == 3
    assert all(m.f_hz == pytest.approx(50.0) and m.mode_type == "axial" for m in modes)
    assert sorted(m.indices for m in modes) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_modes_against_nested_loops():
    L, W, H, fmax = 6.1, 4.3, 2.9, 250.0
    expected = []
    for nz in range(40):
        for ny in range(40):
            for nx in range(40):
                if nx == ny == nz == 0:
                    continue
                f = 343 / 2 * math.sqrt((nx / L) ** 2 + (ny / W) ** 2 + (nz / H) ** 2)
                if f <= fmax:
                    expected.append(((nx, ny, nz), f))
    got = room_modes(_geom(L, W, H), fmax)
    assert sorted(m.indices for m in got) == sorted(i for i, _ in expected)
    assert [m.f_hz for m in got] == sorted(m.f_hz for m in got)
    types = {m.indices: m.mode_type for m in got}
    assert types[(1, 0, 0)] == "axial" and types[(1, 1, 0)] == "tangential"
    assert types[(1, 1, 1)] == "oblique"
    summary = modes_summary(got, fmax)
    assert summary["count"] == len(expected)
    assert sum(summary["counts_by_type"].values()) == len(expected)


def test_mode_frequency_formula():
    assert mode_frequency((1, 0, 0), (5, 4, 3)) == pytest.approx(34.3)


def test_schroeder_frequency():
    assert schroeder_frequency(1.0, 100.0) == pytest.approx(200.0)
    assert schroeder_frequency(1.0, 1000.0, "literal") == pytest.approx(40.0)
    with pytest.raises(ValueError):
        schroeder_frequency(1.0, 100.0, "other")
    with pytest.raises(ValueError):
        schroeder_frequency(0.0, 100.0)


def test_first_order_reflections_example():
    g = RoomGeometry(10, 8, 3, (2, 2, 1.5), (7, 6, 1.5))
    direct, refl = first_order_reflections(g)
    assert direct.path_length == pytest.approx(math.hypot(5, 4))
    assert direct.surface is None and direct.to_dict()["surface"] == "direct"
    by = {p.surface: p for p in refl}
    assert by["x0"].image_source == (-2, 2, 1.5)
    assert by["x0"].path_length == pytest.approx(math.hypot(9, 4))
    assert by["floor"].image_source == (2, 2, -1.5)
    assert by["floor"].path_length == pytest.approx(math.sqrt(25 + 16 + 9))
    assert all(p.path_length > direct.path_length for p in refl)
    assert all(p.arrival_s == pytest.approx(p.path_length / 343) for p in refl)
