import numpy as np
import pytest

from rirlab.core import ImpulseResponse, RoomGeometry, save_wav
from rirlab.simulate import SimulationConfig, simulate_ism

from acceptance_log import RESULTS

CLASSROOM = RoomGeometry(9.0, 7.0, 3.0, (2.0, 3.0, 1.5), (6.5, 4.0, 1.2))


@pytest.fixture(scope="session")
def classroom_rir():
    return simulate_ism(SimulationConfig(CLASSROOM, 0.25, seed=4))


@pytest.fixture(scope="session")
def classroom_wav(tmp_path_factory, classroom_rir):
    path = tmp_path_factory.mktemp("wav") / "classroom.wav"
    save_wav(path, classroom_rir)
    return path


@pytest.fixture(scope="session")
def stereo_wav(tmp_path_factory, classroom_rir):
    h = classroom_rir.mono
    rng = np.random.default_rng(0)
    right = np.r_[0.0, h[:-1]] + 1e-3 * rng.standard_normal(len(h))
    path = tmp_path_factory.mktemp("wav") / "stereo.wav"
    save_wav(path, ImpulseResponse(np.vstack([h, right]), classroom_rir.sample_rate))
    return path


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
