import json

import numpy as np
import pytest

from rirlab.cli import main
from rirlab.core import ImpulseResponse, RoomGeometry, load_wav, save_wav
from rirlab.simulate import SimulationConfig, image_sources

ROOM = ["--room", "9x7x3", "--source", "2,3,1.5", "--receiver", "6.5,4,1.2"]


def test_analyze_with_room(classroom_wav, tmp_path, capsys):
    out = tmp_path / "r.json"
    edc = tmp_path / "edc.csv"
    modes = tmp_path / "modes.csv"
    code = main(["analyze", str(classroom_wav), *ROOM, "--json-out", str(out),
                 "--emit", str(edc), "--emit", str(modes), "--quiet"])
    assert code == 0
    r = json.loads(out.read_text())
    assert len(r["octave_bands"]) == 6
    assert r["spatial"]["modes"]["count"] >= 1
    assert len(r["compliance"]) == 10
    assert edc.read_text().startswith("time_s,edc_db\n")
    assert modes.read_text().startswith("f_hz,nx,ny,nz,type\n")


def test_analyze_prints_json(classroom_wav, capsys):
    assert main(["analyze", str(classroom_wav), "--quiet"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["wellness"]["value"] is None


def test_analyze_every_emission(classroom_wav, tmp_path):
    names = ["edc.json", "bands.csv", "octave.json", "spectrum.csv", "spectrogram.json",
             "waterfall.csv", "reflections.json", "fingerprint.csv", "fingerprint.json"]
    args = ["analyze", str(classroom_wav), *ROOM, "--json-out", str(tmp_path / "r.json"), "--quiet"]
    for n in names:
        args += ["--emit", str(tmp_path / n)]
    assert main(args) == 0
    for n in names:
        assert (tmp_path / n).stat().st_size > 0
    assert len(json.loads((tmp_path / "reflections.json").read_text())) == 7


def test_analyze_exit_codes(tmp_path, classroom_wav):
    assert main(["analyze", str(tmp_path / "missing.wav")]) == 2
    junk = tmp_path / "junk.wav"
    junk.write_bytes(b"not a wav file at all")
    assert main(["analyze", str(junk)]) == 2
    silent = tmp_path / "silent.wav"
    save_wav(silent, ImpulseResponse(np.zeros(4800), 48000))
    assert main(["analyze", str(silent), "--quiet"]) == 3
    assert main(["analyze", str(classroom_wav), "--room", "9x7x3"]) == 64
    assert main(["analyze", str(classroom_wav), "--emit", "bogus.txt"]) == 64
    with pytest.raises(SystemExit) as info:
        main(["analyze", str(classroom_wav), "--no-such-flag"])
    assert info.value.code == 64


def test_simulate_deterministic_and_validate(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--out", str(a), "--n", "3", "--seed", "7", "--quiet", "--validate"]) == 0
    assert main(["simulate", "--out", str(b), "--n", "3", "--seed", "7", "--quiet"]) == 0
    assert (a / "metadata.jsonl").read_bytes() == (b / "metadata.jsonl").read_bytes()
    v = json.loads((a / "validation.json").read_text())
    assert set(v) == {"energy_decay_linearity", "rt60_vs_sabine", "reflection_timing", "modal_frequencies"}


def test_simulate_order_one(tmp_path):
    assert main(["simulate", "--out", str(tmp_path), "--n", "2", "--order", "1",
                 "--tail", "none", "--quiet"]) == 0
    for line in (tmp_path / "metadata.jsonl").read_text().splitlines():
        m = json.loads(line)
        assert m["max_order"] == 1
        geom = RoomGeometry(m["length_m"], m["width_m"], m["height_m"],
                            m["source_xyz_m"], m["receiver_xyz_m"])
        cfg = SimulationConfig(geom, m["absorption"]["surfaces"], 1, tail="none")
        im = image_sources(cfg)
        assert len(im.distances) == 7
        h = load_wav(tmp_path / m["wav_path"]).mono
        taps = np.floor(im.delays_s * 48000).astype(int)
        allowed = np.zeros(len(h), bool)
        allowed[taps] = allowed[taps + 1] = True
        assert not np.any(h[~allowed])


def test_simulate_fixed_room_and_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"room": [6, 5, 3], "source": [1, 1, 1], "receiver": [4, 3, 1.5],
                               "absorption": 0.4, "order": 2}))
    assert main(["simulate", "--out", str(tmp_path / "o"), "--config", str(cfg), "--quiet"]) == 0
    m = json.loads((tmp_path / "o" / "metadata.jsonl").read_text())
    assert m["length_m"] == 6 and m["max_order"] == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"colour": "red"}))
    assert main(["simulate", "--out", str(tmp_path / "p"), "--config", str(bad)]) == 64
    assert main(["simulate", "--out", str(tmp_path / "q"), "--room", "6x5x3", "--source", "0.1,1,1",
                 "--receiver", "4,3,1.5"]) == 64


def test_auralize(tmp_path, capsys):
    dry = tmp_path / "dry.wav"
    x = np.random.default_rng(0).uniform(-0.3, 0.3, 2000)
    save_wav(dry, ImpulseResponse(x, 16000))
    rir = tmp_path / "rir.wav"
    h = np.zeros(48)
    h[0] = 1.0
    save_wav(rir, ImpulseResponse(h, 16000))
    out = tmp_path / "wet.wav"
    assert main(["auralize", str(dry), str(rir), str(out), "--quiet"]) == 0
    y = load_wav(out).mono
    assert np.max(np.abs(y)) == pytest.approx(0.95, abs=1e-6)
    np.testing.assert_allclose(y[:2000], x * 0.95 / np.max(np.abs(x)), atol=1e-6)

    rir48 = tmp_path / "rir48.wav"
    save_wav(rir48, ImpulseResponse(np.r_[1.0, np.zeros(143)], 48000))
    capsys.readouterr()
    assert main(["auralize", str(dry), str(rir48), str(out), "--quiet"]) == 0
    assert "resampling" in capsys.readouterr().err
    assert main(["auralize", str(tmp_path / "nope.wav"), str(rir), str(out)]) == 2


def test_report_command(classroom_wav, tmp_path):
    rj = tmp_path / "r.json"
    assert main(["analyze", str(classroom_wav), *ROOM, "--json-out", str(rj), "--quiet"]) == 0
    md = tmp_path / "r.md"
    assert main(["report", str(rj), "--format", "markdown", "-o", str(md), "--quiet"]) == 0
    text = md.read_text()
    assert text.count("\n## ") == 5
    t30 = json.loads(rj.read_text())["broadband"]["decay"]["t30_s"]
    assert f"{t30:.3f}" in text

    doc = json.loads(rj.read_text())
    doc["schema_version"] = "0.1"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["report", str(bad)]) == 4
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{")
    assert main(["report", str(garbage)]) == 4
