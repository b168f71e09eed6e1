import json

import numpy as np
import pytest

from rirlab import report as rpt
from rirlab.core import load_wav
from rirlab.errors import SchemaError
from conftest import CLASSROOM


def test_full_report_with_room(classroom_rir):
    a = rpt.analyze(classroom_rir, "classroom", rpt.AnalysisOptions(geom=CLASSROOM, waterfall=True))
    r = a.report
    rpt.validate_schema(r)
    json.loads(rpt.dumps(r))
    assert len(r["octave_bands"]) == 6 and r["omitted_bands"] == []
    assert r["spatial"]["modes"]["count"] >= 1
    assert len(r["compliance"]) == 10
    assert r["spatial"]["iacc"]["value"] is None
    assert r["fingerprint"]["spatial"] is None and "spatial" in r["fingerprint"]["reasons"]
    assert 0 <= r["wellness"]["score"] <= 100
    assert r["timings_ms"]["total"] == pytest.approx(
        sum(v for k, v in r["timings_ms"].items() if k != "total"))
    assert a.waterfall is not None and len(a.modes) == r["spatial"]["modes"]["count"]
    assert len(a.reflections[1]) == 6


def test_report_without_room_or_volume(classroom_rir):
    r = rpt.analyze(classroom_rir, "x").report
    assert r["wellness"]["value"] is None and r["wellness"]["reason"]
    assert r["spatial"]["modes"]["value"] is None
    assert r["broadband"]["sti"]["value"] is not None


def test_stereo_iacc(stereo_wav):
    r = rpt.analyze(load_wav(stereo_wav), "s").report
    assert 0.9 < r["spatial"]["iacc"]["value"] <= 1.0
    assert r["fingerprint"]["spatial"] == pytest.approx(1 - r["spatial"]["iacc"]["value"])


def test_fingerprint():
    fp = rpt.fingerprint(3.0, 0.4, 0.7, 0.2)
    assert fp["clarity"] == pytest.approx(0.5)
    assert fp["definition"] == 0.4 and fp["intelligibility"] == 0.7
    assert fp["spatial"] == pytest.approx(0.8)
    assert rpt.fingerprint(50.0, 2.0, 1.5, 0.0)["clarity"] == 1.0


def test_sanitize_and_dumps():
    doc = rpt.sanitize({"a": np.float64(np.nan), "b": [np.int64(3), np.bool_(True), np.inf]})
    assert doc == {"a": None, "b": [3, True, None]}
    with pytest.raises(ValueError):
        rpt.dumps({"x": float("nan")})


def test_schema_checks(classroom_rir):
    r = rpt.analyze(classroom_rir, "x").report
    bad = dict(r, schema_version="9.9")
    with pytest.raises(SchemaError):
        rpt.validate_schema(bad)
    missing = {k: v for k, v in r.items() if k != "spectral"}
    with pytest.raises(SchemaError):
        rpt.validate_schema(missing)
    with pytest.raises(SchemaError):
        rpt.validate_schema([])


def test_markdown_sections_and_values(classroom_rir):
    r = json.loads(rpt.dumps(rpt.analyze(classroom_rir, "room.wav",
                                         rpt.AnalysisOptions(geom=CLASSROOM)).report))
    md = rpt.render_markdown(r)
    for heading in ("## Input file metadata", "## Computed metrics", "## Visualization data",
                    "## Standards compliance summary", "## Methodology notes and references"):
        assert heading in md
    d = r["broadband"]["decay"]
    assert f"| T30 (s) | {d['t30_s']:.3f} |" in md
    assert f"| C80 (dB) | {r['broadband']['energy']['c80_db']:.3f} |" in md
    rows = [line for line in md.splitlines()
            if any(line.startswith(f"| {c['space_type']} |") for c in r["compliance"])]
    assert len(rows) == 10


def test_csv_emitters(classroom_rir):
    a = rpt.analyze(classroom_rir, "x", rpt.AnalysisOptions(geom=CLASSROOM))
    edc = rpt.edc_csv(a.edc).splitlines()
    assert edc[0] == "time_s,edc_db" and len(edc) == len(a.edc.values_db) + 1
    trimmed = a.report["preprocess"]["samples_trimmed_leading"]
    assert len(a.edc.values_db) == classroom_rir.n_samples - trimmed
    modes = rpt.modes_csv(a.modes).splitlines()
    assert modes[0] == "f_hz,nx,ny,nz,type" and len(modes) == len(a.modes) + 1
    bands = rpt.bands_csv(a.bands).splitlines()
    assert len(bands) == 7
