"""End-to-end analysis pipeline, the JSON metrics report and its Markdown rendering."""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import compliance, decay, energy, spatial, spectral
from .core import ImpulseResponse, RoomGeometry, preprocess, to_mono
from .errors import DegenerateInputError, SchemaError

SCHEMA_VERSION = "1.0"
REQUIRED_KEYS = {
    "schema_version": str,
    "source": str,
    "preprocess": dict,
    "broadband": dict,
    "octave_bands": list,
    "spectral": dict,
    "spatial": dict,
    "wellness": dict,
    "compliance": list,
    "fingerprint": dict,
    "timings_ms": dict,
}


def unavailable(reason: str) -> dict:
    return {"value": None, "reason": reason}


@dataclass
class AnalysisOptions:
    geom: RoomGeometry | None = None
    volume_m3: float | None = None
    snr_db: float | None = None
    modes_fmax_hz: float = 300.0
    schroeder_formula: str = "standard"
    iacc_limit_s: float | None = 0.080
    spectrogram_window_s: float = 0.025
    spectrogram_hop_s: float = 0.010
    waterfall: bool = False
    waterfall_slices: int = 40


@dataclass
class Analysis:
    """The JSON-ready report plus the arrays behind the optional emissions."""

    report: dict
    edc: decay.EnergyDecayCurve
    bands: list
    spectrum: spectral.SpectrumFrame
    spectrogram: spectral.TimeFrequencyGrid | None
    waterfall: spectral.TimeFrequencyGrid | None = None
    modes: list | None = None
    reflections: tuple | None = None


class _Timer:
    def __init__(self, timings: dict):
        self.timings = timings

    def stage(self, name: str):
        timer = self

        class _Stage:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.timings[name] = timer.timings.get(name, 0.0) + (time.perf_counter() - self.t0) * 1e3
                return False

        return _Stage()


def fingerprint(c80_db: float | None, d50: float | None, sti: float | None,
                iacc: float | None) -> dict:
    """Four-axis summary, each axis in [0, 1] or null with a reason."""
    clip = lambda v: max(0.0, min(1.0, v))  # noqa: E731
    fp = {
        "clarity": None if c80_db is None else clip((c80_db + 2.0) / 10.0),
        "definition": None if d50 is None else clip(d50),
        "spatial": None if iacc is None else clip(1.0 - iacc),
        "intelligibility": None if sti is None else clip(sti),
    }
    reasons = {}
    if iacc is None:
        reasons["spatial"] = "IACC unavailable (mono input)"
    for k in ("clarity", "definition", "intelligibility"):
        if fp[k] is None:
            reasons[k] = "underlying metric unavailable"
    fp["reasons"] = reasons
    return fp


def analyze(rir: ImpulseResponse, source: str, options: AnalysisOptions | None = None,
            load_ms: float = 0.0) -> Analysis:
    """Run every analysis stage on ``rir`` and assemble the metrics report."""
    opts = options or AnalysisOptions()
    timings = {"load": load_ms}
    timer = _Timer(timings)

    with timer.stage("preprocess"):
        pre, pre_report = preprocess(rir)
        mono = to_mono(pre)

    with timer.stage("broadband"):
        edc = decay.schroeder_edc(mono)
        dm = decay.decay_metrics(edc)
        ratios = energy.energy_ratios(mono)
        rt60, rt60_source = dm.best_rt60()
        if opts.snr_db is not None:
            snr = energy.SnrEstimate(opts.snr_db, False)
            snr_source = "user-supplied"
        else:
            snr = energy.estimate_snr(mono)
            snr_source = "default" if snr.fallback else "estimated"
        if rt60 is not None:
            sti_in = energy.StiInputs(rt60, snr.snr_db, snr_source)
            sti_value = energy.sti_proxy(sti_in)
            sti = {
                "value": sti_value,
                "inputs": {"rt60_s": rt60, "rt60_source": rt60_source,
                           "snr_db": snr.snr_db, "snr_source": snr_source},
                "advisory": "proxy-based estimate, not IEC 60268-16",
            }
            if snr.reason:
                sti["inputs"]["snr_note"] = snr.reason
        else:
            sti_value = None
            sti = unavailable("no RT60 estimate (T30 and T20 both unavailable)")

    with timer.stage("octave_bands"):
        with warnings.catch_warnings():
            # omitted bands are recorded below instead
            warnings.simplefilter("ignore")
            bands = decay.octave_band_analysis(mono)
        omitted = [{"center_hz": fc, "reason": "band exceeds Nyquist"}
                   for fc in decay.omitted_bands(mono.sample_rate)]

    with timer.stage("spectral"):
        spec = spectral.magnitude_spectrum(mono) if mono.n_samples >= 64 else None
        try:
            sgram = spectral.spectrogram(mono, opts.spectrogram_window_s, opts.spectrogram_hop_s)
        except spectral.LengthError:
            sgram = None
        wfall = spectral.waterfall(mono, opts.waterfall_slices) if opts.waterfall and mono.n_samples >= 256 else None
        spectral_section = {
            "spectrum": unavailable("response shorter than 64 samples") if spec is None else {
                "n_fft": spec.n_fft,
                "resolution_hz": float(spec.freqs_hz[1]),
                "peak_hz": spec.peak_hz(20.0),
            },
            "spectrogram": unavailable("response shorter than one window") if sgram is None else {
                "frames": len(sgram.times_s),
                "bins": len(sgram.freqs_hz),
                "window_s": opts.spectrogram_window_s,
                "hop_s": opts.spectrogram_hop_s,
                "frequency_scale": "linear",
            },
        }

    with timer.stage("spatial"):
        iacc_value = None
        if pre.channels == 2:
            try:
                iacc_value = spatial.iacc(pre, opts.iacc_limit_s)
                iacc_entry = {"value": iacc_value, "integration_limit_s": opts.iacc_limit_s}
            except DegenerateInputError as exc:
                iacc_entry = unavailable(str(exc))
        else:
            iacc_entry = unavailable("mono input")
        volume = opts.volume_m3 or (opts.geom.volume if opts.geom else None)
        modes = reflections = None
        if opts.geom is not None:
            modes = spatial.room_modes(opts.geom, opts.modes_fmax_hz)
            reflections = spatial.first_order_reflections(opts.geom)
            direct, refl = reflections
            modes_entry = spatial.modes_summary(modes, opts.modes_fmax_hz)
            refl_entry = [direct.to_dict()] + [p.to_dict() for p in refl]
            room_entry = {**opts.geom.to_dict(), "volume_m3": opts.geom.volume}
        else:
            modes_entry = unavailable("room geometry not provided")
            refl_entry = unavailable("room geometry not provided")
            room_entry = unavailable("room geometry not provided")
        if volume is not None and rt60 is not None:
            schroeder_entry = {
                "value": spatial.schroeder_frequency(rt60, volume, opts.schroeder_formula),
                "formula": opts.schroeder_formula,
                "standard_hz": spatial.schroeder_frequency(rt60, volume, "standard"),
                "literal_hz": spatial.schroeder_frequency(rt60, volume, "literal"),
            }
        else:
            schroeder_entry = unavailable("needs RT60 and room volume")
        spatial_section = {
            "iacc": iacc_entry,
            "room": room_entry,
            "modes": modes_entry,
            "schroeder_hz": schroeder_entry,
            "reflections": refl_entry,
        }

    with timer.stage("wellness"):
        if volume is None:
            wellness = unavailable("room volume not provided")
        elif rt60 is None or sti_value is None:
            wellness = unavailable("RT60/STI unavailable")
        else:
            w_in = energy.WellnessInputs(rt60, sti_value, ratios.d50, ratios.c80_db, volume)
            wellness = {
                "score": energy.wellness_score(w_in),
                "inputs": {"rt60_s": rt60, "sti": sti_value, "d50": ratios.d50,
                           "c80_db": ratios.c80_db, "volume_m3": volume},
                "terms": energy.wellness_terms(w_in),
            }
        fp = fingerprint(ratios.c80_db, ratios.d50, sti_value, iacc_value)

    with timer.stage("compliance"):
        compliance_rows = []
        if rt60 is not None:
            compliance_rows = [o.to_dict() for o in compliance.check_all(rt60, sti_value, rt60_source)]

    timings["total"] = sum(timings.values())
    report = {
        "schema_version": SCHEMA_VERSION,
        "source": source,
        "input": {"sample_rate": rir.sample_rate, "channels": rir.channels,
                  "n_samples": rir.n_samples, "duration_s": rir.duration},
        "preprocess": pre_report.to_dict(),
        "broadband": {"decay": dm.to_dict(), "energy": ratios.to_dict(), "sti": sti},
        "octave_bands": [b.to_dict() for b in bands],
        "omitted_bands": omitted,
        "spectral": spectral_section,
        "spatial": spatial_section,
        "wellness": wellness,
        "compliance": compliance_rows,
        "compliance_note": None if compliance_rows else "no RT60 estimate available",
        "fingerprint": fp,
        "timings_ms": timings,
    }
    return Analysis(sanitize(report), edc, bands, spec, sgram, wfall, modes, reflections)


def sanitize(obj):
    """JSON-safe copy: numpy scalars to Python, NaN/Inf to None."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False)


def validate_schema(doc) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError("report must be a JSON object")
    for key, kind in REQUIRED_KEYS.items():
        if key not in doc:
            raise SchemaError(f"missing key {key!r}")
        if not isinstance(doc[key], kind):
            raise SchemaError(f"key {key!r} should be {kind.__name__}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {doc['schema_version']!r}")
    for key in ("decay", "energy", "sti"):
        if key not in doc["broadband"]:
            raise SchemaError(f"broadband section lacks {key!r}")
    return doc


# --------------------------------------------------------------------- emissions


def edc_csv(edc: decay.EnergyDecayCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["time_s", "edc_db"])
    for t, v in zip(edc.times.tolist(), edc.values_db.tolist()):
        w.writerow([repr(t), f"{v:.6f}"])
    return buf.getvalue()


def modes_csv(modes) -> str:
    lines = ["f_hz,nx,ny,nz,type"]
    lines += [f"{m.f_hz:.6f},{m.indices[0]},{m.indices[1]},{m.indices[2]},{m.mode_type}" for m in modes]
    return "\n".join(lines) + "\n"


def bands_csv(bands) -> str:
    lines = ["center_hz,lower_hz,upper_hz,edt_s,t20_s,t30_s"]
    fmt = lambda v: "" if v is None else f"{v:.6f}"  # noqa: E731
    for b in bands:
        m = b.metrics
        lines.append(f"{b.center_hz},{b.lower_hz:.3f},{b.upper_hz:.3f},{fmt(m.edt_s)},{fmt(m.t20_s)},{fmt(m.t30_s)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------- markdown


def _f(v, unit: str = "") -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (int, float)):
        return f"{v:.3f}{unit}"
    return str(v)


def _value(entry) -> str:
    if isinstance(entry, dict) and entry.get("value") is None and "reason" in entry:
        return f"n/a ({entry['reason']})"
    if isinstance(entry, dict):
        return _f(entry.get("value"))
    return _f(entry)


_MARK = {"pass": "PASS", "fail": "FAIL", "not-applicable": "N/A"}


def _mark(flag: bool | None) -> str:
    return "N/A" if flag is None else ("PASS" if flag else "FAIL")

REFERENCES = (
    "M. R. Schroeder, \"New method of measuring reverberation time\", JASA 37 (1965).",
    "ISO 3382-1:2009 / ISO 3382-2:2008, measurement of room acoustic parameters.",
    "ANSI/ASA S12.60, acoustical performance criteria for schools.",
    "IEC 60268-16, objective rating of speech intelligibility by STI.",
    "T. Houtgast and H. J. M. Steeneken, \"A review of the MTF concept in room acoustics\", JASA 77 (1985).",
    "W. C. Sabine, Collected Papers on Acoustics (1922); C. F. Eyring, JASA 1 (1930).",
)


def render_markdown(doc: dict) -> str:
    validate_schema(doc)
    bb = doc["broadband"]
    d, e, sti = bb["decay"], bb["energy"], bb["sti"]
    pre = doc["preprocess"]
    inp = doc.get("input", {})
    out = [f"# Room acoustics report: {doc['source']}", ""]

    out += ["## Input file metadata", "",
            "| Field | Value |", "|---|---|",
            f"| Source | {doc['source']} |",
            f"| Sample rate (Hz) | {inp.get('sample_rate', pre.get('original_sample_rate'))} |",
            f"| Channels | {inp.get('channels', 'n/a')} |",
            f"| Duration (s) | {_f(inp.get('duration_s'))} |",
            f"| Leading samples trimmed | {pre['samples_trimmed_leading']} |",
            f"| Truncated to 10 s | {_f(pre['truncated'])} |",
            f"| Peak before normalisation | {_f(pre['peak_before_normalize'])} |",
            f"| Schema version | {doc['schema_version']} |", ""]

    out += ["## Computed metrics", "", "### Broadband", "",
            "| Metric | Value | Note |", "|---|---|---|"]
    for key, label in (("edt_s", "EDT (s)"), ("t20_s", "T20 (s)"), ("t30_s", "T30 (s)")):
        r2 = d.get(f"fit_r2_{key[:-2]}")
        note = f"r2 = {r2:.4f}" if r2 is not None else d["reasons"].get(key[:-2], "")
        out.append(f"| {label} | {_f(d[key])} | {note} |")
    out.append(f"| C80 (dB) | {_f(e['c80_db'])} | {'saturated' if e['c80_saturated'] else ''} |")
    out.append(f"| D50 | {_f(e['d50'])} | |")
    out.append(f"| DRR (dB) | {_f(e['drr_db'])} | {'saturated' if e.get('drr_saturated') else ''} |")
    if sti.get("value") is not None:
        note = f"RT60 from {sti['inputs']['rt60_source']}, SNR {sti['inputs']['snr_db']:.1f} dB ({sti['inputs']['snr_source']}); proxy-based, advisory"
    else:
        note = sti.get("reason", "")
    out.append(f"| STI (proxy) | {_f(sti.get('value'))} | {note} |")
    out.append("")

    if doc["octave_bands"]:
        out += ["### Octave bands", "", "| Center (Hz) | Band (Hz) | EDT (s) | T20 (s) | T30 (s) |",
                "|---|---|---|---|---|"]
        for b in doc["octave_bands"]:
            m = b["metrics"]
            out.append(f"| {b['center_hz']} | {b['lower_hz']:.0f}-{b['upper_hz']:.0f} | "
                       f"{_f(m['edt_s'])} | {_f(m['t20_s'])} | {_f(m['t30_s'])} |")
        out.append("")
    for o in doc.get("omitted_bands", []):
        out.append(f"- {o['center_hz']} Hz band omitted: {o['reason']}")

    sp = doc["spatial"]
    out += ["### Spatial and modal", "", "| Metric | Value |", "|---|---|",
            f"| IACC | {_value(sp['iacc'])} |",
            f"| Schroeder frequency (Hz) | {_value(sp['schroeder_hz'])}"
            + (f" ({sp['schroeder_hz']['formula']} formula)" if sp['schroeder_hz'].get('value') is not None else "")
            + " |"]
    modes = sp["modes"]
    if "count" in modes:
        c = modes["counts_by_type"]
        out.append(f"| Modes up to {modes['f_max_hz']:.0f} Hz | {modes['count']} "
                   f"(axial {c['axial']}, tangential {c['tangential']}, oblique {c['oblique']}) |")
    else:
        out.append(f"| Room modes | {_value(modes)} |")
    out.append("")

    w = doc["wellness"]
    fp = doc["fingerprint"]
    out += ["### Wellness and fingerprint", "", "| Metric | Value |", "|---|---|",
            f"| Wellness score (0-100) | {_f(w['score']) if 'score' in w else _value(w)} |"]
    for k in ("clarity", "definition", "spatial", "intelligibility"):
        out.append(f"| Fingerprint: {k} | {_f(fp.get(k))} |")
    out.append("")

    out += ["## Visualization data", "",
            "Rendered figures are not produced; the underlying data can be exported with "
            "`rirlab analyze ... --emit NAME`:", "",
            "- `edc.csv`: Schroeder energy decay curve (time_s, edc_db)",
            "- `bands.csv`: octave-band EDT/T20/T30",
            "- `spectrum.csv`: magnitude spectrum; `spectrogram.csv|json`: STFT grid",
            "- `waterfall.csv|json`: cumulative spectral decay grid",
            "- `modes.csv`, `reflections.json`: room modes and first-order reflection paths (need --room)",
            "- `fingerprint.json`: normalised clarity/definition/spatial/intelligibility vector", ""]
    spec = doc["spectral"].get("spectrum", {})
    if spec.get("n_fft"):
        out.append(f"Spectrum: {spec['n_fft']}-point FFT, {spec['resolution_hz']:.3f} Hz bins, "
                   f"peak above 20 Hz at {spec['peak_hz']:.1f} Hz.")
        out.append("")

    out += ["## Standards compliance summary", ""]
    if doc["compliance"]:
        out += ["| Space type | RT60 limits (s) | STI min | RT60 | STI | Result | Advisory |",
                "|---|---|---|---|---|---|---|"]
        for row in doc["compliance"]:
            t = row["thresholds"]
            lim = f"{_f(t['rt60_min_s'])} to {_f(t['rt60_max_s'])}" if t["rt60_min_s"] is not None \
                else f"<= {_f(t['rt60_max_s'])}"
            p = row["pass"]
            out.append(f"| {row['space_type']} | {lim} | {_f(t['sti_min'])} | "
                       f"{_mark(p['rt60'])} | {_mark(p['sti'])} | "
                       f"{_MARK[p['overall']]} | {', '.join(row['advisory'])} |")
        m = doc["compliance"][0]["measured"]
        out += ["", f"Measured RT60 {_f(m['rt60_s'])} s (from {m.get('rt60_source', 'n/a')}), "
                f"STI proxy {_f(m['sti'])}. STI rows are proxy-based and advisory only."]
    else:
        out.append(f"Not evaluated: {doc.get('compliance_note') or 'no RT60 estimate'}.")
    out.append("")

    out += ["## Methodology notes and references", "",
            "- EDC by backward integration of the squared response, in dB re. total energy, floored at -140 dB.",
            "- EDT, T20 and T30 from least-squares slopes over 0..-10, -5..-25 and -5..-35 dB, extrapolated to 60 dB.",
            "- Octave bands use causal 4th-order-prototype Butterworth band-pass filters (edges fc/sqrt2, fc*sqrt2).",
            "- C80/D50 split at floor(0.080 fs) / floor(0.050 fs), boundary sample counted as early; "
            "DRR uses a +/-2.5 ms window around the peak.",
            "- STI is a reverberation/noise proxy, not the full modulation-transfer procedure.",
            "- Compliance uses T30 when available, else T20; thresholds are inclusive.", ""]
    out += [f"{i}. {r}" for i, r in enumerate(REFERENCES, 1)]
    t = doc["timings_ms"]
    out += ["", f"Processing time: {t.get('total', 0.0):.1f} ms total."]
    return "\n".join(out) + "\n"
