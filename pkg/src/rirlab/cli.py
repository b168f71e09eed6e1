"""Command-line front end: ``rirlab analyze|simulate|auralize|report``.

Exit codes: 0 success (partial metrics included), 2 unreadable input file,
3 degenerate signal, 4 report schema mismatch, 64 bad flags.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

from . import report as rpt
from .auralize import convolve
from .core import RoomGeometry, load_wav, save_wav, to_mono
from .errors import (
    ConfigError,
    DegenerateInputError,
    EmptyInputError,
    FormatError,
    PlacementError,
    SchemaError,
    UnsupportedFormatError,
)
from .simulate import (
    SimulationConfig,
    DatasetRanges,
    RirRecord,
    generate_dataset,
    record_metrics,
    simulate_ism,
    validate_batch,
    write_dataset,
)

EXIT_OK, EXIT_UNREADABLE, EXIT_DEGENERATE, EXIT_SCHEMA, EXIT_USAGE = 0, 2, 3, 4, 64
READ_ERRORS = (OSError, FormatError, UnsupportedFormatError, EmptyInputError)
EMIT_KINDS = ("edc", "bands", "spectrum", "spectrogram", "waterfall", "modes", "reflections", "fingerprint")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _triple(text: str, sep: str) -> tuple[float, float, float]:
    parts = text.lower().split(sep)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three values separated by {sep!r}: {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not numeric: {text!r}") from None


def _dims(text):
    return _triple(text, "x")


def _point(text):
    return _triple(text, ",")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (simulate)")
    common.add_argument("--emit", action="append", default=[], metavar="NAME",
                        help="write an extra data file; the name stem selects the content "
                             f"({', '.join(EMIT_KINDS)}), the suffix .csv or .json the format")
    common.add_argument("--json-out", type=Path, help="where to write the JSON result")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = _Parser(prog="rirlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="compute the metrics report for a WAV RIR")
    p.add_argument("input", type=Path)
    p.add_argument("--room", type=_dims, metavar="LxWxH")
    p.add_argument("--source", type=_point, metavar="X,Y,Z")
    p.add_argument("--receiver", type=_point, metavar="X,Y,Z")
    p.add_argument("--volume", type=float, help="room volume in m^3 if no --room is given")
    p.add_argument("--snr", type=float, help="override the estimated SNR (dB)")
    p.add_argument("--modes-fmax", type=float, default=300.0)
    p.add_argument("--schroeder-formula", choices=("standard", "literal"), default="standard")
    p.add_argument("--window", type=float, default=0.025, help="spectrogram window (s)")
    p.add_argument("--hop", type=float, default=0.010, help="spectrogram hop (s)")
    p.add_argument("--slices", type=int, default=40, help="waterfall slices")

    p = sub.add_parser("simulate", parents=[common], help="image-source RIRs plus JSON-Lines metadata")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--config", type=Path, help="JSON file with any of the flags below")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--sample-rate", type=int, default=48000)
    p.add_argument("--tail", choices=("none", "exponential-noise"), default="exponential-noise")
    p.add_argument("--room", type=_dims, metavar="LxWxH", help="simulate this room instead of random ones")
    p.add_argument("--source", type=_point, metavar="X,Y,Z")
    p.add_argument("--receiver", type=_point, metavar="X,Y,Z")
    p.add_argument("--absorption", type=float, default=0.3)
    p.add_argument("--validate", action="store_true", help="also write the validation report")

    p = sub.add_parser("auralize", parents=[common], help="convolve dry audio with an RIR")
    p.add_argument("dry", type=Path)
    p.add_argument("rir", type=Path)
    p.add_argument("output", type=Path)

    p = sub.add_parser("report", parents=[common], help="render a JSON metrics report")
    p.add_argument("report_json", type=Path)
    p.add_argument("--format", choices=("markdown",), default="markdown")
    p.add_argument("-o", "--output", type=Path)
    return parser


def _geometry(args) -> RoomGeometry | None:
    given = [args.room is not None, args.source is not None, args.receiver is not None]
    if not any(given):
        return None
    if not all(given):
        raise UsageError("--room, --source and --receiver must be given together")
    try:
        return RoomGeometry(*args.room, args.source, args.receiver)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def _log(args, msg):
    if not args.quiet:
        print(msg, file=sys.stderr)


def _emit_analysis(analysis: rpt.Analysis, names: list[str], args) -> None:
    for name in names:
        path = Path(name)
        kind, fmt = path.stem, path.suffix.lower().lstrip(".")
        if kind == "octave":
            kind = "bands"
        if kind not in EMIT_KINDS or fmt not in ("csv", "json"):
            raise UsageError(f"cannot emit {name!r}: use one of {EMIT_KINDS} with .csv or .json")
        if kind == "edc":
            text = rpt.edc_csv(analysis.edc) if fmt == "csv" else json.dumps(
                {"time_s": analysis.edc.times.tolist(), "edc_db": analysis.edc.values_db.tolist()})
        elif kind == "bands":
            text = rpt.bands_csv(analysis.bands) if fmt == "csv" else json.dumps(
                rpt.sanitize([b.to_dict() for b in analysis.bands]))
        elif kind == "spectrum":
            s = analysis.spectrum
            text = rpt.spectral.spectrum_to_csv(s) if fmt == "csv" else json.dumps(
                {"freqs_hz": s.freqs_hz.tolist(), "magnitude_db": s.magnitude_db.tolist()})
        elif kind in ("spectrogram", "waterfall"):
            grid = getattr(analysis, kind)
            if grid is None:
                _log(args, f"skipping {name}: {kind} unavailable for this response")
                continue
            text = grid.to_csv() if fmt == "csv" else json.dumps(grid.to_dict())
        elif kind == "modes":
            if analysis.modes is None:
                _log(args, f"skipping {name}: room geometry not provided")
                continue
            text = rpt.modes_csv(analysis.modes) if fmt == "csv" else json.dumps(
                [{"f_hz": m.f_hz, "nx": m.indices[0], "ny": m.indices[1], "nz": m.indices[2],
                  "type": m.mode_type} for m in analysis.modes])
        elif kind == "reflections":
            if analysis.reflections is None:
                _log(args, f"skipping {name}: room geometry not provided")
                continue
            direct, refl = analysis.reflections
            text = json.dumps([direct.to_dict()] + [p.to_dict() for p in refl], indent=2)
        else:
            fp = analysis.report["fingerprint"]
            if fmt == "csv":
                text = "axis,value\n" + "".join(
                    f"{k},{'' if fp[k] is None else fp[k]}\n"
                    for k in ("clarity", "definition", "spatial", "intelligibility"))
            else:
                text = json.dumps(fp, indent=2)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        _log(args, f"wrote {path}")


def cmd_analyze(args) -> int:
    geom = _geometry(args)
    for name in args.emit:
        stem = Path(name).stem
        if stem not in EMIT_KINDS + ("octave",) or Path(name).suffix.lower() not in (".csv", ".json"):
            raise UsageError(f"cannot emit {name!r}: use one of {EMIT_KINDS} with .csv or .json")
    t0 = time.perf_counter()
    rir = load_wav(args.input)
    load_ms = (time.perf_counter() - t0) * 1e3
    opts = rpt.AnalysisOptions(
        geom=geom,
        volume_m3=args.volume,
        snr_db=args.snr,
        modes_fmax_hz=args.modes_fmax,
        schroeder_formula=args.schroeder_formula,
        spectrogram_window_s=args.window,
        spectrogram_hop_s=args.hop,
        waterfall=any(Path(n).stem == "waterfall" for n in args.emit),
        waterfall_slices=args.slices,
    )
    analysis = rpt.analyze(rir, str(args.input), opts, load_ms=load_ms)
    text = rpt.dumps(analysis.report)
    if args.json_out:
        args.json_out.parent.mkdir(parents=True, exist_ok=True)
        args.json_out.write_text(text + "\n", encoding="utf-8")
        _log(args, f"wrote {args.json_out}")
    else:
        print(text)
    _emit_analysis(analysis, args.emit, args)
    return EXIT_OK


def _load_config_file(args) -> None:
    if args.config is None:
        return
    try:
        cfg = json.loads(args.config.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    known = {"n", "seed", "order", "sample_rate", "tail", "room", "source", "receiver", "absorption"}
    unknown = set(cfg) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, value in cfg.items():
        setattr(args, key, tuple(value) if key in ("room", "source", "receiver") else value)


def cmd_simulate(args) -> int:
    _load_config_file(args)
    geom = _geometry(args)
    try:
        if geom is not None:
            cfg = SimulationConfig(geom, args.absorption, args.order, args.sample_rate, args.tail, args.seed)
            rir = simulate_ism(cfg)
            records = [RirRecord(rir, cfg, record_metrics(rir), "rir_00000.wav")]
            meta = write_dataset(records, args.out)
        else:
            if args.n < 1:
                raise UsageError("--n must be >= 1")
            records = generate_dataset(args.n, args.seed, args.out, DatasetRanges(), args.order,
                                       args.sample_rate, args.tail)
            meta = args.out / "metadata.jsonl"
    except (ConfigError, PlacementError) as exc:
        raise UsageError(str(exc)) from None
    _log(args, f"wrote {len(records)} RIRs and {meta}")
    if args.validate:
        doc = rpt.sanitize(validate_batch(records).to_dict())
        path = args.json_out or args.out / "validation.json"
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        _log(args, f"wrote {path}")
    return EXIT_OK


def cmd_auralize(args) -> int:
    dry = load_wav(args.dry)
    rir = to_mono(load_wav(args.rir))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = convolve(dry, rir)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    save_wav(args.output, out)
    _log(args, f"wrote {args.output} ({out.n_samples} samples at {out.sample_rate} Hz)")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        doc = json.loads(args.report_json.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    text = rpt.render_markdown(doc)
    if args.output:
        args.output.write_text(text, encoding="utf-8")
        _log(args, f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate, "auralize": cmd_auralize, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"rirlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except READ_ERRORS as exc:
        print(f"rirlab: cannot read input: {exc}", file=sys.stderr)
        return EXIT_UNREADABLE
    except DegenerateInputError as exc:
        print(f"rirlab: degenerate signal: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except SchemaError as exc:
        print(f"rirlab: report schema mismatch: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
