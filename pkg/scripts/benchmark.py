"""Time the full analysis pipeline on a long simulated response."""

import argparse
import time

from rirlab import report as rpt
from rirlab.core import RoomGeometry
from rirlab.simulate import SimulationConfig, simulate_ism


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--duration", type=float, default=10.0)
    ap.add_argument("--sample-rate", type=int, default=48000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--waterfall", action="store_true")
    args = ap.parse_args()

    geom = RoomGeometry(20.0, 15.0, 8.0, (5, 5, 2), (14, 9, 1.6))
    cfg = SimulationConfig(geom, 0.15, sample_rate=args.sample_rate, duration_s=args.duration)
    rir = simulate_ism(cfg)
    opts = rpt.AnalysisOptions(geom=geom, waterfall=args.waterfall)
    best = None
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        analysis = rpt.analyze(rir, "benchmark", opts)
        rpt.render_markdown(rpt.sanitize(analysis.report))
        elapsed = time.perf_counter() - t0
        if best is None or elapsed < best[0]:
            best = (elapsed, analysis.report["timings_ms"])
    print(f"{rir.n_samples} samples at {rir.sample_rate} Hz: best {best[0]:.3f} s")
    for stage, ms in best[1].items():
        print(f"  {stage:<14}{ms:8.1f} ms")


if __name__ == "__main__":
    main()
