"""Wave speed, effective gravity and claim outcomes along a height continuation.

    python scripts/height_sweep.py --L 100 --d 10 --heights 0,1,2,3,4,5 --out sweep.csv
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import asdict, dataclass

from hodowave import harness
from hodowave.flow import flow_constants
from hodowave.solver import PhysicalParams, continuation_path


@dataclass
class SweepConfig:
    wavelength: float = 100.0
    depth: float = 10.0
    heights: tuple = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
    modes: int = 256
    verify: bool = True


def run(cfg: SweepConfig):
    base = PhysicalParams(cfg.wavelength, cfg.depth, max(cfg.heights), modes=cfg.modes)
    rows = []
    for wave in continuation_path(base, sorted(cfg.heights)):
        fc = flow_constants(wave)
        row = {
            "H": wave.params.height,
            "c": wave.c,
            "g_eff": wave.g_eff,
            "delta": fc.delta,
            "B": fc.bernoulli_B,
            "residual": wave.residual_norm,
        }
        if cfg.verify:
            counts = harness.summarize(harness.verify_all(wave, harness.VerifyConfig(include_lagrangian=False)))
            row.update(counts)
        rows.append(row)
        print("  ".join(f"{k}={v:.10g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, default=SweepConfig.wavelength)
    ap.add_argument("--d", type=float, default=SweepConfig.depth)
    ap.add_argument("--heights", default="0,1,2,3,4,5")
    ap.add_argument("--modes", type=int, default=SweepConfig.modes)
    ap.add_argument("--no-verify", action="store_true")
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    cfg = SweepConfig(args.L, args.d, tuple(float(h) for h in args.heights.split(",")), args.modes, not args.no_verify)
    rows = run(cfg)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            out = csv.DictWriter(fh, fieldnames=list(rows[0]))
            out.writeheader()
            out.writerows(rows)
        print(f"config {asdict(cfg)} -> {args.out}")


if __name__ == "__main__":
    main()
