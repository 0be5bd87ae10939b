"""Bed-line area and length against the delta0 bounds, over depth and height.

For each wave prints the ratio of the bed value to the halved bound and to
the unhalved one.  A ratio above 1 is a violation.  For a flat wave the
exact ratios to the halved bounds are 2 (area) and sqrt(2) (length).

    python scripts/bound_slack_study.py --L 100 --depth-ratios 0.1,0.2,0.5 --height-ratios 0,0.01,0.03,0.05
"""

from __future__ import annotations

import argparse

import numpy as np

from hodowave import diagnostics as dg
from hodowave.flow import flow_constants
from hodowave.solver import PhysicalParams, continuation_path


def ratios(wave):
    fc = flow_constants(wave)
    d0 = fc.delta0
    area = dg.region_area(wave, wave.m_abs)
    length = dg.streamline_length(wave, wave.m_abs)
    halved_area = wave.m_abs * wave.phi_max / (2 * d0**2)
    halved_length = np.sqrt(2) * wave.phi_max / (2 * d0)
    return {
        "delta0": d0,
        "area/halved": area / halved_area,
        "area/full": area / (2 * halved_area),
        "length/halved": length / halved_length,
        "length/full": length / (wave.phi_max / d0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=float, default=100.0)
    ap.add_argument("--depth-ratios", default="0.1,0.2,0.5")
    ap.add_argument("--height-ratios", default="0,0.01,0.03,0.05")
    args = ap.parse_args()
    heights = sorted(float(h) * args.L for h in args.height_ratios.split(","))
    print(f"{'d/L':>5} {'H/L':>6} {'delta0':>9} {'area/halved':>12} {'area/full':>10} {'len/halved':>11} {'len/full':>9}")
    for ratio in (float(r) for r in args.depth_ratios.split(",")):
        base = PhysicalParams(args.L, ratio * args.L, heights[-1])
        for wave in continuation_path(base, heights):
            r = ratios(wave)
            print(
                f"{ratio:5.2f} {wave.params.height / args.L:6.3f} {r['delta0']:9.5f} {r['area/halved']:12.6f}"
                f" {r['area/full']:10.6f} {r['length/halved']:11.6f} {r['length/full']:9.6f}"
            )


if __name__ == "__main__":
    main()
