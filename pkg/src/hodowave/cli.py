"""Command-line entry point: ``python -m hodowave <command> ...``.

Exit codes: 0 success, 1 physics/solver error or a failed claim, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import diagnostics as dg
from . import harness
from .errors import HodowaveError
from .lagrangian import integrate_many, write_trajectory_csv
from .solver import PhysicalParams, continuation_path, solve_wave

SUFFIX = ".wave.json"


def _stem(path: str) -> str:
    name = str(path)
    return name[: -len(SUFFIX)] if name.endswith(SUFFIX) else str(Path(name).with_suffix(""))


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _add_params(sp, with_depth=True):
    sp.add_argument("--L", type=float, required=True, help="wavelength [m]")
    if with_depth:
        sp.add_argument("--d", type=float, required=True, help="mean depth [m]")
    sp.add_argument("--g", type=float, default=9.8)
    sp.add_argument("--omega", type=float, default=7.3e-5, help="rotation rate [rad/s]")
    sp.add_argument("--modes", type=int, default=256)
    sp.add_argument("--tol", type=float, default=1e-12, help="surface Bernoulli tolerance [m^2/s^2]")


def _add_verify_opts(sp):
    sp.add_argument("--seed", type=int, default=0, help="seed for random spot-check points")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--p-points", type=int, default=65)
    sp.add_argument("--n-q", type=int, default=dg.DEFAULT_NQ)
    sp.add_argument("--n-p", type=int, default=dg.DEFAULT_NP)
    sp.add_argument("--no-trajectories", action="store_true", help="skip particle-integration claims")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hodowave", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="solve one wave and write <out>.wave.json")
    _add_params(sp)
    sp.add_argument("--H", type=float, required=True, help="crest-to-trough height [m]")
    sp.add_argument("--out", default="wave")

    sp = sub.add_parser("diagnose", help="sample a functional on a p-grid and write CSV")
    sp.add_argument("wave")
    sp.add_argument("--functional", required=True, choices=[f.value for f in dg.Functional])
    sp.add_argument("--s", type=float, default=None)
    sp.add_argument("--p-points", type=int, default=65)
    sp.add_argument("--n-q", type=int, default=dg.DEFAULT_NQ)
    sp.add_argument("--n-p", type=int, default=dg.DEFAULT_NP)
    sp.add_argument("--out", default=None, help="output CSV (default <name>.<functional>.csv)")

    sp = sub.add_parser("trace", help="integrate particles on one streamline and write CSVs")
    sp.add_argument("wave")
    sp.add_argument("--p", type=float, required=True, help="stream-function level, 0 = surface")
    sp.add_argument("--starts", type=int, default=4)
    sp.add_argument("--ode-tol", type=float, default=1e-11)
    sp.add_argument("--samples", type=int, default=257)
    sp.add_argument("--out", default=None, help="output prefix (default <name>)")

    sp = sub.add_parser("verify", help="evaluate every registered claim on a solution")
    sp.add_argument("wave")
    _add_verify_opts(sp)
    sp.add_argument("--out", default=None, help="report CSV (default <name>.report.csv)")

    sp = sub.add_parser("sweep", help="solve and verify a grid of depths and heights")
    _add_params(sp, with_depth=False)
    sp.add_argument("--depth-ratios", type=_floats, default=[0.1, 0.2, 0.5])
    sp.add_argument("--height-ratios", type=_floats, default=[0.0, 0.01, 0.03, 0.05])
    sp.add_argument("--out", default="sweep.summary.csv")
    _add_verify_opts(sp)
    return ap


def _config(args) -> harness.VerifyConfig:
    return harness.VerifyConfig(
        n_points=args.p_points,
        n_q=args.n_q,
        n_p=args.n_p,
        seed=args.seed,
        workers=args.workers,
        include_lagrangian=not args.no_trajectories,
    )


def _print_reports(reports, stream):
    width = max(len(r.claim_id) for r in reports)
    for r in reports:
        stream.write(f"{r.claim_id:<{width}}  {r.status:<8} {r.worst_margin: .3e}  {r.note}\n")
    counts = harness.summarize(reports)
    stream.write(" ".join(f"{k}={v}" for k, v in counts.items()) + "\n")


def cmd_solve(args) -> int:
    params = PhysicalParams(args.L, args.d, args.H, g=args.g, omega=args.omega, modes=args.modes, newton_tol=args.tol)
    wave, secs = harness.timed(solve_wave, params)
    path = f"{args.out}{SUFFIX}"
    harness.save_wave(wave, path)
    print(f"c = {wave.c!r} m/s  residual = {wave.residual_norm:.2e}  -> {path}  ({secs:.2f} s)")
    return 0


def cmd_diagnose(args) -> int:
    wave = harness.load_wave(args.wave)
    curve = dg.diagnostic_curve(wave, args.functional, s=args.s, n_points=args.p_points, n_q=args.n_q, n_p=args.n_p)
    path = args.out or f"{_stem(args.wave)}.{args.functional}.csv"
    harness.write_curve_csv(curve, path)
    print(f"{len(curve.values)} rows -> {path}")
    return 0


def cmd_trace(args) -> int:
    wave = harness.load_wave(args.wave)
    starts = [k * wave.phi_max / args.starts for k in range(args.starts)]
    trajs = integrate_many(wave, starts, args.p, args.ode_tol, args.samples)
    prefix = args.out or _stem(args.wave)
    for k, tr in enumerate(trajs):
        path = f"{prefix}.trace{k}.csv"
        write_trajectory_csv(tr, path)
        print(f"q0 = {tr.q0:.6g}  period = {tr.measured_period!r} s  -> {path}")
    return 0


def cmd_verify(args) -> int:
    wave = harness.load_wave(args.wave)
    config = _config(args)
    reports, secs = harness.timed(harness.verify_all, wave, config)
    path = args.out or f"{_stem(args.wave)}.report.csv"
    harness.write_report_csv(reports, path)
    manifest = harness.RunManifest.build(wave, config, {"verify_s": secs})
    with open(f"{_stem(path)}.manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=1, sort_keys=True)
    _print_reports(reports, sys.stdout)
    return 1 if any(r.status == "fail" for r in reports) else 0


def cmd_sweep(args) -> int:
    config = _config(args)
    rows = []
    failed = False
    for ratio in args.depth_ratios:
        depth = ratio * args.L
        heights = sorted(h * args.L for h in args.height_ratios)
        base = PhysicalParams(args.L, depth, heights[-1], g=args.g, omega=args.omega, modes=args.modes, newton_tol=args.tol)
        waves = continuation_path(base, heights)
        for wave in waves:
            reports = harness.verify_all(wave, config)
            counts = harness.summarize(reports)
            failed |= counts["fail"] > 0
            rows.append([repr(ratio), repr(wave.params.height / args.L), repr(wave.c), wave.fingerprint()]
                        + [counts[k] for k in ("pass", "fail", "skipped", "finding")])
            print(f"d/L={ratio:g} H/L={wave.params.height / args.L:g}  c={wave.c:.10g}  " + " ".join(f"{k}={v}" for k, v in counts.items()))
    with open(args.out, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["depth_ratio", "height_ratio", "c", "fingerprint", "pass", "fail", "skipped", "finding"])
        out.writerows(rows)
    return 1 if failed else 0


COMMANDS = {"solve": cmd_solve, "diagnose": cmd_diagnose, "trace": cmd_trace, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except HodowaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: cannot use input: {exc}", file=sys.stderr)
        return 1
    print(f"[{args.command} done in {time.perf_counter() - t0:.2f} s]", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
