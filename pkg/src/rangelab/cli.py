"""Command line entry point: ``rangelab plot|dist|dilate|verify-main|verify-key``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import plotting
from .cnum import wc_sample
from .dilation import sample_dilation
from .distance import min_shift_norm
from .lab import verify_key, verify_main
from .linalg import load_matrix, save_matrix
from .numrange import DEFAULT_GRID, ConvexRegion, nr_region, theta_grid


def _pads(text: str | None):
    if text is None:
        return None
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"pads must be comma-separated integers, got {text!r}")


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_plot(args) -> int:
    A = load_matrix(args.matrix)
    out = _out_dir(args.out)
    region = nr_region(A, args.grid)
    clouds = []
    if args.weights:
        C = load_matrix(args.weights)
        cloud = wc_sample(C, A, args.samples, seed=args.seed, boundary=args.grid)
        clouds.append(cloud)
        plotting.write_points_csv(cloud, out / "cloud.csv")
    plotting.save_svg(out / "range.svg", regions=[region], clouds=clouds,
                      title=f"range of {args.matrix}")
    plotting.write_support_csv(region, out / "support.csv")
    print(f"wrote {out / 'range.svg'} and {out / 'support.csv'}")
    return 0


def cmd_dist(args) -> int:
    C = load_matrix(args.matrix)
    res = min_shift_norm(C, tol=args.tol, seed=args.seed)
    out = {"mu_star": [res.mu_star.real, res.mu_star.imag], "R": res.R,
           "dual_value": res.dual_value, "certificate_ok": res.certificate_ok}
    text = json.dumps(out, indent=2)
    print(text)
    if args.out:
        plotting.write_json(out, _out_dir(args.out) / "dist.json")
    return 0 if res.certificate_ok else 1


def cmd_dilate(args) -> int:
    T = load_matrix(args.matrix)
    U = sample_dilation(T, args.pad, args.seed)
    if args.out:
        path = Path(args.out)
        if path.suffix != ".json":
            path = _out_dir(path) / "U.json"
        save_matrix(U, path)
        print(f"wrote {path}")
    else:
        print(json.dumps({"rows": U.shape[0], "cols": U.shape[1],
                          "re": U.real.tolist(), "im": U.imag.tolist()}))
    return 0


def _finish(report, args, name) -> int:
    print(f"branch={report.branch} r={report.r:.6g} gap={report.gap_target:.6g} "
          f"dilations={len(report.per_dilation)} failures={len(report.failures)} "
          f"all_pass={report.all_pass}")
    if args.out:
        path = report.save(_out_dir(args.out) / name)
        print(f"wrote {path}")
    return 0 if report.all_pass else 1


def cmd_verify_main(args) -> int:
    C = load_matrix(args.matrix)
    theta = None if args.theta is None else math.radians(args.theta)
    dump = None if not args.out else Path(args.out) / "failures.json"
    try:
        report = verify_main(C, args.dilations, args.pads, args.seed, theta=theta,
                             tol=args.tol, dump=dump)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return _finish(report, args, "verify_main.json")


def cmd_verify_key(args) -> int:
    C = load_matrix(args.matrix)
    T = load_matrix(args.contraction)
    try:
        report = verify_key(C, T, args.dilations, args.grid, args.seed, args.pads, tol=args.tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for k, h in zip(report.meta["counts"], report.meta["hausdorff"]):
        print(f"  dilations={k:5d} hausdorff={h:.6g}")
    if args.out:
        est = ConvexRegion(theta_grid(args.grid), report.meta["support_intersection"])
        plotting.write_support_csv(est, _out_dir(args.out) / "intersection.csv")
    return _finish(report, args, "verify_key.json")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rangelab",
                                description="Numerical ranges of matrices and their unitary dilations.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True, tol=1e-6):
        sp.add_argument("--matrix", required=True, help="matrix JSON file {rows, cols, re, im}")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=tol)
        sp.add_argument("--out", default=None, help="output directory")
        if grid:
            sp.add_argument("--grid", type=int, default=DEFAULT_GRID, help="number of directions")

    sp = sub.add_parser("plot", help="draw W(A) and optionally a sampled W_C(A)")
    common(sp)
    sp.add_argument("--weights", default=None, help="matrix C for a W_C(A) point cloud")
    sp.add_argument("--samples", type=int, default=20000)
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("dist", help="distance to the scalar matrices")
    common(sp, grid=False, tol=1e-10)
    sp.set_defaults(func=cmd_dist)

    sp = sub.add_parser("dilate", help="sample a unitary dilation of a contraction")
    common(sp, grid=False)
    sp.add_argument("--pad", type=int, default=None, help="dilation pad k (default n)")
    sp.set_defaults(func=cmd_dilate)

    sp = sub.add_parser("verify-main", help="certify points beyond W_C(T) in dilation ranges")
    common(sp, grid=False)
    sp.add_argument("--dilations", type=int, default=25)
    sp.add_argument("--pads", type=_pads, default=None, help="comma-separated pad sizes")
    sp.add_argument("--theta", type=float, default=None, help="angle in degrees (f < 1 branch)")
    sp.set_defaults(func=cmd_verify_main)

    sp = sub.add_parser("verify-key", help="containment and shrinkage for rank-one normal C")
    common(sp)
    sp.add_argument("--contraction", required=True, help="contraction T JSON file")
    sp.add_argument("--dilations", type=int, default=400)
    sp.add_argument("--pads", type=_pads, default=None, help="comma-separated pad sizes")
    sp.set_defaults(func=cmd_verify_key)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "plot" and args.out is None:
        args.out = "."
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
