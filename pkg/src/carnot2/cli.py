"""Command-line front end.

Subcommands: lift, interp, approximate, pushforward, verify.  Inputs and
outputs are the JSON formats of :mod:`carnot2.io`; ``--csv`` additionally
emits dense samples for external plotting.

Exit codes: 0 success, 2 input or schema problem, 3 numeric failure,
4 quality bound not met (outputs are still written in that case).

The default residual tolerance is 1e-8 and can be overridden globally
with the CARNOT2_TOL environment variable or per run with --tol.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .curves import (
    HorizontalCurve,
    PlanarCurve,
    SampledCurve,
    horizontal_lift,
    is_horizontal_curve,
)
from .frame import NonHorizontalError, normalize_endpoints
from .group import FreeGroupPoint, Step2Structure, TangentVector, vertical_dim
from .homomorphism import (
    GeneralHorizontalCurve,
    TargetSampledCurve,
    build_homomorphism,
    check_general_curve,
    pushforward_curve,
)
from .interpolate import InfeasibleBoundaryError, interpolate_normalized
from .io import (
    SchemaError,
    boundary_from_dict,
    curve_to_dict,
    dump_file,
    load_file,
    object_from_dict,
    planar_samples_from_dict,
    report_to_dict,
    samples_to_dict,
    stitched_to_dict,
    structure_from_dict,
    write_csv,
)
from .lusin import GoodSetConfig, StitchedCurve, approximate, verify
from .quadrature import QuadratureError
from .segments import LinearSegment

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3
EXIT_QUALITY = 4

TOL_ENV = "CARNOT2_TOL"


def _default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return 1e-8
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(f"{TOL_ENV} must be a number, got {raw!r}")


def _maybe_csv(args, obj):
    if getattr(args, "csv", None):
        write_csv(args.csv, obj, grid=args.grid)


def _polyline(times: np.ndarray, points: np.ndarray) -> PlanarCurve:
    segs = []
    for k in range(len(times) - 1):
        dt = times[k + 1] - times[k]
        segs.append(LinearSegment(points[k], (points[k + 1] - points[k]) / dt, dt))
    return PlanarCurve(tuple(segs), t0=float(times[0]))


def cmd_lift(args) -> int:
    data = load_file(args.input)
    if data.get("format") != "curve/1" or data.get("kind") != "samples":
        raise SchemaError("lift expects a samples curve file with planar data")
    times, points = planar_samples_from_dict(data)
    r = points.shape[1]
    if args.start is not None:
        start_coords = np.array([float(v) for v in args.start.split(",")])
        if start_coords.shape != (r + vertical_dim(r),):
            raise SchemaError(
                f"--start needs {r + vertical_dim(r)} comma-separated coordinates"
            )
        start = FreeGroupPoint(start_coords[:r], start_coords[r:])
    else:
        start = FreeGroupPoint(points[0], np.zeros(vertical_dim(r)))
    if float(np.max(np.abs(start.x - points[0]))) > 1e-12:
        raise SchemaError("start point does not sit over the first sample")
    base = _polyline(times, points)
    curve = horizontal_lift(base, start)
    check = is_horizontal_curve(curve, tol=args.tol)
    dump_file(args.output, curve_to_dict(curve))
    _maybe_csv(args, curve)
    end = curve.end_point
    print(f"lifted {len(base.segments)} segments; end verticals: "
          + " ".join(f"{v:.12g}" for v in end.y))
    print(f"verification residual: {check.vertical_residual:.3e}")
    if check.vertical_residual > args.tol:
        return EXIT_QUALITY
    return EXIT_OK


def cmd_interp(args) -> int:
    data = boundary_from_dict(load_file(args.boundary))
    ga = FreeGroupPoint(*data["ga"])
    gb = FreeGroupPoint(*data["gb"])
    dga = TangentVector(*data["dga"])
    dgb = TangentVector(*data["dgb"])
    gap = normalize_endpoints(ga, dga, gb, dgb, data["a"], data["b"])
    result = interpolate_normalized(gap)
    psi = result.psi
    boundary = result.boundary_residual
    for t, pt, der in ((data["a"], ga, dga), (data["b"], gb, dgb)):
        boundary = max(
            boundary,
            float(np.max(np.abs(psi.value(t).flat - pt.flat))),
            float(np.max(np.abs(psi.derivative(t).flat - der.flat))),
        )
    dump_file(args.output, curve_to_dict(psi))
    _maybe_csv(args, psi)
    print(f"eps: {result.eps:.6g}  measured deviation: {result.measured_dev:.6g}  "
          f"C ratio: {result.c_ratio:.6g}")
    print(f"boundary residual: {boundary:.3e}  "
          f"horizontality residual: {result.horizontality_residual:.3e}")
    worst = max(boundary, result.horizontality_residual)
    return EXIT_OK if worst <= args.tol else EXIT_QUALITY


def cmd_approximate(args) -> int:
    data = load_file(args.input)
    obj = object_from_dict(data)
    if not isinstance(obj, SampledCurve):
        raise SchemaError("approximate expects a sampled free-group curve")
    cfg = GoodSetConfig(eta=args.eta, delta=args.delta, epsilon=args.epsilon)
    gamma, report = approximate(obj, cfg)
    dump_file(args.output, stitched_to_dict(gamma))
    if args.report:
        dump_file(args.report, report_to_dict(report, {"tol": args.tol}))
    _maybe_csv(args, gamma)
    print(f"kept intervals: {len(report.k_intervals)}  gaps: {len(report.gaps)}")
    print(f"disagreement measure: {report.disagreement_measure:.6g} "
          f"(target {args.epsilon:.6g})")
    print(f"max derivative jump: {report.max_derivative_jump:.3e}  "
          f"horizontality residual: {report.horizontality_residual:.3e}")
    ok = (
        report.ok
        and report.max_derivative_jump <= args.tol
        and report.horizontality_residual <= args.tol
    )
    return EXIT_OK if ok else EXIT_QUALITY


def cmd_pushforward(args) -> int:
    data = load_file(args.input)
    obj = object_from_dict(data)
    if args.structure:
        target = structure_from_dict(load_file(args.structure))
    else:
        if isinstance(obj, (SampledCurve, HorizontalCurve)):
            r = obj.r
        else:
            raise SchemaError("pushforward of a target-group curve needs --structure")
        target = Step2Structure.free(r)
    if args.matrix:
        h = np.array(load_file(args.matrix).get("matrix"), float)
    else:
        h = None
    if isinstance(obj, SampledCurve):
        f = build_homomorphism(obj.r, target, h)
        pushed = TargetSampledCurve(
            target,
            obj.times,
            obj.xs @ f.h_matrix.T,
            obj.ys @ f.t_matrix.T,
            None if obj.dxs is None else obj.dxs @ f.h_matrix.T,
            None if obj.dys is None else obj.dys @ f.t_matrix.T,
        )
        dump_file(args.output, samples_to_dict(pushed))
        _maybe_csv(args, pushed)
        print(f"pushed {pushed.n} samples into a target with "
              f"r={target.r}, m={target.m}")
        return EXIT_OK
    if isinstance(obj, HorizontalCurve):
        f = build_homomorphism(obj.r, target, h)
        pushed_curve = pushforward_curve(f, obj)
        dump_file(args.output, curve_to_dict(pushed_curve))
        _maybe_csv(args, pushed_curve)
        residual = check_general_curve(pushed_curve)
        print(f"pushed curve residual in target: {residual:.3e}")
        return EXIT_OK if residual <= args.tol else EXIT_QUALITY
    raise SchemaError("pushforward expects a free-group curve file")


def cmd_verify(args) -> int:
    data = load_file(args.input)
    obj = object_from_dict(data)
    if isinstance(obj, StitchedCurve):
        if not args.against:
            raise SchemaError("verifying an approximation needs --against SAMPLES")
        against = object_from_dict(load_file(args.against))
        if not isinstance(against, SampledCurve):
            raise SchemaError("--against must be a sampled free-group curve")
        cfg = GoodSetConfig(eta=args.eta, delta=args.delta, epsilon=args.epsilon)
        report = verify(obj, against, cfg)
        if args.report:
            dump_file(args.report, report_to_dict(report, {"tol": args.tol}))
        print(f"agreement exact: {report.agreement_exact}  "
              f"disagreement measure: {report.disagreement_measure:.6g}")
        print(f"max derivative jump: {report.max_derivative_jump:.3e}  "
              f"horizontality residual: {report.horizontality_residual:.3e}")
        ok = (
            report.ok
            and report.max_derivative_jump <= args.tol
            and report.horizontality_residual <= args.tol
        )
        return EXIT_OK if ok else EXIT_QUALITY
    if isinstance(obj, HorizontalCurve):
        check = is_horizontal_curve(obj, tol=args.tol)
        print(f"vertical residual: {check.vertical_residual:.3e}  "
              f"velocity jump: {check.velocity_jump:.3e}")
        return EXIT_OK if check.ok(args.tol) else EXIT_QUALITY
    if isinstance(obj, GeneralHorizontalCurve):
        residual = check_general_curve(obj)
        print(f"vertical residual: {residual:.3e}")
        return EXIT_OK if residual <= args.tol else EXIT_QUALITY
    raise SchemaError("verify expects a curve or approximation file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carnot2",
        description="Horizontal curves in step-2 Carnot groups: lifting, "
        "C1 gap interpolation, smoothing and pushforward.",
    )
    parser.add_argument("--version", action="version", version=f"carnot2 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=True):
        p.add_argument("--tol", type=float, default=None,
                       help="residual tolerance (default 1e-8, or CARNOT2_TOL)")
        p.add_argument("--grid", type=int, default=64,
                       help="dense samples per segment for CSV output")
        p.add_argument("--csv", help="also write dense samples to this CSV file")
        if output:
            p.add_argument("-o", "--output", required=True, help="output JSON file")

    p = sub.add_parser("lift", help="horizontally lift planar sample data")
    p.add_argument("input", help="samples curve file with planar data")
    p.add_argument("--start", help="start point, comma-separated coordinates "
                                   "(default: first sample with zero verticals)")
    common(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("interp", help="C1 horizontal interpolation of one gap")
    p.add_argument("--boundary", required=True,
                   help="boundary file with a, b, values and derivatives")
    common(p)
    p.set_defaults(func=cmd_interp)

    p = sub.add_parser("approximate",
                       help="smooth a sampled horizontal curve outside a small set")
    p.add_argument("input", help="samples curve file (with verticals)")
    p.add_argument("--epsilon", type=float, required=True,
                   help="target measure of the set where the output may differ")
    p.add_argument("--eta", type=float, default=0.1,
                   help="derivative oscillation threshold (default 0.1)")
    p.add_argument("--delta", type=float, default=0.02,
                   help="oscillation window length (default 0.02)")
    p.add_argument("--report", help="write the quality report to this JSON file")
    common(p)
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("pushforward",
                       help="push a free-group curve through a graded homomorphism")
    p.add_argument("input", help="curve file (samples or segments)")
    p.add_argument("--structure", help="target structure file (default: free)")
    p.add_argument("--matrix", help='JSON file {"matrix": [[...]]} for the '
                                    "horizontal action (default: identity)")
    common(p)
    p.set_defaults(func=cmd_pushforward)

    p = sub.add_parser("verify", help="re-verify a curve or an approximation")
    p.add_argument("input", help="curve or approximation file")
    p.add_argument("--against", help="original samples file (for approximations)")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.02)
    p.add_argument("--report", help="write the recomputed report to this JSON file")
    common(p, output=False)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is None:
            args.tol = _default_tol()
        return args.func(args)
    except (SchemaError, NonHorizontalError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (QuadratureError, InfeasibleBoundaryError, FloatingPointError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
