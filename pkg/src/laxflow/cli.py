"""Command-line front end: sampling, curves, flows, and verification."""

from __future__ import annotations

import argparse
import json
import sys

from . import config
from .errors import LaxflowError
from .flows import FieldSpec, integrate, trajectory_to_csv, trajectory_to_json
from .gauge import normal_form, theta_membership, theta_report_to_json
from .polymat import INFINITY, from_json, random_sample, to_json
from .sov import divisor_to_json, sov_divisor
from .spectral import char_poly, curve_to_json, smoothness_check
from .verify import SUITES, report_to_json, verify_suite

__all__ = ["main"]


def _parse_node(text: str):
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return INFINITY
    try:
        return complex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a node: {text!r}")


def _parse_complex(text: str) -> complex:
    try:
        return complex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _read_matrix(path: str):
    if path == "-":
        return from_json(json.load(sys.stdin))
    with open(path, encoding="utf-8") as fh:
        return from_json(json.load(fh))


def _emit(text: str, path: str | None) -> None:
    if path and path != "-":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _node_json(c):
    return "inf" if c is INFINITY else [c.real, c.imag]


def _gauge_json(g) -> dict:
    def as_pairs(arr):
        return [[z.real, z.imag] for z in arr.ravel()]

    return {
        "B": [[[z.real, z.imag] for z in row] for row in g.B],
        "b1": as_pairs(g.b1),
        "b0": as_pairs(g.b0),
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laxflow",
        description="Polynomial Lax matrices: spectral curves, gauge slices, "
        "isospectral flows, separation of variables.",
    )
    parser.add_argument(
        "--config", metavar="FILE", help="key = value tolerance overrides"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw a random matrix and print its JSON")
    p.add_argument("-r", type=int, required=True, help="matrix size")
    p.add_argument("-d", type=int, required=True, help="degree parameter")
    p.add_argument("--slice", default="full", dest="slice_name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--at", type=_parse_node, default=None, help="node for s_c")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("curve", help="spectral curve, genus and smoothness")
    p.add_argument("matrix", help="matrix JSON path, or - for stdin")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("normalform", help="slice representative at a node")
    p.add_argument("matrix")
    p.add_argument("--at", type=_parse_node, required=True)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("flow", help="integrate one Lax field")
    p.add_argument("matrix")
    p.add_argument(
        "--field",
        choices=("upsilon", "y-field", "projected"),
        default="projected",
    )
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--a", type=_parse_complex, default=None)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--stride", type=int, default=0, help="snapshot stride")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("sov", help="divisor of a slice point")
    p.add_argument("matrix")
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("theta", help="theta-divisor membership at a node")
    p.add_argument("matrix")
    p.add_argument("--at", type=_parse_node, required=True)
    p.add_argument("-o", "--output", default=None)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument(
        "--suite", choices=("all",) + tuple(sorted(SUITES)), default="all"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_path", default=None, metavar="FILE")
    p.add_argument(
        "--timing", action="store_true", help="include wall times in the JSON"
    )
    return parser


def _cmd_sample(args) -> int:
    A = random_sample(args.r, args.d, args.seed, args.slice_name, args.at)
    _emit(json.dumps(to_json(A), indent=2), args.output)
    return 0


def _cmd_curve(args) -> int:
    P = char_poly(_read_matrix(args.matrix))
    rep = smoothness_check(P)
    out = {
        "curve": curve_to_json(P),
        "report": {
            "genus": rep.genus,
            "unramified_nodes_checked": [
                [_node_json(c), flag] for c, flag in rep.unramified_nodes_checked
            ],
            "smooth_heuristic": rep.smooth_heuristic,
            "discriminant_min_separation": rep.discriminant_min_separation,
        },
    }
    _emit(json.dumps(out, indent=2), args.output)
    return 0


def _cmd_normalform(args) -> int:
    S, g = normal_form(_read_matrix(args.matrix), args.at)
    out = {"S": to_json(S), "g": _gauge_json(g)}
    _emit(json.dumps(out, indent=2), args.output)
    return 0


def _cmd_flow(args) -> int:
    kind = args.field.replace("-", "_")
    spec = FieldSpec(kind, args.p, a=args.a, j=args.j)
    traj = integrate(_read_matrix(args.matrix), spec, args.t, args.dt)
    fmt = args.format
    if fmt is None:
        fmt = "csv" if (args.output or "").endswith(".csv") else "json"
    if fmt == "csv":
        _emit(trajectory_to_csv(traj), args.output)
    else:
        _emit(json.dumps(trajectory_to_json(traj, args.stride), indent=2), args.output)
    return 0


def _cmd_sov(args) -> int:
    div = sov_divisor(_read_matrix(args.matrix))
    _emit(json.dumps(divisor_to_json(div), indent=2), args.output)
    return 0


def _cmd_theta(args) -> int:
    rep = theta_membership(_read_matrix(args.matrix), args.at)
    _emit(json.dumps(theta_report_to_json(rep), indent=2), args.output)
    return 0


def _cmd_verify(args) -> int:
    report = verify_suite(args.seed, args.suite)
    for c in report.checks:
        if c.status == "skip":
            print(f"skip {c.name}")
            continue
        print(
            f"{c.status.upper():4s} {c.name}: measured {c.measured:.3e} "
            f"vs tolerance {c.tolerance:.3e} ({c.seconds:.2f}s)"
        )
    if args.json_path:
        _emit(report_to_json(report, timing=args.timing), args.json_path)
    print("result:", "pass" if report.passed else "FAIL")
    return 0 if report.passed else 1


_COMMANDS = {
    "sample": _cmd_sample,
    "curve": _cmd_curve,
    "normalform": _cmd_normalform,
    "flow": _cmd_flow,
    "sov": _cmd_sov,
    "theta": _cmd_theta,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config.load(args.config)
    try:
        return _COMMANDS[args.command](args)
    except LaxflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
