"""Command-line entry points: export, flow.

Exit codes: 0 success, 1 runtime/I-O failure, 2 usage or configuration
error. Every failure prints one diagnostic line to stderr.
"""

from __future__ import annotations

import argparse
import sys

from .export import ExportSpec, export_motion_features, export_rgb_features
from .flow import FLOW_GAIN, compute_flow_images
from .nets import KIND_TABLE, MissingWeightsError

__all__ = ["run_cli", "main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse from calling sys.exit directly
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="fmap-export")
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("export", help="write network features as an .fmap file")
    exp.add_argument("--sequence", required=True)
    exp.add_argument("--kind", required=True, choices=sorted(KIND_TABLE))
    exp.add_argument("--boxes", required=True,
                     help="per-frame x,y,w,h file (trajectory or ground truth)")
    exp.add_argument("--out", required=True)
    exp.add_argument("--weights", default="untrained:0",
                     help="state-dict path, or untrained:SEED for a seeded stand-in")
    exp.add_argument("--canonical", type=int, default=224,
                     help="square patch side fed to the network")
    exp.add_argument("--region-factor", type=float, default=5.0)
    exp.add_argument("--flow-dir", default=None,
                     help="motion-image folder (required for motion_deep)")
    exp.add_argument("--one-based", action="store_true",
                     help="boxes use 1-based corners (ground-truth convention)")

    flow = sub.add_parser("flow", help="write per-frame motion images")
    flow.add_argument("--sequence", required=True)
    flow.add_argument("--out", required=True)
    flow.add_argument("--method", default="classical", choices=["classical", "external"])
    flow.add_argument("--gain", type=float, default=FLOW_GAIN)
    flow.add_argument("--smoothness", type=float, default=0.5)
    flow.add_argument("--iters", type=int, default=400)
    return parser


def _cmd_export(args) -> int:
    spec = ExportSpec(
        sequence_dir=args.sequence,
        kind=args.kind,
        boxes_path=args.boxes,
        out_path=args.out,
        weights=args.weights,
        canonical_side=args.canonical,
        region_factor=args.region_factor,
        one_based=args.one_based,
    )
    if KIND_TABLE[args.kind][3] == "flow":
        if args.flow_dir is None:
            raise _UsageError("--flow-dir is required for motion_deep")
        stack = export_motion_features(spec, args.flow_dir)
    else:
        stack = export_rgb_features(spec)
    count, d, m, n = stack.shape
    print(f"wrote {count} frames of {d}x{m}x{n} (stride {spec.stride}) to {args.out}")
    return 0


def _cmd_flow(args) -> int:
    written = compute_flow_images(
        args.sequence, args.out, method=args.method, gain=args.gain,
        smoothness=args.smoothness, iters=args.iters,
    )
    print(f"wrote {len(written)} motion images to {args.out}")
    return 0


def run_cli(argv) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command == "export":
            return _cmd_export(args)
        return _cmd_flow(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MissingWeightsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime / I-O problems
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
