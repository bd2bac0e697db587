"""Command-line entry points: track, eval, synth.

Exit codes: 0 success, 1 runtime/I-O failure, 2 usage or configuration
error. Every failure prints one diagnostic line to stderr.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, TrackerConfig, load_config, parse_feature_list
from .harness import (
    Rect,
    auc_success,
    gen_synthetic,
    load_frame,
    load_sequence,
    load_trajectory,
    overlap_precision,
    save_trajectory,
    write_sequence,
)
from .tracker import init_tracker, state_to_rect, track_frame

__all__ = ["run_cli", "main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep argparse from calling sys.exit directly
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _build_parser() -> _Parser:
    parser = _Parser(prog="fusetrack")
    sub = parser.add_subparsers(dest="command", required=True)

    track = sub.add_parser("track", help="run the tracker over a sequence")
    track.add_argument("--sequence", required=True)
    track.add_argument("--config", default=None)
    track.add_argument("--out", required=True)
    track.add_argument("--features", default=None,
                       help="comma list overriding the config (hog,cn,gray,external:PATH)")

    ev = sub.add_parser("eval", help="score a trajectory against ground truth")
    ev.add_argument("--results", required=True)
    ev.add_argument("--sequence", required=True)
    ev.add_argument("--op-threshold", type=float, default=0.5)
    ev.add_argument("--curve", default=None, help="write the success curve as CSV")

    synth = sub.add_parser("synth", help="generate a synthetic sequence")
    synth.add_argument("--kind", required=True, choices=["translate", "zoom"])
    synth.add_argument("--frames", type=int, required=True)
    synth.add_argument("--seed", type=int, required=True)
    synth.add_argument("--out", required=True)
    return parser


def _cmd_track(args) -> int:
    cfg = load_config(args.config) if args.config else TrackerConfig()
    if args.features:
        cells = {"hog_cell": 4, "cn_cell": 4, "gray_cell": 4}
        cfg.features = parse_feature_list(args.features, cells)
    seq = load_sequence(args.sequence)
    first = seq.groundtruth[0]
    frame = load_frame(seq.frame_paths[0])
    st = init_tracker(frame, (first.x, first.y, first.w, first.h), cfg)
    rects = [first]
    for path in seq.frame_paths[1:]:
        target, st = track_frame(st, load_frame(path))
        x, y, w, h = state_to_rect(target)
        rects.append(Rect(x, y, w, h))
    save_trajectory(args.out, rects)
    print(f"tracked {len(rects)} frames -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    traj = load_trajectory(args.results)
    seq = load_sequence(args.sequence)
    op = overlap_precision(traj, seq.groundtruth, args.op_threshold)
    auc, curve = auc_success(traj, seq.groundtruth)
    if args.curve:
        with open(args.curve, "w", encoding="utf-8") as fh:
            fh.write("threshold,op_percent\n")
            for t, v in zip(curve.thresholds, curve.op):
                fh.write(f"{float(t):.2f},{float(v)!r}\n")
    print(f"op({args.op_threshold:g})={op!r} auc={auc!r}")
    return 0


def _cmd_synth(args) -> int:
    spec, images = gen_synthetic(args.kind, args.frames, args.seed)
    write_sequence(args.out, spec, images)
    print(f"wrote {len(images)} frames to {args.out}")
    return 0


def run_cli(argv) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "track":
            return _cmd_track(args)
        if args.command == "eval":
            return _cmd_eval(args)
        return _cmd_synth(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime / I-O problems
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
