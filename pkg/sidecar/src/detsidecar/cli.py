"""`detsidecar export`: detection-stream files from clips or frame directories."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .blob import BlobBackend, BlobConfig
from .errors import SidecarError
from .export import export_detections


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="detsidecar",
        description="Export per-frame object detections as JSON Lines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="write one detection record per frame")
    p.add_argument("--input", required=True, help="video file or directory of <index>.png frames")
    p.add_argument("--out", required=True, help="output JSON-Lines path")
    p.add_argument("--conf", type=float, default=0.5, help="confidence floor (default 0.5)")
    p.add_argument("--backend", choices=("blob", "yolo"), default="blob")
    p.add_argument("--brightness", type=int, default=128, help="blob: luminance gate 0-255")
    p.add_argument("--min-area", type=int, default=64, help="blob: smallest blob kept, px")
    p.add_argument("--class-label", default="car", help="blob: label for every blob")
    p.add_argument("--weights", help="yolo: .weights file")
    p.add_argument("--net-config", help="yolo: darknet .cfg file")
    p.add_argument("--names", help="yolo: class-names file, one per line")
    return parser


def _make_backend(args: argparse.Namespace):
    if args.backend == "blob":
        return BlobBackend(
            BlobConfig(
                brightness_min=args.brightness,
                min_area_px=args.min_area,
                class_label=args.class_label,
            )
        )
    missing = [flag for flag, value in (
        ("--weights", args.weights),
        ("--net-config", args.net_config),
        ("--names", args.names),
    ) if not value]
    if missing:
        raise SidecarError(f"yolo backend needs {', '.join(missing)}")
    from .yolo import YoloBackend, YoloConfig

    return YoloBackend(YoloConfig(args.weights, args.net_config, args.names))


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        count = export_detections(args.input, args.out, conf_floor=args.conf, backend=_make_backend(args))
    except (SidecarError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {count} frame records to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
