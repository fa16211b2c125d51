"""Command-line interface.

Exit codes: 0 success; 1 usage error; 2 data or I/O error; 3 processing
error (degenerate geometry, failed fits, lane failure without fallback).
All payload outputs are deterministic: same argv + same files = same bytes.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import AppConfig, load_config
from .depth import (
    DepthModel,
    PowerLawModel,
    fit_power_law,
    fit_quadratic,
    load_builtin_calibration,
    load_calibration_csv,
    model_from_ini,
    model_to_ini,
)
from .detections import load_detection_file, serialize_detections
from .errors import (
    DegenerateData,
    DegenerateQuad,
    EmptyEvaluation,
    InvalidSpec,
    LaneError,
    MalformedRecord,
    NonConvergence,
    NonMonotonicFrame,
    NonPositiveArea,
    NonPositiveDistance,
    NonPositiveSample,
    NotPhysical,
    StreamError,
)
from .evaluation import (
    SyntheticScenarioSpec,
    evaluate_manifest,
    generate_synthetic_scenario,
    load_manifest,
    rows_csv,
    summary_dict,
)
from .camera import compute_homography, threshold_lane_pixels, undistort_image, warp_image
from .geometry import FrameDims, apply_roi_preset, build_fixed_roi, horizon_row
from .images import FramesDirectory, annotate_frame, draw_polygon, save_frame_png
from .lanes import SlidingWindowLaneFitter, lane_polygon
from .pipeline import run_sequence, serialize_reports, write_reports
from .safety import SpeedTrack, load_speed_csv, parse_speed_literal

import numpy as np

_DATA_ERRORS = (
    OSError,
    ValueError,
    configparser.Error,
    MalformedRecord,
    NonMonotonicFrame,
    NonPositiveSample,
    StreamError,
    InvalidSpec,
)
_PROCESSING_ERRORS = (
    DegenerateData,
    DegenerateQuad,
    NonConvergence,
    LaneError,
    NonPositiveArea,
    NonPositiveDistance,
    NotPhysical,
    EmptyEvaluation,
)


class _Parser(argparse.ArgumentParser):
    # argparse reserves status 2 for bad usage; this CLI uses 1 for usage
    # and keeps 2 for data errors, so remap here.
    def error(self, message: str) -> "None":  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _roi_type(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"roi type must be an integer, got {text!r}")
    if value not in (1, 2, 3):
        raise argparse.ArgumentTypeError("roi type must be 1, 2, or 3")
    return value


def _roi_type_list(text: str) -> list[int]:
    return [_roi_type(part) for part in text.split(",") if part.strip()]


def _speed(text: str) -> float:
    try:
        return parse_speed_literal(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _load_app(args: argparse.Namespace) -> AppConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return AppConfig()


def _resolve_model(args: argparse.Namespace, app: AppConfig) -> DepthModel:
    """--model file beats config [depth]; default is the builtin power fit."""
    if getattr(args, "model", None):
        with open(args.model, encoding="utf-8") as fh:
            return model_from_ini(fh.read())
    if app.depth_model is not None:
        return app.depth_model
    return fit_power_law(load_builtin_calibration())


def _json_safe(value: float | None) -> float | None:
    if value is None or (isinstance(value, float) and math.isinf(value)):
        return None
    return value


def _cmd_fit_depth(args: argparse.Namespace) -> int:
    samples = load_calibration_csv(args.samples)
    if args.model == "power":
        model: DepthModel = fit_power_law(samples)
        print(f"variant=power a={model.a!r} b={model.b!r} log_rms={model.log_rms!r}")
    else:
        model = fit_quadratic(samples)
        print(f"variant=quadratic c2={model.c2!r} c1={model.c1!r} c0={model.c0!r}")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(model_to_ini(model))
    return 0


def _cmd_roi(args: argparse.Namespace) -> int:
    app = _load_app(args)
    dims = FrameDims(
        width=args.width or app.dims.width, height=args.height or app.dims.height
    )
    spec = apply_roi_preset(app.roi_spec, args.roi_type)
    poly = build_fixed_roi(spec, dims)
    payload = {
        "roi_type": args.roi_type,
        "width": dims.width,
        "height": dims.height,
        "horizon_y": horizon_row(spec, dims),
        "vertices": [[x, y] for x, y in poly.vertices],
    }
    print(json.dumps(payload, separators=(",", ":")))
    if args.overlay:
        canvas = np.zeros((dims.height, dims.width, 3), dtype=np.uint8)
        save_frame_png(args.overlay, draw_polygon(canvas, poly.vertices))
    return 0


def _cmd_lane(args: argparse.Namespace) -> int:
    app = _load_app(args)
    provider = FramesDirectory(args.frames)
    indices = [args.frame] if args.frame is not None else provider.frames()
    if not indices:
        raise LaneError(f"no <index>.png frames under {args.frames}")

    homography = None
    if app.warp_src is not None and app.warp_dst is not None:
        homography = compute_homography(app.warp_src, app.warp_dst)
    fitter = SlidingWindowLaneFitter(
        n_windows=app.n_windows, margin=app.margin, min_pixels=app.min_pixels
    )
    horizon_y = horizon_row(app.roi_spec, app.dims)
    if args.overlay_dir:
        os.makedirs(args.overlay_dir, exist_ok=True)

    prior = None
    for index in indices:
        img = provider(index)
        if img is None:
            raise LaneError(f"no frame image for frame {index}")
        if img.shape[:2] != (app.dims.height, app.dims.width):
            raise ValueError(
                f"frame {index} is {img.shape[:2]}, config says "
                f"{(app.dims.height, app.dims.width)}"
            )
        work = undistort_image(img, app.camera) if app.camera else img
        mask = threshold_lane_pixels(work, app.color_thresholds)
        if homography is not None:
            mask = warp_image(mask, homography)
        fitter.fit(mask, prior=prior)
        prior = (fitter.left_fit_, fitter.right_fit_) if args.track else None
        result = fitter.result(app.dims, app.xm_per_px, app.ym_per_px)
        poly = lane_polygon(
            fitter.left_fit_, fitter.right_fit_, app.dims, horizon_y, homography=homography
        )
        line = {
            "frame": index,
            "left": [result.left.a, result.left.b, result.left.c],
            "right": [result.right.a, result.right.b, result.right.c],
            "curvature_radius_m": _json_safe(result.curvature_radius_m),
            "vehicle_offset_m": result.vehicle_offset_m,
            "pixels": [fitter.n_left_, fitter.n_right_],
            "used_prior": fitter.used_prior_,
        }
        print(json.dumps(line, separators=(",", ":")))
        if args.overlay_dir:
            overlay = draw_polygon(img, poly.vertices)
            save_frame_png(Path(args.overlay_dir) / f"{index}.png", overlay)
    return 0


def _build_run_config(args: argparse.Namespace, app: AppConfig):
    model = _resolve_model(args, app)
    cfg = app.pipeline_config(model)
    if args.roi_type is not None:
        cfg = replace(cfg, roi_spec=apply_roi_preset(cfg.roi_spec, args.roi_type))
    if getattr(args, "lane", False):
        cfg = replace(cfg, roi_source="lane")
    return cfg


def _cmd_run(args: argparse.Namespace) -> int:
    app = _load_app(args)
    cfg = _build_run_config(args, app)
    frames = load_detection_file(args.detections)
    speeds = (
        load_speed_csv(args.speed_file)
        if args.speed_file
        else SpeedTrack.constant(args.speed)
    )
    provider = FramesDirectory(args.frames) if args.frames else None
    if cfg.roi_source == "lane" and provider is None:
        raise ValueError("--lane needs --frames pointing at the frame images")

    reports = run_sequence(frames, speeds, cfg, frame_images=provider)
    if args.report:
        write_reports(args.report, reports)
    else:
        sys.stdout.write(serialize_reports(reports))

    if args.annotate_dir:
        if provider is None:
            raise ValueError("--annotate-dir needs --frames")
        os.makedirs(args.annotate_dir, exist_ok=True)
        for frame, report in zip(frames, reports):
            img = provider(frame.frame_index)
            if img is None:
                continue
            boxes = []
            for det_index, color in report.annotations:
                box = frame.detections[det_index].box
                boxes.append(((box.x, box.y, box.w, box.h), color))
            save_frame_png(
                Path(args.annotate_dir) / f"{frame.frame_index}.png",
                annotate_frame(img, boxes),
            )
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    app = _load_app(args)
    model = _resolve_model(args, app)
    cfg = app.pipeline_config(model)
    entries = load_manifest(args.manifest)
    result = evaluate_manifest(
        entries,
        cfg,
        roi_types=args.roi_types,
        persistence=args.persistence,
        jobs=args.jobs,
        delay_over=args.delay_over,
    )
    summary = json.dumps(summary_dict(result), indent=2)
    print(summary)
    if args.summary:
        with open(args.summary, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(summary + "\n")
    if args.rows:
        with open(args.rows, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rows_csv(result))
    return 0


def _cmd_gen_synth(args: argparse.Namespace) -> int:
    app = _load_app(args)
    model = _resolve_model(args, app)
    if not isinstance(model, PowerLawModel):
        raise InvalidSpec("scenario generation needs a power-law depth model (invertible)")
    roi_spec = app.roi_spec
    if args.roi_type is not None:
        roi_spec = apply_roi_preset(roi_spec, args.roi_type)
    spec = SyntheticScenarioSpec(
        ego_speed_mps=args.ego,
        initial_distance_m=args.d0,
        closing_mps=args.closing,
        fps=args.fps,
        duration_s=args.duration,
        object_class=args.object_class,
        in_roi=not args.out_of_roi,
        dims=app.dims,
        roi_spec=roi_spec,
    )
    frames, label, first_danger = generate_synthetic_scenario(spec, model)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_detections(frames))
    print(
        json.dumps(
            {"label": label, "first_danger_frame": first_danger, "frames": len(frames)},
            separators=(",", ":"),
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="roadsentry",
        description="Forward-threat detection from dashcam detection streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--config",
            default=os.environ.get("ROADSENTRY_CONFIG"),
            help="INI config file (default: $ROADSENTRY_CONFIG)",
        )

    p = sub.add_parser("fit-depth", help="fit an area-to-distance model from CSV samples")
    p.add_argument("--samples", required=True, help="CSV with header area_px2,distance_m")
    p.add_argument("--model", choices=("power", "quadratic"), default="power")
    p.add_argument("--out", help="write the fitted model as an INI file")
    p.set_defaults(func=_cmd_fit_depth)

    p = sub.add_parser("roi", help="emit an ROI polygon (JSON, optional PNG overlay)")
    add_common(p)
    p.add_argument("--roi-type", type=_roi_type, default=2)
    p.add_argument("--width", type=int, help="frame width (default from config)")
    p.add_argument("--height", type=int, help="frame height (default from config)")
    p.add_argument("--overlay", help="write the polygon drawn on a black canvas")
    p.set_defaults(func=_cmd_roi)

    p = sub.add_parser("lane", help="run the lane chain over a frame directory")
    add_common(p)
    p.add_argument("--frames", required=True, help="directory of <index>.png frames")
    p.add_argument("--frame", type=int, help="process a single frame index")
    p.add_argument("--track", action="store_true", help="reuse the previous fit per frame")
    p.add_argument("--overlay-dir", help="write lane polygons drawn on the frames")
    p.set_defaults(func=_cmd_lane)

    p = sub.add_parser("run", help="process one detection stream into frame reports")
    add_common(p)
    p.add_argument("--detections", required=True, help="JSON-Lines detection stream")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--speed", type=_speed, help="constant ego speed, e.g. 15 or 54kmh")
    group.add_argument("--speed-file", help="per-frame CSV with header frame,speed_mps")
    p.add_argument("--roi-type", type=_roi_type, default=None)
    p.add_argument("--model", help="fitted depth model INI (default: builtin power fit)")
    p.add_argument("--report", help="write JSON-Lines reports here (default: stdout)")
    p.add_argument("--frames", help="frame PNG directory (lane mode, annotation)")
    p.add_argument("--lane", action="store_true", help="use the detected lane as ROI")
    p.add_argument("--annotate-dir", help="write annotated PNG frames here")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("eval", help="evaluate a manifest of videos against ground truth")
    add_common(p)
    p.add_argument("--manifest", required=True, help="CSV manifest (see docs)")
    p.add_argument(
        "--roi-types",
        type=_roi_type_list,
        default=[2],
        help="comma-separated ROI types to evaluate (default: 2)",
    )
    p.add_argument("--persistence", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1, help="parallel video workers")
    p.add_argument(
        "--delay-over",
        choices=("own", "common"),
        default="own",
        help="delay stats over each type's own TPs, or only videos TP under all types",
    )
    p.add_argument("--model", help="fitted depth model INI (default: builtin power fit)")
    p.add_argument("--summary", help="also write the JSON summary here")
    p.add_argument("--rows", help="write per-video CSV rows here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("gen-synth", help="generate a synthetic approach scenario")
    add_common(p)
    p.add_argument("--out", required=True, help="detection stream output path")
    p.add_argument("--ego", type=_speed, required=True, help="ego speed, e.g. 20 or 72kmh")
    p.add_argument("--d0", type=float, required=True, help="initial distance in meters")
    p.add_argument("--closing", type=float, required=True, help="closing speed in m/s")
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--duration", type=float, default=10.0, help="seconds")
    p.add_argument("--object-class", default="car")
    p.add_argument("--out-of-roi", action="store_true", help="place the object above the horizon")
    p.add_argument("--roi-type", type=_roi_type, default=None)
    p.add_argument("--model", help="power-law model INI (default: builtin fit)")
    p.set_defaults(func=_cmd_gen_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    try:
        return args.func(args)
    except _PROCESSING_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
