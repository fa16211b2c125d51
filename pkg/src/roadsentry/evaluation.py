"""Video-level evaluation: crash prediction, metrics, manifests, and the
synthetic-scenario generator used as the end-to-end oracle."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .depth import DISTANCE_FLOOR_M, PowerLawModel
from .detections import Detection, BBox, FrameDetections, load_detection_file
from .errors import EmptyEvaluation, InvalidSpec
from .geometry import FrameDims, RoiSpec, apply_roi_preset, horizon_row
from .images import FramesDirectory
from .pipeline import FrameReport, PipelineConfig, run_sequence
from .safety import HeadwayConfig, SpeedTrack, Verdict, load_speed_csv

LABELS = ("crash", "no_crash")

# Confidence stamped on generated detections; comfortably above the default filter.
SYNTH_CONFIDENCE = 0.93


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricsReport:
    """Accuracy plus frame-delay stats; delays cover true positives only."""

    accuracy: float
    confusion: ConfusionMatrix
    frame_delay_avg: float | None
    frame_delay_median: float | None


@dataclass(frozen=True)
class VideoManifestEntry:
    video_id: str
    label: str
    detections_path: Path
    speed: float | Path  # constant m/s, or a per-frame CSV path
    frames_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        if not self.video_id:
            raise ValueError("video_id must be non-empty")


@dataclass(frozen=True)
class VideoRow:
    video_id: str
    roi_type: int
    predicted: str
    truth: str
    first_alert_frame: int | None


@dataclass(frozen=True)
class EvaluationResult:
    rows: tuple[VideoRow, ...]
    per_type: dict[int, MetricsReport]


def video_verdict(
    reports: Sequence[FrameReport], persistence: int = 1
) -> tuple[str, int | None]:
    """Crash iff some run of >= persistence consecutive Danger frames exists.

    Consecutive means adjacent frame indices; a stream gap (frames with no
    detections are omitted) breaks a run. Returns the label and the first
    frame index of the first qualifying run (None when no_crash).
    """
    if persistence < 1:
        raise ValueError("persistence must be >= 1")
    run_len = 0
    run_start: int | None = None
    prev_index: int | None = None
    for report in reports:
        if report.frame_verdict is Verdict.DANGER:
            if run_len > 0 and prev_index is not None and report.frame_index == prev_index + 1:
                run_len += 1
            else:
                run_len = 1
                run_start = report.frame_index
            if run_len >= persistence:
                return "crash", run_start
        else:
            run_len = 0
        prev_index = report.frame_index
    return "no_crash", None


def _delay_stats(delays: Sequence[int]) -> tuple[float | None, float | None]:
    if not delays:
        return None, None
    ordered = sorted(delays)
    avg = sum(ordered) / len(ordered)
    median = float(ordered[(len(ordered) - 1) // 2])  # lower middle for even counts
    return avg, median


def compute_metrics(rows: Sequence[tuple[str, str, int | None]]) -> MetricsReport:
    """Accuracy, confusion matrix, and TP frame-delay stats from
    (predicted, truth, first_alert_frame) rows."""
    if not rows:
        raise EmptyEvaluation("no rows to evaluate")
    tp = fp = tn = fn = 0
    delays: list[int] = []
    for predicted, truth, first_alert in rows:
        if predicted not in LABELS or truth not in LABELS:
            raise ValueError(f"labels must be in {LABELS}, got ({predicted!r}, {truth!r})")
        if predicted == "crash" and truth == "crash":
            tp += 1
            if first_alert is None:
                raise ValueError("true positive row lacks a first_alert_frame")
            delays.append(first_alert)
        elif predicted == "crash":
            fp += 1
        elif truth == "crash":
            fn += 1
        else:
            tn += 1
    confusion = ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)
    avg, median = _delay_stats(delays)
    return MetricsReport(
        accuracy=(tp + tn) / len(rows),
        confusion=confusion,
        frame_delay_avg=avg,
        frame_delay_median=median,
    )


@dataclass(frozen=True)
class SyntheticScenarioSpec:
    """Constant-closing-speed approach used to synthesize detection streams.

    The lead obstacle starts at initial_distance_m and closes at
    closing_mps; its bounding-box area per frame inverts the power-law
    depth model, quantized up to whole pixels (ceil) so the simulated
    detector never reports a finer area than a real pixel grid could.
    """

    ego_speed_mps: float
    initial_distance_m: float
    closing_mps: float
    fps: float
    duration_s: float
    object_class: str = "car"
    in_roi: bool = True
    dims: FrameDims = FrameDims(1280, 720)
    roi_spec: RoiSpec = RoiSpec()

    def __post_init__(self) -> None:
        if not (math.isfinite(self.ego_speed_mps) and self.ego_speed_mps >= 0.0):
            raise InvalidSpec("ego_speed_mps must be >= 0 and finite")
        if not (math.isfinite(self.initial_distance_m) and self.initial_distance_m > 0.0):
            raise InvalidSpec("initial_distance_m must be positive")
        if not (math.isfinite(self.closing_mps) and self.closing_mps >= 0.0):
            raise InvalidSpec("closing_mps must be >= 0 and finite")
        if not (math.isfinite(self.fps) and self.fps >= 1.0):
            raise InvalidSpec("fps must be >= 1")
        if not (math.isfinite(self.duration_s) and self.duration_s > 0.0):
            raise InvalidSpec("duration_s must be positive")
        if not self.object_class:
            raise InvalidSpec("object_class must be non-empty")


def generate_synthetic_scenario(
    spec: SyntheticScenarioSpec,
    model: PowerLawModel,
    headway: HeadwayConfig = HeadwayConfig(),
) -> tuple[list[FrameDetections], str, int | None]:
    """Detection stream plus ground truth (label, first-danger frame).

    Per frame t the true distance is d0 - closing*t/fps. The emitted box is
    a square whose area is ceil of the model inverse at d; the truth rule
    evaluates the model on that quantized box exactly as the pipeline will,
    so pipeline agreement is exact, not approximate. Generation stops when
    the distance reaches zero; if that happens for an in-ROI object before
    any danger frame was derivable, the scenario is contradictory and
    InvalidSpec is raised.
    """
    n_frames = int(round(spec.fps * spec.duration_s))
    if n_frames < 1:
        raise InvalidSpec("duration too short for a single frame")

    horizon = horizon_row(spec.roi_spec, spec.dims)
    cx = spec.dims.width / 2.0
    if spec.in_roi:
        cy = horizon + 0.6 * (spec.dims.height - 1 - horizon)
    else:
        cy = horizon * 0.5  # above the line: rejected no matter the polygon

    frames: list[FrameDetections] = []
    first_danger: int | None = None
    for t in range(n_frames):
        d = spec.initial_distance_m - spec.closing_mps * t / spec.fps
        if d <= 0.0:
            if spec.in_roi and first_danger is None:
                raise InvalidSpec(
                    "distance reached zero before any danger frame; "
                    "lower fps or closing speed"
                )
            break
        area = math.ceil((d / model.a) ** (1.0 / model.b))
        side = math.sqrt(area)
        seen = model.a * (side * side) ** model.b  # what the pipeline will compute
        danger = seen < DISTANCE_FLOOR_M or (
            spec.ego_speed_mps > 0.0 and seen / spec.ego_speed_mps < headway.threshold_s
        )
        if spec.in_roi and danger and first_danger is None:
            first_danger = t
        box = BBox(x=cx - side / 2.0, y=cy - side / 2.0, w=side, h=side)
        frames.append(
            FrameDetections(
                frame_index=t,
                detections=(
                    Detection(box=box, class_label=spec.object_class, confidence=SYNTH_CONFIDENCE),
                ),
            )
        )

    label = "crash" if first_danger is not None else "no_crash"
    return frames, label, first_danger


def load_manifest(path) -> list[VideoManifestEntry]:
    """CSV manifest 'video_id,label,detections_path,speed,frames_dir'.

    Relative paths resolve against the manifest's directory; the speed
    column is a number (constant m/s) or a path to a 'frame,speed_mps'
    CSV; frames_dir may be empty.
    """
    manifest_path = Path(path)
    base = manifest_path.parent
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    header = ["video_id", "label", "detections_path", "speed", "frames_dir"]
    if not rows or [c.strip() for c in rows[0]] != header:
        raise ValueError(f"{manifest_path}: expected header {','.join(header)}")

    entries: list[VideoManifestEntry] = []
    seen: set[str] = set()
    for row in rows[1:]:
        if len(row) != 5:
            raise ValueError(f"{manifest_path}: expected 5 columns, got {len(row)}")
        video_id, label, det_path, speed_field, frames_dir = (c.strip() for c in row)
        if video_id in seen:
            raise ValueError(f"{manifest_path}: duplicate video_id {video_id!r}")
        seen.add(video_id)
        speed: float | Path
        try:
            speed = float(speed_field)
        except ValueError:
            speed = base / speed_field
        entries.append(
            VideoManifestEntry(
                video_id=video_id,
                label=label,
                detections_path=base / det_path,
                speed=speed,
                frames_dir=(base / frames_dir) if frames_dir else None,
            )
        )
    return entries


def _config_for_type(base: PipelineConfig, roi_type: int) -> PipelineConfig:
    return replace(base, roi_spec=apply_roi_preset(base.roi_spec, roi_type))


def _evaluate_entry(
    entry: VideoManifestEntry, cfg: PipelineConfig, roi_type: int, persistence: int
) -> VideoRow:
    frames = load_detection_file(entry.detections_path)
    if isinstance(entry.speed, Path):
        speeds = load_speed_csv(entry.speed)
    else:
        speeds = SpeedTrack.constant(entry.speed)
    provider = None
    if cfg.roi_source == "lane":
        if entry.frames_dir is None:
            cfg = replace(cfg, roi_source="fixed")  # no frames: this video runs fixed
        else:
            provider = FramesDirectory(entry.frames_dir)
    reports = run_sequence(frames, speeds, cfg, frame_images=provider)
    predicted, first_alert = video_verdict(reports, persistence=persistence)
    return VideoRow(
        video_id=entry.video_id,
        roi_type=roi_type,
        predicted=predicted,
        truth=entry.label,
        first_alert_frame=first_alert,
    )


def evaluate_manifest(
    entries: Sequence[VideoManifestEntry],
    cfg: PipelineConfig,
    roi_types: Sequence[int] = (2,),
    persistence: int = 1,
    jobs: int = 1,
    delay_over: str = "own",
) -> EvaluationResult:
    """Run every manifest entry under each ROI type and aggregate metrics.

    Rows come back grouped by ROI type, manifest order within each group,
    regardless of jobs (parallel workers merge in submission order).

    delay_over: "own" computes each type's delay stats over its own true
    positives; "common" restricts delay stats to videos that are true
    positives under every evaluated type (accuracy is unaffected), the
    protocol used when comparing delays across ROI types.
    """
    if not entries:
        raise EmptyEvaluation("manifest has no entries")
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    if delay_over not in ("own", "common"):
        raise ValueError("delay_over must be 'own' or 'common'")

    tasks = [
        (entry, _config_for_type(cfg, roi_type), roi_type)
        for roi_type in roi_types
        for entry in entries
    ]
    if jobs == 1:
        rows = [_evaluate_entry(e, c, t, persistence) for e, c, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(
                pool.map(lambda args: _evaluate_entry(*args, persistence), tasks)
            )

    by_type: dict[int, list[VideoRow]] = {t: [] for t in roi_types}
    for row in rows:
        by_type[row.roi_type].append(row)

    common_ids: set[str] | None = None
    if delay_over == "common":
        for type_rows in by_type.values():
            ids = {r.video_id for r in type_rows if r.predicted == r.truth == "crash"}
            common_ids = ids if common_ids is None else (common_ids & ids)
        common_ids = common_ids or set()

    per_type: dict[int, MetricsReport] = {}
    for roi_type, type_rows in by_type.items():
        metrics = compute_metrics(
            [(r.predicted, r.truth, r.first_alert_frame) for r in type_rows]
        )
        if common_ids is not None:
            delays = [
                r.first_alert_frame
                for r in type_rows
                if r.predicted == r.truth == "crash" and r.video_id in common_ids
            ]
            avg, median = _delay_stats([d for d in delays if d is not None])
            metrics = replace(metrics, frame_delay_avg=avg, frame_delay_median=median)
        per_type[roi_type] = metrics
    return EvaluationResult(rows=tuple(rows), per_type=per_type)


def summary_dict(result: EvaluationResult) -> dict:
    """JSON-ready summary, keys ordered by ROI type."""
    out: dict = {}
    for roi_type in sorted(result.per_type):
        m = result.per_type[roi_type]
        out[f"roi_type_{roi_type}"] = {
            "accuracy": m.accuracy,
            "tp": m.confusion.tp,
            "fp": m.confusion.fp,
            "tn": m.confusion.tn,
            "fn": m.confusion.fn,
            "frame_delay_avg": m.frame_delay_avg,
            "frame_delay_median": m.frame_delay_median,
        }
    return out


def rows_csv(result: EvaluationResult) -> str:
    """Per-video rows as CSV (first_alert_frame empty when absent)."""
    lines = ["video_id,roi_type,predicted,truth,first_alert_frame"]
    for r in result.rows:
        alert = "" if r.first_alert_frame is None else str(r.first_alert_frame)
        lines.append(f"{r.video_id},{r.roi_type},{r.predicted},{r.truth},{alert}")
    return "\n".join(lines) + "\n"
