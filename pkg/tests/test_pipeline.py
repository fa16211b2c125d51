"""Frame assessment, sequence processing, lane-ROI fallback, report serialization."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from roadsentry.depth import PowerLawModel
from roadsentry.detections import parse_detection_stream
from roadsentry.errors import StreamError
from roadsentry.geometry import FrameDims, RoiSpec, build_fixed_roi, horizon_row
from roadsentry.pipeline import (
    FrameReport,
    PipelineConfig,
    ThreatAssessment,
    assess_frame,
    report_to_dict,
    run_sequence,
    serialize_reports,
    write_reports,
)
from roadsentry.safety import SpeedTrack, Verdict

from conftest import stream_line

DIMS = FrameDims(1280, 720)
# d = 100 / sqrt(area): a 20x20 box sits exactly 5 m out
MODEL = PowerLawModel(a=100.0, b=-0.5)


def make_config(**kwargs) -> PipelineConfig:
    return PipelineConfig(dims=DIMS, depth_model=MODEL, **kwargs)


def frame_of(line: str):
    return parse_detection_stream(line)[0]


def assess(line: str, speed: float, cfg: PipelineConfig | None = None) -> FrameReport:
    cfg = cfg or make_config()
    roi = build_fixed_roi(cfg.roi_spec, cfg.dims)
    return assess_frame(frame_of(line), speed, cfg, roi, horizon_row(cfg.roi_spec, cfg.dims))


def test_in_roi_danger_hand_numbers() -> None:
    report = assess(stream_line(0, [([630.0, 590.0, 20.0, 20.0], "car", 0.9)]), speed=10.0)
    (a,) = report.assessments
    assert a.in_roi
    assert a.center == (640.0, 600.0)
    assert a.area == 400.0
    assert a.distance == pytest.approx(5.0)
    assert a.headway == pytest.approx(0.5)
    assert a.verdict is Verdict.DANGER
    assert not a.floored
    assert a.color == "red"
    assert report.frame_verdict is Verdict.DANGER


def test_exact_threshold_headway_is_safe() -> None:
    report = assess(stream_line(0, [([630.0, 590.0, 20.0, 20.0], "car", 0.9)]), speed=2.5)
    (a,) = report.assessments
    assert a.headway == pytest.approx(2.0)
    assert a.verdict is Verdict.SAFE
    assert a.color == "blue"
    assert report.frame_verdict is Verdict.SAFE


def test_zero_speed_unbounded_headway() -> None:
    report = assess(stream_line(0, [([630.0, 590.0, 20.0, 20.0], "car", 0.9)]), speed=0.0)
    (a,) = report.assessments
    assert a.headway is math.inf
    assert a.verdict is Verdict.SAFE


def test_filter_drops_but_keeps_stream_indices() -> None:
    line = stream_line(
        0,
        [
            ([630.0, 590.0, 20.0, 20.0], "car", 0.3),  # confidence too low
            ([630.0, 590.0, 20.0, 20.0], "bird", 0.9),  # class not allowed
            ([600.0, 580.0, 30.0, 30.0], "truck", 0.8),
        ],
    )
    report = assess(line, speed=10.0)
    assert len(report.assessments) == 1
    assert report.assessments[0].det_index == 2
    assert report.annotations == ((2, "red"),)


def test_out_of_roi_and_above_horizon() -> None:
    line = stream_line(
        0,
        [
            ([90.0, 590.0, 20.0, 20.0], "car", 0.9),  # left of the trapezoid
            ([630.0, 100.0, 20.0, 20.0], "car", 0.9),  # centered above the horizon row
            ([630.0, 304.0, 20.0, 20.0], "car", 0.9),  # center exactly on the row
        ],
    )
    report = assess(line, speed=10.0)
    assert [a.in_roi for a in report.assessments] == [False, False, False]
    assert all(a.distance is None and a.headway is None and a.verdict is None for a in report.assessments)
    assert report.frame_verdict is Verdict.SAFE
    assert report.annotations == ((0, "none"), (1, "none"), (2, "none"))


def test_not_physical_prediction_floors_to_danger() -> None:
    huge = stream_line(0, [([-1360.0, -1400.0, 4000.0, 4000.0], "truck", 0.99)])
    report = assess(huge, speed=10.0)
    (a,) = report.assessments
    assert a.in_roi and a.floored
    assert a.distance == pytest.approx(0.1)
    assert a.headway == pytest.approx(0.01)
    assert a.verdict is Verdict.DANGER


def test_frame_verdict_is_min_over_assessments() -> None:
    line = stream_line(
        0,
        [
            ([632.0, 592.0, 16.0, 16.0], "car", 0.9),  # 6.25 m at speed 3 -> safe
            ([600.0, 560.0, 80.0, 80.0], "car", 0.9),  # bigger box, closer -> danger
        ],
    )
    report = assess(line, speed=3.0)
    assert [a.verdict for a in report.assessments] == [Verdict.SAFE, Verdict.DANGER]
    assert report.frame_verdict is Verdict.DANGER


def test_empty_frame_is_safe() -> None:
    report = assess(stream_line(5, []), speed=20.0)
    assert report.assessments == ()
    assert report.frame_verdict is Verdict.SAFE


def test_threat_assessment_invariants() -> None:
    with pytest.raises(ValueError):
        ThreatAssessment(det_index=0, center=(0.0, 0.0), area=1.0, in_roi=True)
    with pytest.raises(ValueError):
        ThreatAssessment(
            det_index=0, center=(0.0, 0.0), area=1.0, in_roi=False, distance=5.0,
            headway=1.0, verdict=Verdict.SAFE,
        )


def test_frame_report_consistency_check() -> None:
    safe = ThreatAssessment(
        det_index=0, center=(640.0, 600.0), area=400.0, in_roi=True,
        distance=5.0, headway=2.5, verdict=Verdict.SAFE,
    )
    with pytest.raises(ValueError):
        FrameReport(frame_index=0, assessments=(safe,), frame_verdict=Verdict.DANGER)


def test_pipeline_config_validation() -> None:
    with pytest.raises(ValueError):
        make_config(roi_source="auto")
    with pytest.raises(ValueError):
        make_config(min_conf=1.5)
    with pytest.raises(ValueError):
        make_config(warp_src=((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)))


def test_run_sequence_fixed_roi() -> None:
    text = (
        stream_line(0, [([630.0, 590.0, 20.0, 20.0], "car", 0.9)])
        + "\n"
        + stream_line(4, [([600.0, 560.0, 80.0, 80.0], "car", 0.9)])
        + "\n"
    )
    speeds = SpeedTrack.per_frame({0: 2.5, 4: 10.0})
    reports = run_sequence(text, speeds, make_config())
    assert [r.frame_index for r in reports] == [0, 4]
    assert [r.roi_source for r in reports] == ["fixed", "fixed"]
    assert reports[0].frame_verdict is Verdict.SAFE
    assert reports[1].frame_verdict is Verdict.DANGER


def test_run_sequence_accepts_parsed_frames_and_checks_order() -> None:
    frames = parse_detection_stream(stream_line(0, []) + "\n" + stream_line(1, []))
    reports = run_sequence(frames, SpeedTrack.constant(10.0), make_config())
    assert len(reports) == 2
    with pytest.raises(StreamError):
        run_sequence(list(reversed(frames)), SpeedTrack.constant(10.0), make_config())
    with pytest.raises(StreamError):
        run_sequence('{"frame":0}', SpeedTrack.constant(10.0), make_config())


def lane_frame_image() -> np.ndarray:
    img = np.zeros((720, 1280, 3), dtype=np.uint8)
    img[:, 290:311] = 255  # left paint stripe around x = 300
    img[:, 970:991] = 255  # right stripe around x = 980
    return img


def test_run_sequence_lane_roi_narrows_region() -> None:
    # centered at (250, 700): inside the fixed trapezoid, left of the lane corridor
    text = stream_line(0, [([240.0, 690.0, 20.0, 20.0], "car", 0.9)]) + "\n" + stream_line(
        1, [([240.0, 690.0, 20.0, 20.0], "car", 0.9)]
    )
    img = lane_frame_image()
    cfg = make_config(roi_source="lane")
    reports = run_sequence(text, SpeedTrack.constant(10.0), cfg, frame_images={0: img, 1: img})
    assert all(r.roi_source == "lane" for r in reports)
    assert all(not r.assessments[0].in_roi for r in reports)
    # same stream under the fixed trapezoid does flag the box
    fixed = run_sequence(text, SpeedTrack.constant(10.0), make_config())
    assert all(r.assessments[0].in_roi for r in fixed)


def test_lane_mode_falls_back_per_frame_when_image_missing() -> None:
    text = stream_line(0, [([240.0, 690.0, 20.0, 20.0], "car", 0.9)]) + "\n" + stream_line(
        7, [([240.0, 690.0, 20.0, 20.0], "car", 0.9)]
    )
    cfg = make_config(roi_source="lane")
    reports = run_sequence(
        text, SpeedTrack.constant(10.0), cfg, frame_images={0: lane_frame_image()}
    )
    assert reports[0].roi_source == "lane"
    assert not reports[0].assessments[0].in_roi
    assert reports[1].roi_source == "fixed"  # frame 7 had no image
    assert reports[1].assessments[0].in_roi


def test_lane_mode_requires_frames_and_matching_dims() -> None:
    text = stream_line(0, [])
    cfg = make_config(roi_source="lane")
    with pytest.raises(ValueError):
        run_sequence(text, SpeedTrack.constant(10.0), cfg)
    small = np.zeros((10, 10, 3), dtype=np.uint8)
    with pytest.raises(ValueError):
        run_sequence(text, SpeedTrack.constant(10.0), cfg, frame_images={0: small})


def test_report_dict_layout_and_unbounded_headway() -> None:
    report = assess(stream_line(3, [([630.0, 590.0, 20.0, 20.0], "car", 0.9)]), speed=0.0)
    d = report_to_dict(report)
    assert list(d) == ["frame", "roi_source", "verdict", "assessments", "annotations"]
    assert d["frame"] == 3 and d["verdict"] == "safe"
    (entry,) = d["assessments"]
    assert list(entry) == ["index", "center", "area", "in_roi", "distance", "headway", "verdict", "floored"]
    assert entry["headway"] is None
    assert d["annotations"] == [{"index": 0, "color": "blue"}]
    out_entry = report_to_dict(assess(stream_line(0, [([90.0, 590.0, 20.0, 20.0], "car", 0.9)]), 10.0))
    assert list(out_entry["assessments"][0]) == ["index", "center", "area", "in_roi"]


def test_serialize_reports_deterministic(tmp_path) -> None:
    text = stream_line(0, [([630.0, 590.0, 20.0, 20.0], "car", 0.9)]) + "\n" + stream_line(2, [])
    speeds = SpeedTrack.constant(10.0)

    def render() -> str:
        return serialize_reports(run_sequence(text, speeds, make_config()))

    first, second = render(), render()
    assert first == second
    assert first.endswith("\n")
    for line in first.strip().splitlines():
        json.loads(line)
    assert serialize_reports([]) == ""
    p = tmp_path / "reports.jsonl"
    write_reports(p, run_sequence(text, speeds, make_config()))
    assert p.read_text(encoding="utf-8") == first
