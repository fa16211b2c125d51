"""Forward-threat detection for dashcam footage.

Consumes per-frame object-detection streams plus ego speed, estimates
obstacle distance from bounding-box area, applies the two-second rule
inside a trapezoidal or lane-derived region of interest, and scores
video-level crash predictions against ground truth.
"""

from .camera import (
    CameraIntrinsics,
    ColorThresholds,
    Homography,
    compute_homography,
    distort_point,
    threshold_lane_pixels,
    undistort_image,
    undistort_point,
    undistort_points,
    warp_image,
)
from .depth import (
    CalibrationSample,
    DepthModel,
    PowerLawModel,
    PowerLawRegressor,
    QuadraticAreaRegressor,
    QuadraticModel,
    fit_power_law,
    fit_quadratic,
    load_builtin_calibration,
    load_calibration_csv,
    predict_distance,
)
from .detections import (
    BBox,
    Detection,
    FrameDetections,
    bbox_area,
    bbox_center,
    filter_detections,
    parse_detection_stream,
    serialize_detections,
)
from .errors import (
    DegenerateData,
    DegenerateQuad,
    EmptyEvaluation,
    InsufficientPixels,
    InvalidSpec,
    LaneError,
    MalformedRecord,
    MissingLane,
    NonConvergence,
    NonMonotonicFrame,
    NonPositiveArea,
    NonPositiveDistance,
    NonPositiveSample,
    NotPhysical,
    RoadSentryError,
    SelfIntersecting,
    StreamError,
)
from .evaluation import (
    ConfusionMatrix,
    EvaluationResult,
    MetricsReport,
    SyntheticScenarioSpec,
    VideoManifestEntry,
    compute_metrics,
    evaluate_manifest,
    generate_synthetic_scenario,
    load_manifest,
    video_verdict,
)
from .geometry import (
    ROI_PRESETS,
    FrameDims,
    Polygon,
    RoiSpec,
    apply_roi_preset,
    build_fixed_roi,
    horizon_row,
    is_threat_candidate,
    point_in_polygon,
)
from .lanes import (
    LanePolynomial,
    LaneResult,
    SlidingWindowLaneFitter,
    base_positions,
    curvature_radius,
    fit_lane_polynomial,
    lane_polygon,
    vehicle_offset,
)
from .pipeline import (
    FrameReport,
    PipelineConfig,
    ThreatAssessment,
    assess_frame,
    run_sequence,
    serialize_reports,
)
from .safety import HeadwayConfig, SpeedTrack, Verdict, classify_headway

__version__ = "0.1.0"
