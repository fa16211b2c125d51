"""INI config file: one file, sectioned, every key validated.

Sections and keys (all optional; omitted values keep package defaults):

    [frame]      width, height
    [camera]     fx, fy, cx, cy, k1, k2, k3, p1, p2
    [thresholds] min_conf, allowed_classes, hue_lo, hue_hi, sat_lo, sat_hi,
                 lightness_min, white_lightness_min
    [roi]        type | left_base_frac + right_base_frac,
                 horizon_frac, apex_half_width_frac, source
    [depth]      variant, a, b, log_rms | c2, c1, c0   (same as model files)
    [safety]     threshold_s
    [lane]       n_windows, margin, min_pixels, xm_per_px, ym_per_px,
                 warp_src, warp_dst   (quads as "x1,y1;x2,y2;x3,y3;x4,y4")

Unknown sections or keys are rejected; a config file that silently ignores
typos is worse than none.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace

from .camera import CameraIntrinsics, ColorThresholds
from .depth import DepthModel, PowerLawModel, QuadraticModel
from .detections import DEFAULT_ALLOWED_CLASSES, DEFAULT_MIN_CONF
from .geometry import ROI_PRESETS, FrameDims, RoiSpec
from .lanes import XM_PER_PX_DEFAULT, YM_PER_PX_DEFAULT
from .pipeline import PipelineConfig, Quad
from .safety import HeadwayConfig

_SECTION_KEYS = {
    "frame": {"width", "height"},
    "camera": {"fx", "fy", "cx", "cy", "k1", "k2", "k3", "p1", "p2"},
    "thresholds": {
        "min_conf",
        "allowed_classes",
        "hue_lo",
        "hue_hi",
        "sat_lo",
        "sat_hi",
        "lightness_min",
        "white_lightness_min",
    },
    "roi": {
        "type",
        "left_base_frac",
        "right_base_frac",
        "horizon_frac",
        "apex_half_width_frac",
        "source",
    },
    "depth": {"variant", "a", "b", "log_rms", "c2", "c1", "c0"},
    "safety": {"threshold_s"},
    "lane": {
        "n_windows",
        "margin",
        "min_pixels",
        "xm_per_px",
        "ym_per_px",
        "warp_src",
        "warp_dst",
    },
}


@dataclass(frozen=True)
class AppConfig:
    """Parsed config file; pipeline_config() composes the runtime config."""

    dims: FrameDims = FrameDims(1280, 720)
    roi_spec: RoiSpec = RoiSpec()
    roi_source: str = "fixed"
    camera: CameraIntrinsics | None = None
    color_thresholds: ColorThresholds = ColorThresholds()
    headway: HeadwayConfig = HeadwayConfig()
    min_conf: float = DEFAULT_MIN_CONF
    allowed_classes: frozenset[str] = DEFAULT_ALLOWED_CLASSES
    n_windows: int = 9
    margin: int = 100
    min_pixels: int = 50
    xm_per_px: float = XM_PER_PX_DEFAULT
    ym_per_px: float = YM_PER_PX_DEFAULT
    warp_src: Quad | None = None
    warp_dst: Quad | None = None
    depth_model: DepthModel | None = None

    def pipeline_config(self, depth_model: DepthModel) -> PipelineConfig:
        return PipelineConfig(
            dims=self.dims,
            depth_model=depth_model,
            roi_spec=self.roi_spec,
            roi_source=self.roi_source,
            headway=self.headway,
            min_conf=self.min_conf,
            allowed_classes=self.allowed_classes,
            camera=self.camera,
            color_thresholds=self.color_thresholds,
            n_windows=self.n_windows,
            margin=self.margin,
            min_pixels=self.min_pixels,
            xm_per_px=self.xm_per_px,
            ym_per_px=self.ym_per_px,
            warp_src=self.warp_src,
            warp_dst=self.warp_dst,
        )


def _check_keys(parser: configparser.ConfigParser) -> None:
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ValueError(f"unknown config section [{section}]")
        unknown = set(parser[section]) - _SECTION_KEYS[section]
        if unknown:
            raise ValueError(f"unknown keys in [{section}]: {sorted(unknown)}")


def _parse_quad(text: str, key: str) -> Quad:
    points = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"{key}: each point must be 'x,y', got {chunk!r}")
        points.append((float(parts[0]), float(parts[1])))
    if len(points) != 4:
        raise ValueError(f"{key}: expected 4 points, got {len(points)}")
    return tuple(points)


def _parse_roi(section) -> tuple[RoiSpec, str]:
    spec = RoiSpec()
    has_type = "type" in section
    has_fracs = "left_base_frac" in section or "right_base_frac" in section
    if has_type and has_fracs:
        raise ValueError("[roi]: give either type or explicit base fractions, not both")
    if has_type:
        roi_type = section.getint("type")
        if roi_type not in ROI_PRESETS:
            raise ValueError(f"[roi]: type must be one of {sorted(ROI_PRESETS)}")
        preset = ROI_PRESETS[roi_type]
        spec = replace(
            spec,
            left_base_frac=preset.left_base_frac,
            right_base_frac=preset.right_base_frac,
        )
    elif has_fracs:
        if "left_base_frac" not in section or "right_base_frac" not in section:
            raise ValueError("[roi]: both base fractions are needed")
        spec = replace(
            spec,
            left_base_frac=section.getfloat("left_base_frac"),
            right_base_frac=section.getfloat("right_base_frac"),
        )
    if "horizon_frac" in section:
        spec = replace(spec, horizon_frac=section.getfloat("horizon_frac"))
    if "apex_half_width_frac" in section:
        spec = replace(spec, apex_half_width_frac=section.getfloat("apex_half_width_frac"))
    source = section.get("source", "fixed")
    if source not in ("fixed", "lane"):
        raise ValueError("[roi]: source must be 'fixed' or 'lane'")
    return spec, source


def _parse_camera(section) -> CameraIntrinsics:
    required = {"fx", "fy", "cx", "cy"}
    missing = required - set(section)
    if missing:
        raise ValueError(f"[camera]: missing keys {sorted(missing)}")
    return CameraIntrinsics(
        fx=section.getfloat("fx"),
        fy=section.getfloat("fy"),
        cx=section.getfloat("cx"),
        cy=section.getfloat("cy"),
        k1=section.getfloat("k1", fallback=0.0),
        k2=section.getfloat("k2", fallback=0.0),
        k3=section.getfloat("k3", fallback=0.0),
        p1=section.getfloat("p1", fallback=0.0),
        p2=section.getfloat("p2", fallback=0.0),
    )


def _parse_depth(section) -> DepthModel:
    variant = section.get("variant", "")
    if variant == "power":
        return PowerLawModel(
            a=section.getfloat("a"),
            b=section.getfloat("b"),
            log_rms=section.getfloat("log_rms", fallback=0.0),
        )
    if variant == "quadratic":
        return QuadraticModel(
            c2=section.getfloat("c2"),
            c1=section.getfloat("c1"),
            c0=section.getfloat("c0"),
        )
    raise ValueError(f"[depth]: unknown variant {variant!r}")


def load_config(path) -> AppConfig:
    """Parse and validate an INI config file into an AppConfig."""
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    _check_keys(parser)
    cfg = AppConfig()

    if parser.has_section("frame"):
        section = parser["frame"]
        cfg = replace(
            cfg,
            dims=FrameDims(
                width=section.getint("width", fallback=cfg.dims.width),
                height=section.getint("height", fallback=cfg.dims.height),
            ),
        )
    if parser.has_section("roi"):
        spec, source = _parse_roi(parser["roi"])
        cfg = replace(cfg, roi_spec=spec, roi_source=source)
    if parser.has_section("camera"):
        cfg = replace(cfg, camera=_parse_camera(parser["camera"]))
    if parser.has_section("thresholds"):
        section = parser["thresholds"]
        thresholds = ColorThresholds(
            hue_range=(
                section.getfloat("hue_lo", fallback=cfg.color_thresholds.hue_range[0]),
                section.getfloat("hue_hi", fallback=cfg.color_thresholds.hue_range[1]),
            ),
            saturation_range=(
                section.getfloat("sat_lo", fallback=cfg.color_thresholds.saturation_range[0]),
                section.getfloat("sat_hi", fallback=cfg.color_thresholds.saturation_range[1]),
            ),
            lightness_min=section.getfloat(
                "lightness_min", fallback=cfg.color_thresholds.lightness_min
            ),
            white_lightness_min=section.getfloat(
                "white_lightness_min", fallback=cfg.color_thresholds.white_lightness_min
            ),
        )
        classes = cfg.allowed_classes
        if "allowed_classes" in section:
            names = [c.strip() for c in section.get("allowed_classes").split(",") if c.strip()]
            classes = frozenset(names)
        cfg = replace(
            cfg,
            color_thresholds=thresholds,
            min_conf=section.getfloat("min_conf", fallback=cfg.min_conf),
            allowed_classes=classes,
        )
    if parser.has_section("safety"):
        cfg = replace(
            cfg,
            headway=HeadwayConfig(
                threshold_s=parser["safety"].getfloat(
                    "threshold_s", fallback=cfg.headway.threshold_s
                )
            ),
        )
    if parser.has_section("depth"):
        cfg = replace(cfg, depth_model=_parse_depth(parser["depth"]))
    if parser.has_section("lane"):
        section = parser["lane"]
        warp_src = cfg.warp_src
        warp_dst = cfg.warp_dst
        if "warp_src" in section:
            warp_src = _parse_quad(section.get("warp_src"), "warp_src")
        if "warp_dst" in section:
            warp_dst = _parse_quad(section.get("warp_dst"), "warp_dst")
        cfg = replace(
            cfg,
            n_windows=section.getint("n_windows", fallback=cfg.n_windows),
            margin=section.getint("margin", fallback=cfg.margin),
            min_pixels=section.getint("min_pixels", fallback=cfg.min_pixels),
            xm_per_px=section.getfloat("xm_per_px", fallback=cfg.xm_per_px),
            ym_per_px=section.getfloat("ym_per_px", fallback=cfg.ym_per_px),
            warp_src=warp_src,
            warp_dst=warp_dst,
        )
    return cfg
