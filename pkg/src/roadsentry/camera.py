"""Camera-level image operations: undistortion, lane-color thresholding, perspective warps.

Images are numpy arrays of dtype uint8: shape (h, w) for masks/grayscale and
(h, w, 3) for RGB. Origin top-left, x right, y down. Points are (x, y) pairs
in pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DegenerateQuad, NonConvergence

ITERATION_CAP = 50


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics plus Brown-Conrady distortion coefficients.

    fx, fy, cx, cy are in pixels; k1..k3 are the radial terms, p1, p2 the
    tangential terms, all dimensionless in normalized coordinates.
    """

    fx: float
    fy: float
    cx: float
    cy: float
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self) -> None:
        if not (self.fx > 0.0 and self.fy > 0.0):
            raise ValueError("focal lengths must be positive")
        for name in ("fx", "fy", "cx", "cy", "k1", "k2", "k3", "p1", "p2"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"camera parameter {name} must be finite")


@dataclass(frozen=True)
class ColorThresholds:
    """HLS gates for lane-paint pixels.

    A pixel is kept iff L >= lightness_min AND (S inside saturation_range
    OR H inside hue_range OR L >= white_lightness_min). The lightness gate
    suppresses shadow edges; the hue window captures yellow paint; the
    white clause admits bright low-saturation paint that the S window
    would otherwise miss.
    """

    hue_range: tuple[float, float] = (35.0, 65.0)
    saturation_range: tuple[float, float] = (0.35, 1.0)
    lightness_min: float = 0.45
    white_lightness_min: float = 0.85

    def __post_init__(self) -> None:
        hlo, hhi = self.hue_range
        slo, shi = self.saturation_range
        if not (0.0 <= hlo <= hhi < 360.0):
            raise ValueError("hue_range must satisfy 0 <= lo <= hi < 360")
        if not (0.0 <= slo <= shi <= 1.0):
            raise ValueError("saturation_range must satisfy 0 <= lo <= hi <= 1")
        if not 0.0 <= self.lightness_min <= 1.0:
            raise ValueError("lightness_min must be in [0, 1]")
        if not 0.0 <= self.white_lightness_min <= 1.0:
            raise ValueError("white_lightness_min must be in [0, 1]")


def _check_image(img: np.ndarray, channels: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(img)
    if arr.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got dtype {arr.dtype}")
    if arr.ndim == 2 and 1 in channels:
        return arr
    if arr.ndim == 3 and arr.shape[2] in channels:
        return arr
    raise ValueError(f"expected image with {channels} channel(s), got shape {arr.shape}")


def distort_normalized(
    x: np.ndarray, y: np.ndarray, intr: CameraIntrinsics
) -> tuple[np.ndarray, np.ndarray]:
    """Forward Brown-Conrady model in normalized camera coordinates."""
    r2 = x * x + y * y
    radial = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3))
    xd = x * radial + 2.0 * intr.p1 * x * y + intr.p2 * (r2 + 2.0 * x * x)
    yd = y * radial + intr.p1 * (r2 + 2.0 * y * y) + 2.0 * intr.p2 * x * y
    return xd, yd


def distort_point(p: Sequence[float], intr: CameraIntrinsics) -> tuple[float, float]:
    """Forward-distort an ideal pixel point (the oracle direction of the model)."""
    x = (float(p[0]) - intr.cx) / intr.fx
    y = (float(p[1]) - intr.cy) / intr.fy
    xd, yd = distort_normalized(np.float64(x), np.float64(y), intr)
    return float(xd * intr.fx + intr.cx), float(yd * intr.fy + intr.cy)


def undistort_points(points: np.ndarray, intr: CameraIntrinsics) -> np.ndarray:
    """Invert the forward distortion for an (n, 2) array of pixel points.

    Damped fixed-point (compensation) iteration, capped at ITERATION_CAP
    steps: each step divides out the radial factor and subtracts the
    tangential shift evaluated at the current estimate, halving the step
    whenever the residual grows. The returned points forward-distort back
    onto the inputs within 1e-6 px; failing to get there raises
    NonConvergence (extreme coefficients, or a target beyond the fold-over
    radius of a strongly negative k1).
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 2 or not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite with shape (n, 2)")

    xd = (pts[:, 0] - intr.cx) / intr.fx
    yd = (pts[:, 1] - intr.cy) / intr.fy
    # 1e-6 px expressed in normalized units; never looser than 1e-6 normalized.
    tol = 1e-6 / max(1.0, intr.fx, intr.fy)

    x = xd.copy()
    y = yd.copy()
    k1, k2, k3, p1, p2 = intr.k1, intr.k2, intr.k3, intr.p1, intr.p2

    def _residual(px: np.ndarray, py: np.ndarray) -> float:
        fx_, fy_ = distort_normalized(px, py, intr)
        return float(max(np.max(np.abs(fx_ - xd)), np.max(np.abs(fy_ - yd))))

    prev_res = _residual(x, y)
    damping = 1.0
    for _ in range(ITERATION_CAP):
        if prev_res <= tol:
            break
        r2 = x * x + y * y
        radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
        if not np.all(np.isfinite(radial)) or np.any(np.abs(radial) < 1e-12):
            raise NonConvergence("radial factor vanished while inverting the distortion model")
        tang_x = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
        tang_y = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
        x_next = x + damping * ((xd - tang_x) / radial - x)
        y_next = y + damping * ((yd - tang_y) / radial - y)
        if not (np.all(np.isfinite(x_next)) and np.all(np.isfinite(y_next))):
            raise NonConvergence("undistortion iteration diverged")
        res = _residual(x_next, y_next)
        if res > prev_res:
            damping = max(damping * 0.5, 1.0 / 64.0)
        x, y = x_next, y_next
        prev_res = res
    if prev_res > tol:
        raise NonConvergence(
            f"undistortion did not reach tolerance in {ITERATION_CAP} iterations"
        )

    out = np.column_stack([x * intr.fx + intr.cx, y * intr.fy + intr.cy])
    return out[0] if single else out


def undistort_point(p: Sequence[float], intr: CameraIntrinsics) -> tuple[float, float]:
    """Ideal pixel location whose forward distortion reproduces p (within 1e-6 px)."""
    out = undistort_points(np.asarray(p, dtype=float), intr)
    return float(out[0]), float(out[1])


def _bilinear_sample(img: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    """Sample img at real-valued positions; positions outside the frame give black."""
    h, w = img.shape[:2]
    valid = (sx >= 0.0) & (sx <= w - 1.0) & (sy >= 0.0) & (sy <= h - 1.0)
    x0f = np.floor(sx)
    y0f = np.floor(sy)
    fx = sx - x0f
    fy = sy - y0f
    x0 = np.clip(x0f.astype(np.int64), 0, w - 1)
    y0 = np.clip(y0f.astype(np.int64), 0, h - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)

    data = img.astype(np.float64)
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    p00 = data[y0, x0]
    p10 = data[y0, x1]
    p01 = data[y1, x0]
    p11 = data[y1, x1]
    top = p00 * (1.0 - fx) + p10 * fx
    bottom = p01 * (1.0 - fx) + p11 * fx
    out = top * (1.0 - fy) + bottom * fy
    if img.ndim == 3:
        out[~valid] = 0.0
    else:
        out = np.where(valid, out, 0.0)
    return np.rint(out).astype(np.uint8)


def undistort_image(img: np.ndarray, intr: CameraIntrinsics) -> np.ndarray:
    """Resample so straight world lines become straight image lines.

    Each output (ideal) pixel is sampled from the input at its forward-
    distorted location with bilinear interpolation; samples falling outside
    the input are black.
    """
    arr = _check_image(img, (1, 3))
    h, w = arr.shape[:2]
    u = np.arange(w, dtype=float)
    v = np.arange(h, dtype=float)
    xn = (u[None, :] - intr.cx) / intr.fx
    yn = (v[:, None] - intr.cy) / intr.fy
    xn, yn = np.broadcast_arrays(xn, yn)
    xd, yd = distort_normalized(xn, yn, intr)
    return _bilinear_sample(arr, xd * intr.fx + intr.cx, yd * intr.fy + intr.cy)


def rgb_to_hls(img: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standard hexcone HLS conversion.

    Returns (H, L, S) float arrays: H in degrees [0, 360), L and S in [0, 1].
    Achromatic pixels get H = 0 and S = 0. Where two channels tie for the
    maximum, the branch order is red, then green, then blue (so pure yellow
    lands on H = 60).
    """
    rgb = np.asarray(img, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = np.maximum(np.maximum(r, g), b)
    mn = np.minimum(np.minimum(r, g), b)
    delta = mx - mn
    lightness = (mx + mn) / 2.0

    chromatic = delta > 0.0
    denom = np.where(lightness <= 0.5, mx + mn, 2.0 - mx - mn)
    sat = np.where(chromatic, delta / np.where(denom == 0.0, 1.0, denom), 0.0)

    safe_delta = np.where(chromatic, delta, 1.0)
    h_r = np.mod((g - b) / safe_delta, 6.0)
    h_g = (b - r) / safe_delta + 2.0
    h_b = (r - g) / safe_delta + 4.0
    hue = 60.0 * np.select([~chromatic, mx == r, mx == g], [0.0, h_r, h_g], default=h_b)
    return hue, lightness, sat


def threshold_lane_pixels(img: np.ndarray, t: ColorThresholds) -> np.ndarray:
    """Binary {0,1} uint8 mask of probable lane-paint pixels (see ColorThresholds)."""
    arr = _check_image(img, (3,))
    hue, lightness, sat = rgb_to_hls(arr)
    sat_ok = (sat >= t.saturation_range[0]) & (sat <= t.saturation_range[1])
    hue_ok = (hue >= t.hue_range[0]) & (hue <= t.hue_range[1])
    white_ok = lightness >= t.white_lightness_min
    mask = (lightness >= t.lightness_min) & (sat_ok | hue_ok | white_ok)
    return mask.astype(np.uint8)


@dataclass(frozen=True)
class Homography:
    """3x3 projective map (h33 = 1) together with its verified inverse."""

    matrix: np.ndarray
    inverse: np.ndarray

    def apply(self, points: np.ndarray) -> np.ndarray:
        return _apply_projective(self.matrix, points)

    def apply_inverse(self, points: np.ndarray) -> np.ndarray:
        return _apply_projective(self.inverse, points)


def _apply_projective(m: np.ndarray, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    hom = m @ np.vstack([pts[:, 0], pts[:, 1], np.ones(pts.shape[0])])
    out = (hom[:2] / hom[2]).T
    return out[0] if single else out


def _check_not_collinear(points: np.ndarray, which: str) -> None:
    scale = max(1.0, float(np.max(np.abs(points))))
    for i, j, k in combinations(range(4), 3):
        area2 = abs(
            (points[j, 0] - points[i, 0]) * (points[k, 1] - points[i, 1])
            - (points[j, 1] - points[i, 1]) * (points[k, 0] - points[i, 0])
        )
        if area2 <= 1e-9 * scale * scale:
            raise DegenerateQuad(f"three {which} points are collinear")


def compute_homography(src: Sequence[Sequence[float]], dst: Sequence[Sequence[float]]) -> Homography:
    """Solve the 4-point correspondence for H (h33 = 1) and its verified inverse.

    Builds the standard 8-unknown linear system, one pair of rows per
    correspondence. DegenerateQuad is raised when three points of either quad
    are collinear or the system is otherwise singular.
    """
    s = np.asarray(src, dtype=float)
    d = np.asarray(dst, dtype=float)
    if s.shape != (4, 2) or d.shape != (4, 2):
        raise ValueError("src and dst must each be 4 points of shape (4, 2)")
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(d))):
        raise ValueError("homography points must be finite")
    _check_not_collinear(s, "source")
    _check_not_collinear(d, "destination")

    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i in range(4):
        x, y = s[i]
        u, v = d[i]
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateQuad("correspondence system is singular") from exc

    matrix = np.array(
        [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]]
    )
    try:
        inverse = np.linalg.inv(matrix)
    except np.linalg.LinAlgError as exc:
        raise DegenerateQuad("homography is singular") from exc
    if np.max(np.abs(matrix @ inverse - np.eye(3))) > 1e-9:
        raise DegenerateQuad("homography too ill-conditioned for a trustworthy inverse")

    mapped = _apply_projective(matrix, s)
    if np.max(np.abs(mapped - d)) > 1e-6:
        raise DegenerateQuad("solved homography does not reproduce the correspondences")

    matrix.setflags(write=False)
    inverse.setflags(write=False)
    return Homography(matrix=matrix, inverse=inverse)


def warp_image(img: np.ndarray, homography: Homography, out_dims: tuple[int, int] | None = None) -> np.ndarray:
    """Apply H by inverse mapping: output (u,v) samples the input at H^-1 (u,v).

    out_dims is (width, height) of the output; defaults to the input size.
    Out-of-bounds samples are black.
    """
    arr = _check_image(img, (1, 3))
    if out_dims is None:
        out_w, out_h = arr.shape[1], arr.shape[0]
    else:
        out_w, out_h = int(out_dims[0]), int(out_dims[1])
        if out_w < 1 or out_h < 1:
            raise ValueError("output dimensions must be positive")

    u = np.arange(out_w, dtype=float)
    v = np.arange(out_h, dtype=float)
    uu, vv = np.meshgrid(u, v)
    m = homography.inverse
    denom = m[2, 0] * uu + m[2, 1] * vv + m[2, 2]
    bad = np.abs(denom) < 1e-12
    denom = np.where(bad, 1.0, denom)
    sx = (m[0, 0] * uu + m[0, 1] * vv + m[0, 2]) / denom
    sy = (m[1, 0] * uu + m[1, 1] * vv + m[1, 2]) / denom
    sx = np.where(bad, -1.0, sx)  # force out-of-bounds → black
    sy = np.where(bad, -1.0, sy)
    return _bilinear_sample(arr, sx, sy)
