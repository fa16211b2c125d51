"""Lane-line fitting on bird's-eye binary masks.

The mask is a 2-D array whose nonzero entries mark probable lane-paint
pixels (rows = y, columns = x). Both lane lines are modeled as
x = A*y^2 + B*y + C with y in pixel rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import InsufficientPixels, MissingLane, SelfIntersecting
from .fitting import quadratic_lsq
from .geometry import FrameDims, Polygon

# Standard lane-width assumption: 3.7 m across ~700 px, 30 m along ~720 rows.
XM_PER_PX_DEFAULT = 3.7 / 700
YM_PER_PX_DEFAULT = 30 / 720

MIN_FIT_PIXELS = 6
POLYGON_SAMPLES = 16


@dataclass(frozen=True)
class LanePolynomial:
    """x = a*y^2 + b*y + c in pixel coordinates."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "c"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"lane coefficient {name} must be finite")

    def __call__(self, y):
        return (self.a * y + self.b) * y + self.c


@dataclass(frozen=True)
class LaneResult:
    """Both lane fits plus the derived metric quantities.

    curvature_radius_m is math.inf for a perfectly straight lane.
    vehicle_offset_m is signed: positive when the camera sits right of the
    lane center.
    """

    left: LanePolynomial
    right: LanePolynomial
    curvature_radius_m: float
    vehicle_offset_m: float


def _check_mask(mask: np.ndarray) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
        raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
    return arr


def base_positions(mask: np.ndarray) -> tuple[int, int]:
    """Histogram peaks of the bottom half: left/right lane base columns.

    The column-sum histogram is split at the frame midline; argmax of each
    half gives the base x. Ties resolve to the lower column index. A side
    whose half-histogram is all zero raises MissingLane.
    """
    arr = _check_mask(mask)
    h, w = arr.shape
    hist = np.count_nonzero(arr[h // 2 :, :], axis=0)
    split = (w + 1) // 2
    left_hist = hist[:split]
    right_hist = hist[split:]
    if not left_hist.any():
        raise MissingLane("left")
    if not right_hist.any():
        raise MissingLane("right")
    return int(np.argmax(left_hist)), split + int(np.argmax(right_hist))


def fit_lane_polynomial(ys: np.ndarray, xs: np.ndarray) -> LanePolynomial:
    """Least-squares quadratic x(y) on the given pixel coordinates."""
    a, b, c = quadratic_lsq(np.asarray(ys, dtype=float), np.asarray(xs, dtype=float))
    return LanePolynomial(a, b, c)


def curvature_radius(
    p: LanePolynomial,
    y_eval: float,
    xm_per_px: float = XM_PER_PX_DEFAULT,
    ym_per_px: float = YM_PER_PX_DEFAULT,
) -> float:
    """Radius of curvature in meters at image row y_eval.

    The pixel-space fit is rescaled algebraically to metric space
    (a' = a*xm/ym^2, b' = b*xm/ym) before evaluating
    R = (1 + (2a'y + b')^2)^(3/2) / |2a'|. A straight line (a = 0) has
    unbounded curvature radius, returned as math.inf.
    """
    if not (xm_per_px > 0.0 and ym_per_px > 0.0):
        raise ValueError("metric scales must be positive")
    if p.a == 0.0:
        return math.inf
    a_m = p.a * xm_per_px / (ym_per_px * ym_per_px)
    b_m = p.b * xm_per_px / ym_per_px
    y_m = y_eval * ym_per_px
    slope = 2.0 * a_m * y_m + b_m
    return (1.0 + slope * slope) ** 1.5 / abs(2.0 * a_m)


def vehicle_offset(
    left: LanePolynomial,
    right: LanePolynomial,
    dims: FrameDims,
    xm_per_px: float = XM_PER_PX_DEFAULT,
) -> float:
    """Signed distance (m) of the frame center from the lane center at the bottom row."""
    if xm_per_px <= 0.0:
        raise ValueError("xm_per_px must be positive")
    y = dims.height - 1
    lane_center = (left(y) + right(y)) / 2.0
    return (dims.width / 2.0 - lane_center) * xm_per_px


def lane_polygon(
    left: LanePolynomial,
    right: LanePolynomial,
    dims: FrameDims,
    horizon_y: float,
    homography=None,
    samples: int = POLYGON_SAMPLES,
) -> Polygon:
    """Drivable-lane polygon between the two fits, horizon row to bottom row.

    Each boundary is sampled at `samples` evenly spaced y-values; the
    polygon runs up the left fit and down the right one. When a homography
    is given (the warp that produced the bird's-eye mask), vertices are
    mapped back to the source perspective through its inverse, and the
    vertex order is flipped if the mapping reversed orientation.

    Raises SelfIntersecting when the fits touch or cross at any sampled row.
    """
    if not 0.0 <= horizon_y < dims.height:
        raise ValueError("horizon_y must lie within the frame")
    if samples < 2:
        raise ValueError("need at least 2 samples per boundary")

    ys = np.linspace(horizon_y, dims.height - 1, samples)
    lx = left(ys)
    rx = right(ys)
    crossed = lx >= rx
    if np.any(crossed):
        row = float(ys[np.argmax(crossed)])
        raise SelfIntersecting(f"lane fits cross at row {row:g}")

    up_left = np.column_stack([lx[::-1], ys[::-1]])
    down_right = np.column_stack([rx, ys])
    vertices = np.vstack([up_left, down_right])
    if homography is not None:
        vertices = homography.apply_inverse(vertices)
        area2 = 0.0
        n = vertices.shape[0]
        for i in range(n):
            x0, y0 = vertices[i]
            x1, y1 = vertices[(i + 1) % n]
            area2 += x0 * y1 - x1 * y0
        if area2 < 0.0:
            vertices = vertices[::-1]
    return Polygon([(float(x), float(y)) for x, y in vertices])


class SlidingWindowLaneFitter(BaseEstimator):
    """Histogram-seeded sliding-window lane fit.

    fit() stacks n_windows vertical windows per side, starting at the
    base_positions peaks, recentering each next window on the mean pixel
    column whenever a window holds at least min_pixels. The collected
    pixels per side get a quadratic least-squares fit.

    Passing prior=(left, right) fits from the previous frame switches to a
    fast band search of half-width margin around each prior curve; if
    either band holds fewer than min_pixels the full window search runs
    instead. After fit(), used_prior_ records which path produced the fits.
    """

    def __init__(self, n_windows: int = 9, margin: int = 100, min_pixels: int = 50) -> None:
        self.n_windows = n_windows
        self.margin = margin
        self.min_pixels = min_pixels

    def _check_params(self) -> None:
        if self.n_windows < 1:
            raise ValueError("n_windows must be >= 1")
        if self.margin < 1:
            raise ValueError("margin must be >= 1")
        if self.min_pixels < 1:
            raise ValueError("min_pixels must be >= 1")

    def _collect_windows(
        self, rows: np.ndarray, cols: np.ndarray, height: int, base_x: float
    ) -> np.ndarray:
        win_h = height // self.n_windows
        center = float(base_x)
        picks = []
        for i in range(self.n_windows):
            y_hi = height - i * win_h
            y_lo = height - (i + 1) * win_h
            if i == self.n_windows - 1:
                y_lo = 0  # top window absorbs the remainder rows
            inside = (
                (rows >= y_lo)
                & (rows < y_hi)
                & (cols >= center - self.margin)
                & (cols < center + self.margin)
            )
            idx = np.nonzero(inside)[0]
            if idx.size >= self.min_pixels:
                center = float(np.mean(cols[idx]))
            picks.append(idx)
        return np.concatenate(picks) if picks else np.empty(0, dtype=np.int64)

    def _collect_prior(
        self, rows: np.ndarray, cols: np.ndarray, prior: LanePolynomial
    ) -> np.ndarray:
        band_center = prior(rows.astype(float))
        inside = (cols >= band_center - self.margin) & (cols < band_center + self.margin)
        return np.nonzero(inside)[0]

    def fit(
        self,
        mask: np.ndarray,
        prior: tuple[LanePolynomial, LanePolynomial] | None = None,
    ) -> "SlidingWindowLaneFitter":
        self._check_params()
        arr = _check_mask(mask)
        rows, cols = np.nonzero(arr)

        picked: dict[str, np.ndarray] | None = None
        self.used_prior_ = False
        if prior is not None:
            left_idx = self._collect_prior(rows, cols, prior[0])
            right_idx = self._collect_prior(rows, cols, prior[1])
            if left_idx.size >= self.min_pixels and right_idx.size >= self.min_pixels:
                picked = {"left": left_idx, "right": right_idx}
                self.used_prior_ = True

        if picked is None:
            left_base, right_base = base_positions(arr)
            picked = {
                "left": self._collect_windows(rows, cols, arr.shape[0], left_base),
                "right": self._collect_windows(rows, cols, arr.shape[0], right_base),
            }

        fits: dict[str, LanePolynomial] = {}
        counts: dict[str, int] = {}
        for side, idx in picked.items():
            counts[side] = int(idx.size)
            if idx.size < MIN_FIT_PIXELS:
                raise InsufficientPixels(side, int(idx.size))
            fits[side] = fit_lane_polynomial(rows[idx].astype(float), cols[idx].astype(float))

        self.left_fit_ = fits["left"]
        self.right_fit_ = fits["right"]
        self.n_left_ = counts["left"]
        self.n_right_ = counts["right"]
        return self

    def _require_fitted(self) -> None:
        if not hasattr(self, "left_fit_"):
            raise NotFittedError("call fit() before using the fitted lane model")

    def predict(self, ys: np.ndarray) -> np.ndarray:
        """Evaluate both fits at rows ys; columns are (left_x, right_x)."""
        self._require_fitted()
        y = np.asarray(ys, dtype=float)
        return np.column_stack([self.left_fit_(y), self.right_fit_(y)])

    def result(
        self,
        dims: FrameDims,
        xm_per_px: float = XM_PER_PX_DEFAULT,
        ym_per_px: float = YM_PER_PX_DEFAULT,
        y_eval: float | None = None,
    ) -> LaneResult:
        """Compose the fitted polynomials with curvature and offset.

        Curvature is the mean of the two per-side radii evaluated at
        y_eval (bottom row by default); one straight side makes the mean
        unbounded.
        """
        self._require_fitted()
        if y_eval is None:
            y_eval = dims.height - 1
        bottom = dims.height - 1
        if self.right_fit_(bottom) <= self.left_fit_(bottom):
            raise SelfIntersecting("lane fits cross at the bottom row")
        r_left = curvature_radius(self.left_fit_, y_eval, xm_per_px, ym_per_px)
        r_right = curvature_radius(self.right_fit_, y_eval, xm_per_px, ym_per_px)
        curvature = math.inf if math.isinf(r_left) or math.isinf(r_right) else (r_left + r_right) / 2.0
        offset = vehicle_offset(self.left_fit_, self.right_fit_, dims, xm_per_px)
        return LaneResult(
            left=self.left_fit_,
            right=self.right_fit_,
            curvature_radius_m=curvature,
            vehicle_offset_m=offset,
        )
