"""Snapshot measurement: rectify a photographed planar panel from four
corner clicks and measure crack lengths along marked polylines.

The homography comes from an exact 4-point direct linear solve (8x8
system, h33 = 1); only four clicks exist, so nothing is overdetermined.
Measurement math works purely on coordinates; pixels are only touched when
rendering a rectified preview image (inverse mapping with bilinear
interpolation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateError, HorizonError, ValidationError

Point = tuple[float, float]

# A corner triangle thinner than this fraction of the bounding-box area
# counts as collinear.
COLLINEAR_AREA_FRACTION = 1e-6

# Rectification-implied and mark-calibrated scales disagreeing by more than
# this fraction are flagged in the session document.
SCALE_DISAGREEMENT_WARN = 0.01


@dataclass(frozen=True)
class Quad:
    """Four clicked image corners, ordered TL, TR, BR, BL (y down)."""

    points: tuple[Point, Point, Point, Point]

    def __post_init__(self):
        if len(self.points) != 4:
            raise ValidationError("a quad needs exactly four corners")


@dataclass(frozen=True)
class PanelDims:
    width_cm: float
    height_cm: float

    def __post_init__(self):
        if self.width_cm <= 0 or self.height_cm <= 0:
            raise ValidationError("panel dimensions must be positive")


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, normalized so h33 = 1."""

    matrix: tuple[tuple[float, float, float], ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Homography":
        array = np.asarray(array, dtype=float)
        if array.shape != (3, 3):
            raise ValidationError("homography must be 3x3")
        if abs(array[2, 2]) < 1e-15:
            raise DegenerateError("h33 ~ 0, cannot normalize")
        array = array / array[2, 2]
        if abs(np.linalg.det(array)) < 1e-12:
            raise DegenerateError("homography is singular")
        return cls(matrix=tuple(tuple(float(v) for v in row) for row in array))


def _triangle_area(a: Point, b: Point, c: Point) -> float:
    return abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])) / 2.0


def check_quad(quad: Quad) -> None:
    """No three corners approximately collinear (relative to the bbox area)."""
    pts = quad.points
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    bbox_area = (max(xs) - min(xs)) * (max(ys) - min(ys))
    if bbox_area <= 0:
        raise DegenerateError("quad corners are collinear")
    threshold = COLLINEAR_AREA_FRACTION * bbox_area
    for skip in range(4):
        tri = [pts[i] for i in range(4) if i != skip]
        if _triangle_area(*tri) <= threshold:
            raise DegenerateError(f"corners excluding #{skip} are collinear")


def target_rectangle(dims: PanelDims, target_px_per_cm: float) -> tuple[Point, Point, Point, Point]:
    """Rectified corner positions TL, TR, BR, BL in target pixels."""
    if target_px_per_cm <= 0:
        raise ValidationError("target scale must be positive")
    w = dims.width_cm * target_px_per_cm
    h = dims.height_cm * target_px_per_cm
    return ((0.0, 0.0), (w, 0.0), (w, h), (0.0, h))


def estimate_homography(quad: Quad, dims: PanelDims, target_px_per_cm: float) -> Homography:
    """Map the clicked corners exactly onto the axis-aligned target rectangle."""
    check_quad(quad)
    dst = target_rectangle(dims, target_px_per_cm)
    a = np.zeros((8, 8))
    b = np.zeros(8)
    for i, ((x, y), (u, v)) in enumerate(zip(quad.points, dst)):
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        b[2 * i] = u
        b[2 * i + 1] = v
    try:
        h = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateError(f"singular corner system: {exc}") from exc
    matrix = np.append(h, 1.0).reshape(3, 3)
    return Homography.from_array(matrix)


def rectify_point(homography: Homography, point: Point) -> Point:
    x, y = point
    hx, hy, hw = homography.as_array() @ (x, y, 1.0)
    if abs(hw) < 1e-12:
        raise HorizonError(f"point {point} maps to infinity")
    return (hx / hw, hy / hw)


def calibrate_scale(p1: Point, p2: Point, known_length_cm: float) -> float:
    """Pixel-to-cm ratio from a mark of known physical length."""
    if known_length_cm <= 0:
        raise ValidationError("known length must be positive")
    span = math.dist(p1, p2)
    if span == 0:
        raise ValidationError("scale mark endpoints must differ")
    return span / known_length_cm


def measure_polyline(points: Sequence[Point], px_per_cm: float) -> float:
    """Total polyline length in cm at the given scale."""
    if len(points) < 2:
        raise ValidationError("a polyline needs at least two points")
    if px_per_cm <= 0:
        raise ValidationError("scale must be positive")
    total = 0.0
    for a, b in zip(points, points[1:]):
        total += math.dist(a, b)
    return total / px_per_cm


def rectify_image(homography: Homography, image: np.ndarray, out_size: tuple[int, int]) -> np.ndarray:
    """Render the rectified view by inverse mapping with bilinear sampling.

    Display-only: measurements never go through this path. out_size is
    (width, height) in target pixels.
    """
    width, height = out_size
    inv = np.linalg.inv(homography.as_array())
    us, vs = np.meshgrid(np.arange(width, dtype=float), np.arange(height, dtype=float))
    ones = np.ones_like(us)
    src = np.stack([us, vs, ones], axis=-1) @ inv.T
    with np.errstate(divide="ignore", invalid="ignore"):
        sx = src[..., 0] / src[..., 2]
        sy = src[..., 1] / src[..., 2]
    img = np.atleast_3d(image).astype(float)
    h, w = img.shape[:2]
    valid = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1) & np.isfinite(sx) & np.isfinite(sy)
    sx = np.where(valid, sx, 0.0)
    sy = np.where(valid, sy, 0.0)
    x0c = np.clip(np.floor(sx).astype(int), 0, w - 2)
    y0c = np.clip(np.floor(sy).astype(int), 0, h - 2)
    fx = np.clip(sx - x0c, 0.0, 1.0)[..., None]
    fy = np.clip(sy - y0c, 0.0, 1.0)[..., None]
    tl = img[y0c, x0c]
    tr = img[y0c, x0c + 1]
    bl = img[y0c + 1, x0c]
    br = img[y0c + 1, x0c + 1]
    out = (tl * (1 - fx) + tr * fx) * (1 - fy) + (bl * (1 - fx) + br * fx) * fy
    out[~valid] = 0.0
    out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    if image.ndim == 2:
        return out[..., 0]
    return out


def run_session(clicks: dict) -> dict:
    """Evaluate a full measurement session from a click document.

    Expected keys: corners (4 image points TL,TR,BR,BL), panel_cm
    ([width, height]), target_px_per_cm (optional, default 10),
    scale_mark (optional: {p1, p2, length_cm}, image coordinates),
    polylines (list of point lists, image coordinates).
    Returns the session document with the homography, both scales, and
    per-polyline rectified points and lengths.
    """
    try:
        corners = tuple(tuple(float(v) for v in p) for p in clicks["corners"])
        panel = PanelDims(*[float(v) for v in clicks["panel_cm"]])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"click document incomplete: {exc}") from exc
    target_scale = float(clicks.get("target_px_per_cm", 10.0))
    quad = Quad(points=corners)
    homography = estimate_homography(quad, panel, target_scale)

    px_per_cm = target_scale
    calibrated = None
    warnings = []
    mark = clicks.get("scale_mark")
    if mark:
        p1 = rectify_point(homography, tuple(mark["p1"]))
        p2 = rectify_point(homography, tuple(mark["p2"]))
        calibrated = calibrate_scale(p1, p2, float(mark["length_cm"]))
        disagreement = abs(calibrated - target_scale) / target_scale
        if disagreement > SCALE_DISAGREEMENT_WARN:
            warnings.append(
                f"calibrated scale {calibrated:.4f} px/cm deviates "
                f"{disagreement * 100:.1f}% from the rectification scale {target_scale:.4f}"
            )
        px_per_cm = calibrated

    measurements = []
    for polyline in clicks.get("polylines", []):
        rectified = [rectify_point(homography, tuple(p)) for p in polyline]
        measurements.append(
            {
                "points_rectified": [[x, y] for x, y in rectified],
                "length_cm": measure_polyline(rectified, px_per_cm),
            }
        )

    return {
        "corners": [[x, y] for x, y in corners],
        "panel_cm": [panel.width_cm, panel.height_cm],
        "homography": [list(row) for row in homography.matrix],
        "target_px_per_cm": target_scale,
        "calibrated_px_per_cm": calibrated,
        "px_per_cm": px_per_cm,
        "warnings": warnings,
        "measurements": measurements,
    }
