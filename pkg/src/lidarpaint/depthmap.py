"""Sparse depth-map rasterization, virtual-point back-projection and fusion.

A depth map stores camera-frame forward depth per pixel; 0 marks an invalid
cell. Rasterization and pixel lookup share one rounding rule: nearest pixel
with half-up ties, i.e. ``floor(x + 0.5)``, with coordinates landing exactly
on the outer boundary (u = width - 0.5) clamped inward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, LayoutMismatchError
from .geometry import BEHIND_EPS, CalibrationSet, back_project, project

# Upper bound of the encodable depth range, meters.
DEPTH_MAX = 655.35

# Provenance flags carried alongside fused clouds.
PROV_RAW = 0
PROV_VIRTUAL = 1

# Intensity written into virtual points (cameras measure no reflectance).
VIRTUAL_INTENSITY = 0.5


@dataclass(frozen=True)
class DepthMap:
    """H x W per-pixel metric depth; cells holding 0 are invalid."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError(f"depth map must be 2-D, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("depth map contains non-finite values")
        if np.any(vals < 0) or np.any(vals > DEPTH_MAX):
            raise ValueError(f"valid depths must lie in (0, {DEPTH_MAX}]")
        object.__setattr__(self, "values", vals)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def valid_mask(self) -> np.ndarray:
        return self.values > 0

    @property
    def valid_fraction(self) -> float:
        return float(np.count_nonzero(self.values > 0)) / self.values.size


def raster_indices(u, v, width: int, height: int):
    """Map continuous image coordinates to integer pixel indices.

    Returns (cols, rows, inside) where ``inside`` marks coordinates whose
    rounded pixel lies within the image.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    cols = np.floor(u + 0.5)
    rows = np.floor(v + 0.5)
    cols = np.where(u == width - 0.5, width - 1, cols)
    rows = np.where(v == height - 0.5, height - 1, rows)
    inside = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
    return cols.astype(np.int64), rows.astype(np.int64), inside


def sparsify(cloud: np.ndarray, calib: CalibrationSet) -> DepthMap:
    """Rasterize a point cloud into a sparse depth map.

    Each point projecting inside the image with positive depth writes its
    depth at (round(v), round(u)); colliding points keep the minimum depth
    (nearest surface wins). Order-independent. Depths beyond the encodable
    range are dropped.
    """
    width, height = calib.image_size
    buf = np.full((height, width), np.inf, dtype=np.float64)
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.size:
        u, v, d = project(calib, cloud[:, :3])
        cols, rows, inside = raster_indices(u, v, width, height)
        ok = inside & (d > BEHIND_EPS) & (d <= DEPTH_MAX)
        np.minimum.at(buf, (rows[ok], cols[ok]), d[ok])
    values = np.where(np.isinf(buf), 0.0, buf)
    return DepthMap(values)


def virtual_points_from_depth(
    dense: DepthMap,
    calib: CalibrationSet,
    stride: int = 4,
    max_range: float = 80.0,
) -> np.ndarray:
    """Back-project a dense depth map into virtual LiDAR points.

    Every valid cell on the stride grid with depth <= max_range emits the
    back-projection of its pixel center (col + 0.5, row + 0.5). Output is an
    (M, 4) float array (x, y, z, intensity) in row-major cell order, with the
    intensity column filled with the sentinel 0.5.

    Raises:
        DimensionMismatchError: map dimensions disagree with the calibration.
    """
    if (dense.width, dense.height) != calib.image_size:
        raise DimensionMismatchError(
            f"depth map is {dense.width}x{dense.height}, "
            f"calibration expects {calib.image_size[0]}x{calib.image_size[1]}"
        )
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    grid = dense.values[::stride, ::stride]
    rows, cols = np.nonzero((grid > 0) & (grid <= max_range))
    depths = grid[rows, cols]
    rows = rows * stride
    cols = cols * stride
    xyz = back_project(calib, cols + 0.5, rows + 0.5, depths)
    out = np.empty((xyz.shape[0], 4), dtype=np.float64)
    out[:, :3] = xyz
    out[:, 3] = VIRTUAL_INTENSITY
    return out


def fuse(raw: np.ndarray, virtual_pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate raw and virtual points, raw rows first.

    Returns (augmented, provenance) where provenance is a uint8 vector with
    PROV_RAW / PROV_VIRTUAL per row. Rows are preserved bit-exactly.

    Raises:
        LayoutMismatchError: the clouds have different column layouts.
    """
    raw = np.asarray(raw)
    virtual_pts = np.asarray(virtual_pts)
    if raw.ndim != 2 or virtual_pts.ndim != 2 or raw.shape[1] != virtual_pts.shape[1]:
        raise LayoutMismatchError(
            f"column layouts differ: raw {raw.shape} vs virtual {virtual_pts.shape}"
        )
    augmented = np.concatenate([raw, virtual_pts], axis=0)
    provenance = np.concatenate(
        [
            np.full(raw.shape[0], PROV_RAW, dtype=np.uint8),
            np.full(virtual_pts.shape[0], PROV_VIRTUAL, dtype=np.uint8),
        ]
    )
    return augmented, provenance


def split_by_provenance(cloud: np.ndarray, provenance: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`fuse`: recover (raw, virtual) partitions."""
    provenance = np.asarray(provenance)
    return cloud[provenance == PROV_RAW], cloud[provenance == PROV_VIRTUAL]


@dataclass(frozen=True)
class FrameBundle:
    """All per-frame clouds plus calibration and the source image reference."""

    raw: np.ndarray
    virtual_pts: np.ndarray
    augmented: np.ndarray
    provenance: np.ndarray
    calib: CalibrationSet
    image_ref: Optional[tuple[str, int, int]] = None

    def __post_init__(self):
        if self.augmented.shape[0] != self.raw.shape[0] + self.virtual_pts.shape[0]:
            raise ValueError("augmented cloud must hold exactly raw + virtual rows")
        if self.raw.shape[1] != self.virtual_pts.shape[1]:
            raise LayoutMismatchError("raw and virtual clouds must share column layout")

    @classmethod
    def build(cls, raw, virtual_pts, calib, image_ref=None) -> "FrameBundle":
        augmented, provenance = fuse(raw, virtual_pts)
        return cls(raw, virtual_pts, augmented, provenance, calib, image_ref)
