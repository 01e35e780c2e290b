"""Paint augmented clouds with per-pixel semantic class scores.

Each point is projected into the image; the C-vector of class scores at its
pixel is appended to the point's row, widening the cloud from D to D + C
columns. Points that land outside the image or behind the camera receive the
background one-hot vector (1, 0, ..., 0) so the row count never changes.
Class index 0 is background by convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .depthmap import PROV_RAW, PROV_VIRTUAL, raster_indices
from .errors import DimensionMismatchError
from .geometry import BEHIND_EPS, CalibrationSet, project


@dataclass(frozen=True)
class ScoreMap:
    """H x W x C per-pixel class scores from a segmentation network."""

    scores: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        arr = np.asarray(self.scores)
        if arr.ndim != 3:
            raise ValueError(f"score map must be H x W x C, got shape {arr.shape}")
        if arr.shape[2] < 2:
            raise ValueError("score map needs at least 2 classes (background + 1)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("score map contains non-finite values")
        if self.normalized:
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValueError("normalized scores must lie in [0, 1]")
            sums = arr.sum(axis=2)
            if np.any(np.abs(sums - 1.0) > 1e-5):
                raise ValueError("normalized score vectors must sum to 1 within 1e-5")
        object.__setattr__(self, "scores", arr)

    @property
    def height(self) -> int:
        return self.scores.shape[0]

    @property
    def width(self) -> int:
        return self.scores.shape[1]

    @property
    def classes(self) -> int:
        return self.scores.shape[2]


@dataclass(frozen=True)
class PaintedCloud:
    """Point cloud widened with class scores; provenance carried through.

    Also serves as the in-memory form of the VPPC container, in which case
    the class block may be empty (class_dims == 0) for not-yet-painted rows.
    """

    data: np.ndarray
    base_dims: int
    provenance: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[1] < self.base_dims:
            raise ValueError(
                f"painted data of shape {self.data.shape} inconsistent with "
                f"base_dims {self.base_dims}"
            )
        if self.provenance.shape[0] != self.data.shape[0]:
            raise ValueError("provenance length must match row count")

    @property
    def class_dims(self) -> int:
        return self.data.shape[1] - self.base_dims

    @property
    def xyz(self) -> np.ndarray:
        return self.data[:, :3]

    @property
    def base(self) -> np.ndarray:
        return self.data[:, : self.base_dims]

    @property
    def class_scores(self) -> np.ndarray:
        return self.data[:, self.base_dims:]


def paint(
    augmented: np.ndarray,
    scores: ScoreMap,
    calib: CalibrationSet,
    provenance: Optional[np.ndarray] = None,
) -> PaintedCloud:
    """Append per-pixel class scores to every point of the cloud.

    Rows are never dropped, reordered or duplicated; raw and virtual points
    are looked up by exactly the same rule.

    Args:
        augmented: (N, D) cloud, D >= 3, LiDAR frame.
        scores: score map matching the calibration's image size.
        calib: frame calibration.
        provenance: optional (N,) raw/virtual flags; defaults to all raw.

    Raises:
        DimensionMismatchError: score-map size differs from calib.image_size.
    """
    pts = np.asarray(augmented)
    if pts.ndim != 2 or pts.shape[1] < 3:
        raise ValueError(f"cloud must be (N, D>=3), got shape {pts.shape}")
    width, height = calib.image_size
    if (scores.width, scores.height) != (width, height):
        raise DimensionMismatchError(
            f"score map is {scores.width}x{scores.height}, "
            f"calibration expects {width}x{height}"
        )
    n, d = pts.shape
    c = scores.classes
    if provenance is None:
        provenance = np.full(n, PROV_RAW, dtype=np.uint8)

    out = np.zeros((n, d + c), dtype=np.result_type(pts.dtype, scores.scores.dtype))
    out[:, :d] = pts
    out[:, d] = 1.0  # background one-hot for out-of-view rows
    if n:
        u, v, depth = project(calib, pts[:, :3].astype(np.float64, copy=False))
        cols, rows, inside = raster_indices(u, v, width, height)
        ok = inside & (depth > BEHIND_EPS)
        out[np.nonzero(ok)[0], d:] = scores.scores[rows[ok], cols[ok], :]
    return PaintedCloud(data=out, base_dims=d, provenance=np.asarray(provenance))


@dataclass
class PaintStats:
    """Counting summary of one painted cloud."""

    total: int
    class_counts: list[int] = field(default_factory=list)
    raw_points: int = 0
    virtual_points: int = 0
    background_fraction: float = 0.0
    foreground_raw: int = 0
    foreground_virtual: int = 0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "class_counts": list(self.class_counts),
            "raw_points": self.raw_points,
            "virtual_points": self.virtual_points,
            "background_fraction": self.background_fraction,
            "foreground_raw": self.foreground_raw,
            "foreground_virtual": self.foreground_virtual,
        }


def paint_stats(painted: PaintedCloud) -> PaintStats:
    """Per-class and per-provenance counts of a painted cloud.

    A row counts toward the class with the highest score (first index wins
    ties); foreground means that argmax class is not background.
    """
    n = painted.data.shape[0]
    c = painted.class_dims
    if n == 0:
        return PaintStats(total=0, class_counts=[0] * c)
    labels = np.argmax(painted.class_scores, axis=1)
    counts = np.bincount(labels, minlength=c)
    fg = labels != 0
    raw = painted.provenance == PROV_RAW
    virt = painted.provenance == PROV_VIRTUAL
    return PaintStats(
        total=n,
        class_counts=counts.tolist(),
        raw_points=int(np.count_nonzero(raw)),
        virtual_points=int(np.count_nonzero(virt)),
        background_fraction=float(np.count_nonzero(~fg)) / n,
        foreground_raw=int(np.count_nonzero(fg & raw)),
        foreground_virtual=int(np.count_nonzero(fg & virt)),
    )
