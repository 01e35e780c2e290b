"""Calibration model and forward/inverse camera projection.

Conventions (KITTI-style):
  - LiDAR frame: x forward, y left, z up, meters.
  - Camera frame: x right, y down, z forward (optical axis).
  - Image frame: u right (columns), v down (rows), pixels.

The projection chain is ``p = cam_matrix @ lidar_to_cam @ (x, y, z, 1)``
with ``u = p0 / p2``, ``v = p1 / p2`` and camera depth ``p2``. Rectification
is folded into ``lidar_to_cam``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from .errors import MalformedNumberError, MissingKeyError, SingularIntrinsicsError, ZeroRadiusError

# Camera depths at or below this are treated as behind the image plane.
BEHIND_EPS = 1e-6

_CALIB_KEYS = {"P2": 12, "R0_rect": 9, "Tr_velo_to_cam": 12}


class PixelCoord(NamedTuple):
    """Continuous image coordinate with its camera-frame depth."""

    u: float
    v: float
    depth: float


@dataclass(frozen=True)
class CalibrationSet:
    """Camera matrix, LiDAR-to-camera transform and image size for one frame.

    Attributes:
        cam_matrix: 3x4 projection matrix (pixels).
        lidar_to_cam: 4x4 homogeneous transform (meters); includes rectification.
        image_size: (width, height) in pixels.
    """

    cam_matrix: np.ndarray
    lidar_to_cam: np.ndarray
    image_size: tuple[int, int]

    def __post_init__(self):
        cam = np.array(self.cam_matrix, dtype=np.float64).reshape(3, 4)
        tr = np.array(self.lidar_to_cam, dtype=np.float64).reshape(4, 4)
        cam.flags.writeable = False
        tr.flags.writeable = False
        object.__setattr__(self, "cam_matrix", cam)
        object.__setattr__(self, "lidar_to_cam", tr)
        object.__setattr__(self, "image_size", (int(self.image_size[0]), int(self.image_size[1])))
        if not np.array_equal(tr[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError("lidar_to_cam bottom row must be exactly (0, 0, 0, 1)")
        if abs(np.linalg.det(cam[:, :3])) <= 1e-9:
            raise SingularIntrinsicsError("left 3x3 block of cam_matrix is singular")
        if self.image_size[0] <= 0 or self.image_size[1] <= 0:
            raise ValueError(f"image_size must be positive, got {self.image_size}")

    @cached_property
    def proj(self) -> np.ndarray:
        """Composed 3x4 projection matrix cam_matrix @ lidar_to_cam."""
        p = self.cam_matrix @ self.lidar_to_cam
        p.flags.writeable = False
        return p

    @cached_property
    def _intrinsics_inv(self) -> np.ndarray:
        k = np.linalg.inv(self.cam_matrix[:, :3])
        k.flags.writeable = False
        return k

    @cached_property
    def _lidar_from_cam(self) -> np.ndarray:
        t = np.linalg.inv(self.lidar_to_cam)
        t.flags.writeable = False
        return t

    @property
    def width(self) -> int:
        return self.image_size[0]

    @property
    def height(self) -> int:
        return self.image_size[1]


def _expand4(m: np.ndarray) -> np.ndarray:
    """Embed a 3x3 or 3x4 matrix into a 4x4 identity."""
    out = np.eye(4, dtype=np.float64)
    out[: m.shape[0], : m.shape[1]] = m
    return out


def parse_calibration(text: str, image_size: tuple[int, int] = (1216, 352)) -> CalibrationSet:
    """Parse a KITTI-style calibration file.

    Expected lines are ``KEY: v1 v2 ...`` with whitespace-separated reals.
    Required keys: P2 (12 values), R0_rect (9), Tr_velo_to_cam (12); other
    keys are ignored. ``lidar_to_cam`` is R0_rect and Tr_velo_to_cam each
    embedded into a 4x4 identity and multiplied.

    Raises:
        MissingKeyError: a required key is absent.
        MalformedNumberError: a value fails to parse or a key has the wrong count.
        SingularIntrinsicsError: P2's left 3x3 block is not invertible.
    """
    values: dict[str, np.ndarray] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or ":" not in line:
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        if key not in _CALIB_KEYS:
            continue
        try:
            vals = np.array([float(tok) for tok in rest.split()], dtype=np.float64)
        except ValueError as exc:
            raise MalformedNumberError(f"bad value in calibration key {key}: {exc}") from None
        if vals.size != _CALIB_KEYS[key]:
            raise MalformedNumberError(
                f"calibration key {key} has {vals.size} values, expected {_CALIB_KEYS[key]}"
            )
        values[key] = vals

    for key in _CALIB_KEYS:
        if key not in values:
            raise MissingKeyError(f"calibration key {key} not found")

    cam = values["P2"].reshape(3, 4)
    r0 = _expand4(values["R0_rect"].reshape(3, 3))
    tr = _expand4(values["Tr_velo_to_cam"].reshape(3, 4))
    return CalibrationSet(cam_matrix=cam, lidar_to_cam=r0 @ tr, image_size=image_size)


def calibration_text(p2: np.ndarray, r0_rect: np.ndarray, tr_velo_to_cam: np.ndarray) -> str:
    """Serialize raw calibration matrices back to the text file format."""
    def fmt(name, m):
        return name + ": " + " ".join(repr(float(v)) for v in np.asarray(m).ravel())

    return "\n".join(
        [fmt("P2", p2), fmt("R0_rect", np.asarray(r0_rect)[:3, :3]),
         fmt("Tr_velo_to_cam", np.asarray(tr_velo_to_cam)[:3, :4])]
    ) + "\n"


def project(calib: CalibrationSet, xyz: np.ndarray):
    """Project LiDAR-frame points into the image plane.

    Args:
        calib: calibration for the frame.
        xyz: (..., 3) array of points, meters.

    Returns:
        (u, v, depth) arrays of shape ``xyz.shape[:-1]``. ``depth`` is the
        camera-frame forward distance; values <= BEHIND_EPS mean the point is
        behind the image plane and (u, v) are meaningless there. No bounds
        clamping is applied.
    """
    pts = np.asarray(xyz, dtype=np.float64)
    P = calib.proj
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    # Fixed elementwise evaluation order: identical bit pattern whether the
    # inputs arrive one point at a time or as a batch.
    depth = P[2, 0] * x + P[2, 1] * y + P[2, 2] * z + P[2, 3]
    u_num = P[0, 0] * x + P[0, 1] * y + P[0, 2] * z + P[0, 3]
    v_num = P[1, 0] * x + P[1, 1] * y + P[1, 2] * z + P[1, 3]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = u_num / depth
        v = v_num / depth
    return u, v, depth


def project_point(calib: CalibrationSet, xyz) -> Optional[PixelCoord]:
    """Project a single point; returns None when it is behind the camera."""
    u, v, depth = project(calib, np.asarray(xyz, dtype=np.float64))
    if depth <= BEHIND_EPS:
        return None
    return PixelCoord(float(u), float(v), float(depth))


def back_project(calib: CalibrationSet, u, v, depth) -> np.ndarray:
    """Lift image coordinates with known depth back to LiDAR-frame points.

    Decomposes ``cam_matrix`` as [K | k]; the camera point is
    ``K^-1 (depth * (u, v, 1) - k)``, mapped through the inverse of
    ``lidar_to_cam``. Exact inverse of :func:`project` for depth > 0.

    Returns:
        (..., 3) array of LiDAR-frame points.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    d = np.asarray(depth, dtype=np.float64)
    k = calib.cam_matrix[:, 3]
    ki = calib._intrinsics_inv
    hx = d * u - k[0]
    hy = d * v - k[1]
    hz = d - k[2]
    cx = ki[0, 0] * hx + ki[0, 1] * hy + ki[0, 2] * hz
    cy = ki[1, 0] * hx + ki[1, 1] * hy + ki[1, 2] * hz
    cz = ki[2, 0] * hx + ki[2, 1] * hy + ki[2, 2] * hz
    t = calib._lidar_from_cam
    out = np.empty(np.broadcast(u, v, d).shape + (3,), dtype=np.float64)
    out[..., 0] = t[0, 0] * cx + t[0, 1] * cy + t[0, 2] * cz + t[0, 3]
    out[..., 1] = t[1, 0] * cx + t[1, 1] * cy + t[1, 2] * cz + t[1, 3]
    out[..., 2] = t[2, 0] * cx + t[2, 1] * cy + t[2, 2] * cz + t[2, 3]
    return out


def back_project_point(calib: CalibrationSet, pixel: PixelCoord) -> np.ndarray:
    """Back-project a single PixelCoord (depth must be positive)."""
    if not pixel.depth > 0:
        raise ValueError(f"pixel depth must be > 0, got {pixel.depth}")
    return back_project(calib, pixel.u, pixel.v, pixel.depth)


def to_spherical(xyz: np.ndarray):
    """Convert Cartesian points to (range, azimuth, elevation).

    range = |xyz|, azimuth = atan2(y, x) in (-pi, pi], elevation =
    asin(z / range) in [-pi/2, pi/2].

    Raises:
        ZeroRadiusError: any point has zero range.
    """
    pts = np.asarray(xyz, dtype=np.float64)
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    if np.any(r == 0.0):
        raise ZeroRadiusError("point at the origin has no spherical representation")
    az = np.arctan2(y, x)
    az = np.where(az == -np.pi, np.pi, az)  # keep azimuth in (-pi, pi]
    el = np.arcsin(np.clip(z / r, -1.0, 1.0))
    return r, az, el


def from_spherical(r, azimuth, elevation) -> np.ndarray:
    """Inverse of :func:`to_spherical`."""
    r = np.asarray(r, dtype=np.float64)
    az = np.asarray(azimuth, dtype=np.float64)
    el = np.asarray(elevation, dtype=np.float64)
    ce = np.cos(el)
    out = np.empty(np.broadcast(r, az, el).shape + (3,), dtype=np.float64)
    out[..., 0] = r * ce * np.cos(az)
    out[..., 1] = r * ce * np.sin(az)
    out[..., 2] = r * np.sin(el)
    return out
