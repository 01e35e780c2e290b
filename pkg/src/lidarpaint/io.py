"""File formats: KITTI .bin clouds, 16-bit depth PNGs, score tensors (VPTN),
painted clouds (VPPC), KITTI label text and the donor database.

All binary formats are little-endian. Depth PNGs follow the depth-completion
convention: 16-bit single channel, depth_m = pixel_value / 256.0, pixel 0
marks an invalid cell.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .dada import Box3D, BoxSample
from .depthmap import DepthMap
from .errors import FileFormatError
from .geometry import CalibrationSet, project
from .painting import PaintedCloud

VPTN_MAGIC = b"VPTN"
VPPC_MAGIC = b"VPPC"

# KITTI detection classes painted by the segmentation network (index 0 is
# background).
ID_TO_CLASS = {1: "Car", 2: "Pedestrian", 3: "Cyclist"}
CLASS_TO_ID = {name: cid for cid, name in ID_TO_CLASS.items()}


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via temp file + rename so readers never see partial output."""
    path = Path(path)
    tmp = path.parent / f".{path.name}.tmp{os.getpid()}"
    tmp.write_bytes(data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Point clouds (KITTI .bin: float32 x, y, z, intensity records, no header)

def read_bin(path) -> np.ndarray:
    """Read a KITTI velodyne .bin into an (N, 4) float64 array."""
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 4:
        raise FileFormatError(f"{path}: byte length is not a multiple of 16")
    return raw.reshape(-1, 4).astype(np.float64)


def cloud_to_bin_bytes(cloud: np.ndarray) -> bytes:
    cloud = np.asarray(cloud)
    if cloud.ndim != 2 or cloud.shape[1] < 4:
        raise ValueError(f"need an (N, >=4) cloud to write a .bin, got {cloud.shape}")
    return np.ascontiguousarray(cloud[:, :4], dtype="<f4").tobytes()


def write_bin(path, cloud: np.ndarray) -> None:
    atomic_write_bytes(path, cloud_to_bin_bytes(cloud))


# ---------------------------------------------------------------------------
# Depth maps (16-bit grayscale PNG)

def write_depth_png(path, depth: DepthMap) -> None:
    """Encode depth as uint16 = round(depth_m * 256), saturating at 65535."""
    px = np.clip(np.round(depth.values * 256.0), 0, 65535).astype(np.uint16)
    img = Image.fromarray(px)  # uint16 -> 16-bit grayscale
    tmp = Path(path).parent / f".{Path(path).name}.tmp{os.getpid()}"
    img.save(tmp, format="PNG")
    os.replace(tmp, path)


def read_depth_png(path) -> DepthMap:
    with Image.open(path) as img:
        px = np.asarray(img, dtype=np.uint32)
    if px.ndim != 2:
        raise FileFormatError(f"{path}: depth PNG must be single channel")
    return DepthMap(px.astype(np.float64) / 256.0)


# ---------------------------------------------------------------------------
# Score tensors (VPTN)

def score_map_to_bytes(scores: np.ndarray) -> bytes:
    """VPTN: magic, u32 height/width/channels, float32 data channel-fastest."""
    arr = np.ascontiguousarray(scores, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"score tensor must be H x W x C, got {arr.shape}")
    h, w, c = arr.shape
    return VPTN_MAGIC + struct.pack("<III", h, w, c) + arr.tobytes()


def write_score_map(path, scores: np.ndarray) -> None:
    atomic_write_bytes(path, score_map_to_bytes(scores))


def read_score_map(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if blob[:4] != VPTN_MAGIC:
        raise FileFormatError(f"{path}: bad magic {blob[:4]!r}, expected VPTN")
    h, w, c = struct.unpack_from("<III", blob, 4)
    expected = 16 + h * w * c * 4
    if len(blob) != expected:
        raise FileFormatError(f"{path}: size {len(blob)} != expected {expected}")
    return np.frombuffer(blob, dtype="<f4", offset=16).reshape(h, w, c).copy()


# ---------------------------------------------------------------------------
# Painted clouds (VPPC)

def painted_to_bytes(painted: PaintedCloud) -> bytes:
    """VPPC: magic, u32 N/total_dims/base_dims, float32 rows, provenance bytes."""
    data = np.ascontiguousarray(painted.data, dtype="<f4")
    n, total = data.shape
    prov = np.ascontiguousarray(painted.provenance, dtype=np.uint8)
    return (
        VPPC_MAGIC
        + struct.pack("<III", n, total, painted.base_dims)
        + data.tobytes()
        + prov.tobytes()
    )


def write_painted(path, painted: PaintedCloud) -> None:
    atomic_write_bytes(path, painted_to_bytes(painted))


def read_painted(path) -> PaintedCloud:
    blob = Path(path).read_bytes()
    if blob[:4] != VPPC_MAGIC:
        raise FileFormatError(f"{path}: bad magic {blob[:4]!r}, expected VPPC")
    n, total, base = struct.unpack_from("<III", blob, 4)
    expected = 16 + n * total * 4 + n
    if len(blob) != expected:
        raise FileFormatError(f"{path}: size {len(blob)} != expected {expected}")
    data = np.frombuffer(blob, dtype="<f4", offset=16, count=n * total)
    prov = np.frombuffer(blob, dtype=np.uint8, offset=16 + n * total * 4, count=n)
    return PaintedCloud(
        data=data.reshape(n, total).astype(np.float64),
        base_dims=int(base),
        provenance=prov.copy(),
    )


# ---------------------------------------------------------------------------
# KITTI labels (camera-frame boxes <-> LiDAR-frame Box3D)

def _heading_cam_to_lidar(rotation_y: float, calib: CalibrationSet) -> float:
    d_cam = np.array([math.cos(rotation_y), 0.0, -math.sin(rotation_y), 0.0])
    d_lidar = calib._lidar_from_cam @ d_cam
    return math.atan2(d_lidar[1], d_lidar[0])


def _heading_lidar_to_cam(yaw: float, calib: CalibrationSet) -> float:
    d_lidar = np.array([math.cos(yaw), math.sin(yaw), 0.0, 0.0])
    d_cam = calib.lidar_to_cam @ d_lidar
    return math.atan2(-d_cam[2], d_cam[0])


def parse_labels(text: str, calib: CalibrationSet) -> list[Box3D]:
    """Parse KITTI label lines into LiDAR-frame boxes.

    Labels store the bottom-face center in the rectified camera frame plus
    (h, w, l) and rotation_y; types without a class id (DontCare, Van, ...)
    are skipped.
    """
    boxes = []
    for line in text.splitlines():
        fields = line.split()
        if len(fields) < 15 or fields[0] not in CLASS_TO_ID:
            continue
        h, w, l = (float(v) for v in fields[8:11])
        x, y, z = (float(v) for v in fields[11:14])
        ry = float(fields[14])
        bottom = calib._lidar_from_cam @ np.array([x, y, z, 1.0])
        center = bottom[:3] + np.array([0.0, 0.0, h / 2.0])
        boxes.append(
            Box3D(
                center=center,
                size=(l, w, h),
                yaw=_heading_cam_to_lidar(ry, calib),
                class_id=CLASS_TO_ID[fields[0]],
            )
        )
    return boxes


def _bbox_2d(box: Box3D, calib: CalibrationSet) -> tuple[float, float, float, float]:
    u, v, d = project(calib, box.corners())
    front = d > 0
    if not np.any(front):
        return (0.0, 0.0, 0.0, 0.0)
    w, h = calib.image_size
    return (
        float(np.clip(u[front].min(), 0, w - 1)),
        float(np.clip(v[front].min(), 0, h - 1)),
        float(np.clip(u[front].max(), 0, w - 1)),
        float(np.clip(v[front].max(), 0, h - 1)),
    )


def format_labels(boxes: list[Box3D], calib: CalibrationSet) -> str:
    """Serialize LiDAR-frame boxes to KITTI label text."""
    lines = []
    for box in boxes:
        name = ID_TO_CLASS.get(box.class_id, "Misc")
        l, w, h = box.size
        bottom = box.center - np.array([0.0, 0.0, h / 2.0])
        cam = calib.lidar_to_cam @ np.append(bottom, 1.0)
        ry = _heading_lidar_to_cam(box.yaw, calib)
        alpha = ry - math.atan2(cam[0], cam[2])
        u0, v0, u1, v1 = _bbox_2d(box, calib)
        lines.append(
            f"{name} 0.00 0 {alpha:.6f} {u0:.2f} {v0:.2f} {u1:.2f} {v1:.2f} "
            f"{h:.6f} {w:.6f} {l:.6f} {cam[0]:.6f} {cam[1]:.6f} {cam[2]:.6f} {ry:.6f}"
        )
    return "\n".join(lines) + ("\n" if lines else "")


def read_labels(path, calib: CalibrationSet) -> list[Box3D]:
    return parse_labels(Path(path).read_text(), calib)


def write_labels(path, boxes: list[Box3D], calib: CalibrationSet) -> None:
    atomic_write_bytes(path, format_labels(boxes, calib).encode())


# ---------------------------------------------------------------------------
# Donor database (VPPC point files + JSON-lines index)

INDEX_NAME = "index.jsonl"


@dataclass(frozen=True)
class DonorRecord:
    """One stored donor: its sample plus the column/provenance bookkeeping
    needed to paste it into clouds of the same layout."""

    donor_id: str
    frame: str
    sample: BoxSample
    base_dims: int
    provenance: np.ndarray


def save_donor_db(db_dir, donors: list[DonorRecord]) -> None:
    """Write donors as VPPC files plus a JSON-lines index."""
    db_dir = Path(db_dir)
    db_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for rec in donors:
        painted = PaintedCloud(
            data=rec.sample.points,
            base_dims=rec.base_dims,
            provenance=np.asarray(rec.provenance, dtype=np.uint8),
        )
        write_painted(db_dir / f"{rec.donor_id}.vppc", painted)
        box = rec.sample.box
        lines.append(
            json.dumps(
                {
                    "id": rec.donor_id,
                    "frame": rec.frame,
                    "class_id": box.class_id,
                    "center": [float(v) for v in box.center],
                    "size": [float(v) for v in box.size],
                    "yaw": float(box.yaw),
                    "num_points": int(rec.sample.num_points),
                },
                sort_keys=True,
            )
        )
    atomic_write_bytes(db_dir / INDEX_NAME, ("\n".join(lines) + ("\n" if lines else "")).encode())


def load_donor_db(db_dir) -> list[DonorRecord]:
    """Load all donors in index order."""
    db_dir = Path(db_dir)
    donors = []
    index = db_dir / INDEX_NAME
    if not index.exists():
        raise FileFormatError(f"donor database index not found: {index}")
    for line in index.read_text().splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        painted = read_painted(db_dir / f"{rec['id']}.vppc")
        box = Box3D(
            center=np.array(rec["center"]),
            size=tuple(rec["size"]),
            yaw=rec["yaw"],
            class_id=rec["class_id"],
        )
        donors.append(
            DonorRecord(
                donor_id=rec["id"],
                frame=rec["frame"],
                sample=BoxSample(box, painted.data, validate=False),
                base_dims=painted.base_dims,
                provenance=painted.provenance,
            )
        )
    return donors
