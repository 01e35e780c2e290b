"""Deterministic synthetic LiDAR scenes.

A scene is a ground plane plus oriented boxes. ``generate_scan`` casts one
ray per (elevation, azimuth) pair from the sensor origin and keeps the first
surface hit, mimicking a rotating scanner. ``render_frame_rasters`` ray-casts
the same scene through the camera to produce the dense depth map and score
tensor a completion/segmentation network would output, which makes the full
pipeline runnable without any real data or networks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dada import Box3D
from .depthmap import DEPTH_MAX, DepthMap
from .geometry import CalibrationSet, back_project
from .painting import ScoreMap
from .rng import make_rng

_TINY = 1e-300  # stands in for zero ray components in slab tests


@dataclass(frozen=True)
class SynthSceneSpec:
    """Scan pattern plus scene content for one synthetic frame."""

    beam_elevations: tuple[float, ...]  # radians, strictly increasing
    azimuth_step: float  # radians
    max_range: float  # meters
    ground_z: float  # meters
    boxes: tuple[tuple[Box3D, float], ...]  # (box, surface density pts/m)
    seed: int = 0

    def __post_init__(self):
        elev = tuple(float(e) for e in self.beam_elevations)
        if self.azimuth_step <= 0:
            raise ValueError("azimuth step must be positive")
        if any(b >= a for a, b in zip(elev[1:], elev)):
            raise ValueError("beam elevations must be strictly increasing")
        object.__setattr__(self, "beam_elevations", elev)
        object.__setattr__(self, "boxes", tuple(self.boxes))


def kitti_like_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(P2, R0_rect, Tr_velo_to_cam) for the synthetic rig: camera 0.1 m above
    the sensor looking along +x, KITTI-flavored intrinsics for 1216x352."""
    p2 = np.array(
        [
            [721.5377, 0.0, 609.5593, 44.85728],
            [0.0, 721.5377, 172.854, 0.2163791],
            [0.0, 0.0, 1.0, 0.002745884],
        ]
    )
    r0 = np.eye(3)
    tr = np.array(
        [
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.1],
            [1.0, 0.0, 0.0, 0.0],
        ]
    )
    return p2, r0, tr


def kitti_like_calibration(image_size: tuple[int, int] = (1216, 352)) -> CalibrationSet:
    p2, r0, tr = kitti_like_matrices()
    tr4 = np.eye(4)
    tr4[:3] = tr
    return CalibrationSet(cam_matrix=p2, lidar_to_cam=tr4, image_size=image_size)


def _ray_box_entry(origin: np.ndarray, dirs: np.ndarray, box: Box3D) -> np.ndarray:
    """Entry distance of rays into an oriented box (inf where missed).

    origin: (..., 3) per-ray origins; dirs: (..., 3) direction vectors. The
    returned t is in units of |dirs|.
    """
    cy, sy = math.cos(box.yaw), math.sin(box.yaw)
    rel = origin - box.center
    ox = rel[..., 0] * cy + rel[..., 1] * sy
    oy = -rel[..., 0] * sy + rel[..., 1] * cy
    oz = rel[..., 2]
    dx = dirs[..., 0] * cy + dirs[..., 1] * sy
    dy = -dirs[..., 0] * sy + dirs[..., 1] * cy
    dz = dirs[..., 2]

    tmin = np.full(ox.shape, -np.inf)
    tmax = np.full(ox.shape, np.inf)
    for o, d, half in ((ox, dx, box.size[0] / 2), (oy, dy, box.size[1] / 2), (oz, dz, box.size[2] / 2)):
        d = np.where(d == 0.0, _TINY, d)
        t1 = (-half - o) / d
        t2 = (half - o) / d
        tmin = np.maximum(tmin, np.minimum(t1, t2))
        tmax = np.minimum(tmax, np.maximum(t1, t2))
    hit = (tmax >= tmin) & (tmax > 1e-9)
    entry = np.where(tmin > 1e-9, tmin, tmax)  # origin inside: exit instead
    return np.where(hit, entry, np.inf)


def generate_scan(spec: SynthSceneSpec) -> tuple[np.ndarray, list[Box3D], CalibrationSet]:
    """Simulate one rotating-scanner sweep over the scene.

    Rays start at the origin; azimuths are k * azimuth_step starting at 0.
    Points are emitted column by column (azimuth outer, elevation inner),
    each the nearest hit on the ground plane or a box within max_range.
    Intensities are seeded uniform draws, so equal specs give bit-identical
    clouds.

    Returns:
        (cloud (N, 4) float64, boxes, calibration for a 1216x352 image).
    """
    n_az = max(1, int(math.floor(2.0 * math.pi / spec.azimuth_step + 1e-9)))
    az = np.arange(n_az, dtype=np.float64) * spec.azimuth_step
    el = np.asarray(spec.beam_elevations, dtype=np.float64)
    azg = np.repeat(az, el.size)
    elg = np.tile(el, n_az)
    ce = np.cos(elg)
    dirs = np.stack([ce * np.cos(azg), ce * np.sin(azg), np.sin(elg)], axis=1)

    with np.errstate(divide="ignore"):
        t_ground = np.where(dirs[:, 2] < 0.0, spec.ground_z / np.where(dirs[:, 2] == 0, _TINY, dirs[:, 2]), np.inf)
    t_best = t_ground
    origin = np.zeros(3)
    for box, _density in spec.boxes:
        t_best = np.minimum(t_best, _ray_box_entry(origin, dirs, box))

    mask = np.isfinite(t_best) & (t_best <= spec.max_range)
    pts = dirs[mask] * t_best[mask, None]
    rng = make_rng(spec.seed, "scan-intensity")
    cloud = np.concatenate([pts, rng.uniform(0.0, 1.0, size=(pts.shape[0], 1))], axis=1)
    return cloud, [box for box, _ in spec.boxes], kitti_like_calibration()


def render_frame_rasters(
    spec: SynthSceneSpec,
    calib: CalibrationSet,
    num_classes: int = 4,
    fg_score: float = 0.8,
) -> tuple[DepthMap, ScoreMap]:
    """Ray-cast the scene through every pixel of the camera.

    Produces the ideal outputs of a depth-completion and a segmentation
    network on this scene: per-pixel camera depth (0 where nothing is hit
    within max_range) and normalized class scores with ``fg_score`` on the
    winning class.
    """
    width, height = calib.image_size
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    u = cols + 0.5
    v = rows + 0.5
    # The pixel ray in LiDAR coordinates is affine in camera depth d.
    a = back_project(calib, u, v, np.zeros_like(u, dtype=np.float64))
    b = back_project(calib, u, v, np.ones_like(u, dtype=np.float64)) - a

    bz = np.where(b[..., 2] == 0.0, _TINY, b[..., 2])
    d_ground = (spec.ground_z - a[..., 2]) / bz
    d_ground = np.where(d_ground > 1e-9, d_ground, np.inf)

    best = d_ground
    label = np.zeros((height, width), dtype=np.int64)
    for box, _density in spec.boxes:
        d_box = _ray_box_entry(a, b, box)
        closer = d_box < best
        best = np.where(closer, d_box, best)
        label = np.where(closer, box.class_id, label)

    cap = min(spec.max_range, DEPTH_MAX)
    valid = np.isfinite(best) & (best <= cap)
    depth = DepthMap(np.where(valid, best, 0.0))

    low = (1.0 - fg_score) / (num_classes - 1)
    scores = np.full((height, width, num_classes), low, dtype=np.float32)
    fg_label = np.where(valid, label, 0)
    ri, ci = np.indices((height, width))
    scores[ri, ci, fg_label] = fg_score
    return depth, ScoreMap(scores, normalized=True)


def sample_box_surface(box: Box3D, density: float) -> np.ndarray:
    """Cell-centered grid of points on all six faces of a box, (N, 4) with
    0.5 intensity. ``density`` is points per meter along each face axis;
    cell-centered sampling keeps faces from duplicating shared edge points."""
    l, w, h = box.size
    faces = []

    def centered(extent):
        n = max(2, int(round(extent * density)))
        step = extent / n
        return -extent / 2 + step * (np.arange(n) + 0.5)

    def grid(e1, e2):
        a, bgrid = np.meshgrid(centered(e1), centered(e2))
        return a.ravel(), bgrid.ravel()

    gy, gz = grid(w, h)
    for sx in (-l / 2, l / 2):
        faces.append(np.stack([np.full_like(gy, sx), gy, gz], axis=1))
    gx, gz = grid(l, h)
    for sy in (-w / 2, w / 2):
        faces.append(np.stack([gx, np.full_like(gx, sy), gz], axis=1))
    gx, gy = grid(l, w)
    for sz in (-h / 2, h / 2):
        faces.append(np.stack([gx, gy, np.full_like(gx, sz)], axis=1))

    local = np.concatenate(faces, axis=0)
    cy, sy = math.cos(box.yaw), math.sin(box.yaw)
    out = np.empty((local.shape[0], 4))
    out[:, 0] = box.center[0] + local[:, 0] * cy - local[:, 1] * sy
    out[:, 1] = box.center[1] + local[:, 0] * sy + local[:, 1] * cy
    out[:, 2] = box.center[2] + local[:, 2]
    out[:, 3] = 0.5
    return out


def default_scene_spec(seed: int = 0) -> SynthSceneSpec:
    """A 64-beam scene with objects spread across the three distance bins.

    Boxes live on distinct azimuth bands (all inside the camera's ~40 deg
    half-FOV) so nearer objects never fully shadow farther ones; positions
    are jittered by the seed so a frame sequence shows varied but
    reproducible content.
    """
    rng = make_rng(seed, "scene-layout")
    base = [
        # (range m, azimuth deg, class_id, (l, w, h))
        (14.0, -26.0, 1, (4.2, 1.8, 1.6)),
        (22.0, 24.0, 1, (4.0, 1.7, 1.5)),
        (18.0, -6.0, 2, (0.7, 0.7, 1.75)),
        (36.0, 9.0, 1, (4.4, 1.9, 1.7)),
        (42.0, -12.0, 3, (1.8, 0.6, 1.7)),
        (58.0, 2.0, 1, (4.3, 1.8, 1.6)),
        (66.0, -2.5, 1, (4.1, 1.7, 1.5)),
    ]
    boxes = []
    for rng_m, az_deg, cid, size in base:
        r = rng_m + float(rng.uniform(-1.0, 1.0))
        az = math.radians(az_deg + float(rng.uniform(-1.0, 1.0)))
        yaw = float(rng.uniform(-math.pi, math.pi))
        center = np.array([r * math.cos(az), r * math.sin(az), -1.73 + size[2] / 2])
        boxes.append((Box3D(center, size, yaw, cid), 60.0))
    elevations = tuple(np.deg2rad(np.linspace(-24.8, 2.0, 64)).tolist())
    return SynthSceneSpec(
        beam_elevations=elevations,
        azimuth_step=math.radians(0.2),
        max_range=80.0,
        ground_z=-1.73,
        boxes=tuple(boxes),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Spec (de)serialization

def scene_spec_to_json(spec: SynthSceneSpec) -> str:
    return json.dumps(
        {
            "beam_elevations": list(spec.beam_elevations),
            "azimuth_step": spec.azimuth_step,
            "max_range": spec.max_range,
            "ground_z": spec.ground_z,
            "seed": spec.seed,
            "boxes": [
                {
                    "center": [float(v) for v in box.center],
                    "size": list(box.size),
                    "yaw": box.yaw,
                    "class_id": box.class_id,
                    "density": density,
                }
                for box, density in spec.boxes
            ],
        },
        indent=2,
    )


def scene_spec_from_json(text: str) -> SynthSceneSpec:
    raw = json.loads(text)
    boxes = tuple(
        (
            Box3D(
                center=np.array(b["center"]),
                size=tuple(b["size"]),
                yaw=b["yaw"],
                class_id=b.get("class_id", 0),
            ),
            float(b.get("density", 50.0)),
        )
        for b in raw["boxes"]
    )
    return SynthSceneSpec(
        beam_elevations=tuple(raw["beam_elevations"]),
        azimuth_step=raw["azimuth_step"],
        max_range=raw["max_range"],
        ground_z=raw["ground_z"],
        boxes=boxes,
        seed=raw.get("seed", 0),
    )
