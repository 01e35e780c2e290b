"""Distance-aware data augmentation.

Dense nearby objects are pushed radially outward, resampled through angular
voxels matching a rotating scanner's beam/step resolution, and optionally
cut by a random azimuth wedge to mimic occlusion. The resulting sparse
samples are pasted into training scenes together with their boxes.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

from .errors import LayoutMismatchError, ZeroRadiusError
from .geometry import to_spherical
from .rng import make_rng


def _wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(float(a), 2.0 * math.pi)
    return math.pi if w == -math.pi else w


@dataclass(frozen=True, eq=False)
class Box3D:
    """Oriented 3D box in the LiDAR frame (yaw about +z, geometric center).

    Equality is object identity: the array field makes field-wise ``==``
    ambiguous, and the toolkit never needs value equality on boxes.
    """

    center: np.ndarray
    size: tuple[float, float, float]  # (length, width, height), meters
    yaw: float
    class_id: int = 0

    def __post_init__(self):
        c = np.array(self.center, dtype=np.float64).reshape(3)
        c.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "size", tuple(float(s) for s in self.size))
        object.__setattr__(self, "yaw", _wrap_angle(self.yaw))
        object.__setattr__(self, "class_id", int(self.class_id))
        if any(s <= 0 for s in self.size):
            raise ValueError(f"box size components must be positive, got {self.size}")

    def contains(self, xyz: np.ndarray, eps: float = 0.0) -> np.ndarray:
        """Boolean mask of points inside the (optionally inflated) box."""
        pts = np.asarray(xyz, dtype=np.float64).reshape(-1, 3)
        d = pts - self.center
        cy, sy = math.cos(self.yaw), math.sin(self.yaw)
        bx = d[:, 0] * cy + d[:, 1] * sy
        by = -d[:, 0] * sy + d[:, 1] * cy
        hl, hw, hh = (s / 2.0 + eps for s in self.size)
        return (
            (np.abs(bx) <= hl)
            & (np.abs(by) <= hw)
            & (np.abs(d[:, 2]) <= hh)
        )

    def corners(self) -> np.ndarray:
        """(8, 3) box corners in the LiDAR frame."""
        l, w, h = self.size
        sx = np.array([1, 1, 1, 1, -1, -1, -1, -1], dtype=np.float64) * (l / 2)
        sy = np.array([1, 1, -1, -1, 1, 1, -1, -1], dtype=np.float64) * (w / 2)
        sz = np.array([1, -1, 1, -1, 1, -1, 1, -1], dtype=np.float64) * (h / 2)
        cy, syaw = math.cos(self.yaw), math.sin(self.yaw)
        out = np.empty((8, 3), dtype=np.float64)
        out[:, 0] = self.center[0] + sx * cy - sy * syaw
        out[:, 1] = self.center[1] + sx * syaw + sy * cy
        out[:, 2] = self.center[2] + sz
        return out

    def bev_aabb(self, inflate: float = 0.0) -> tuple[float, float, float, float]:
        """Axis-aligned bird's-eye-view bound (x0, y0, x1, y1)."""
        c = self.corners()
        return (
            float(c[:, 0].min() - inflate),
            float(c[:, 1].min() - inflate),
            float(c[:, 0].max() + inflate),
            float(c[:, 1].max() + inflate),
        )

    def translated(self, t: np.ndarray) -> "Box3D":
        return Box3D(self.center + np.asarray(t, dtype=np.float64), self.size, self.yaw, self.class_id)

    @property
    def range(self) -> float:
        return float(np.linalg.norm(self.center))


@dataclass(frozen=True, eq=False)
class BoxSample:
    """A ground-truth box together with the cloud rows inside it.

    ``validate=False`` skips the containment check, for rows that round-trip
    through float32 files and may sit a hair outside the 1e-6 inflation.
    """

    box: Box3D
    points: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or (pts.shape[0] and pts.shape[1] < 3):
            raise ValueError(f"sample points must be (N, D>=3), got {pts.shape}")
        if validate and pts.shape[0] and not bool(np.all(self.box.contains(pts[:, :3], eps=1e-6))):
            raise ValueError("sample contains points outside its box")
        object.__setattr__(self, "points", pts)

    @property
    def num_points(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class SphericalVoxelGrid:
    """Angular voxel grid; the radial axis is kept for forward compatibility
    but unused by default (one object spans a thin radial shell)."""

    az_res: float
    el_res: float
    r_res: float = 1.0

    def __post_init__(self):
        if self.az_res <= 0 or self.el_res <= 0 or self.r_res <= 0:
            raise ValueError("voxel resolutions must be positive")

    def groups(self, xyz: np.ndarray) -> list[tuple[tuple[int, int], np.ndarray]]:
        """Voxel groups in ascending (azimuth, elevation) index order; member
        indices ascend within each group."""
        n = xyz.shape[0]
        if n == 0:
            return []
        _, az, el = to_spherical(xyz)
        ia = np.floor(az / self.az_res).astype(np.int64)
        ie = np.floor(el / self.el_res).astype(np.int64)
        order = np.lexsort((np.arange(n), ie, ia))
        sia, sie = ia[order], ie[order]
        cuts = np.nonzero((np.diff(sia) != 0) | (np.diff(sie) != 0))[0] + 1
        return [
            ((int(sia[g[0]]), int(sie[g[0]])), order[g])
            for g in np.split(np.arange(n), cuts)
        ]

    def occupancy(self, xyz: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
        """Map (azimuth index, elevation index) -> ascending point indices."""
        return dict(self.groups(xyz))


@dataclass(frozen=True)
class DadaConfig:
    """Parameters of the augmentation pipeline.

    Defaults target a 64-beam-class sensor: 0.2 deg azimuth / 0.4 deg
    elevation resolution, 5 cm merge threshold.
    """

    offset_range: tuple[float, float] = (10.0, 40.0)
    merge_threshold: float = 0.05
    az_res: float = math.radians(0.2)
    el_res: float = math.radians(0.4)
    occlusion_range: tuple[float, float] = (0.1, 0.4)
    seed: int = 0

    def __post_init__(self):
        if self.offset_range[0] < 0 or self.offset_range[1] < self.offset_range[0]:
            raise ValueError(f"bad offset_range {self.offset_range}")
        if self.merge_threshold <= 0:
            raise ValueError("merge_threshold must be positive")
        lo, hi = self.occlusion_range
        if not (0.0 <= lo <= hi < 1.0):
            raise ValueError(f"occlusion_range must lie within [0, 1), got {self.occlusion_range}")

    def grid(self) -> SphericalVoxelGrid:
        return SphericalVoxelGrid(az_res=self.az_res, el_res=self.el_res)


def extract_box_samples(cloud: np.ndarray, boxes: list[Box3D], eps: float = 1e-6) -> list[BoxSample]:
    """Collect the interior points of each box.

    Points falling in overlapping boxes are assigned to the first box in
    list order. Containment is inflated by ``eps`` so points lying exactly on
    a box surface are kept despite floating-point wobble.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2:
        cloud = cloud.reshape(0, 4)
    assigned = np.zeros(cloud.shape[0], dtype=bool)
    samples = []
    for box in boxes:
        mask = box.contains(cloud[:, :3], eps=eps) & ~assigned if cloud.shape[0] else np.zeros(0, bool)
        samples.append(BoxSample(box, cloud[mask]))
        assigned |= mask
    return samples


def apply_distance_offset(sample: BoxSample, delta: float) -> BoxSample:
    """Translate a sample radially outward from the ego origin by ``delta``.

    The translation is ``delta * center / |center|``, so the box range grows
    by exactly delta while all pairwise distances are preserved.

    Raises:
        ZeroRadiusError: the box is centered at the ego origin.
    """
    norm = sample.box.range
    if norm == 0.0:
        raise ZeroRadiusError("cannot offset a box centered at the ego origin")
    t = float(delta) * sample.box.center / norm
    pts = sample.points.copy()
    if pts.shape[0]:
        pts[:, 0] += t[0]
        pts[:, 1] += t[1]
        pts[:, 2] += t[2]
    return BoxSample(sample.box.translated(t), pts)


def _linkage_clusters(xyz: np.ndarray, threshold: float) -> list[np.ndarray]:
    """Single-linkage components under ``distance < threshold``; clusters are
    returned ordered by their smallest member index."""
    n = xyz.shape[0]
    if n == 1:
        return [np.array([0], dtype=np.int64)]
    d2 = np.square(xyz[:, 0, None] - xyz[None, :, 0])
    d2 += np.square(xyz[:, 1, None] - xyz[None, :, 1])
    d2 += np.square(xyz[:, 2, None] - xyz[None, :, 2])
    close = d2 < threshold * threshold
    n_close = int(np.count_nonzero(close))
    if n_close == n * n:  # fully connected: one cluster
        return [np.arange(n, dtype=np.int64)]
    if n_close == n:  # only the diagonal: all singletons
        return [np.array([i], dtype=np.int64) for i in range(n)]
    # Breadth-first sweep with vectorized frontier expansion; scanning seeds
    # in ascending order yields clusters already ordered by first member.
    unseen = np.ones(n, dtype=bool)
    clusters = []
    for seed in range(n):
        if not unseen[seed]:
            continue
        unseen[seed] = False
        members = [seed]
        frontier = np.array([seed])
        while frontier.size:
            reach = close[frontier].any(axis=0) & unseen
            frontier = np.nonzero(reach)[0]
            unseen[frontier] = False
            members.append(frontier)
        clusters.append(np.sort(np.concatenate([np.atleast_1d(m) for m in members])))
    return clusters


def spherical_resample(
    sample: BoxSample,
    grid: SphericalVoxelGrid,
    merge_threshold: float,
) -> BoxSample:
    """Collapse near-coincident points within each angular voxel.

    Points are bucketed by (floor(az / az_res), floor(el / el_res)). Within a
    voxel, single-linkage joins any pair closer than merge_threshold and each
    cluster is replaced by the mean of its rows (all columns). Output order is
    ascending voxel index, then clusters by first member.
    """
    pts = sample.points
    if pts.shape[0] == 0:
        return sample
    out_rows = []
    for _key, members in grid.groups(pts[:, :3]):
        for cluster in _linkage_clusters(pts[members, :3], merge_threshold):
            rows = pts[members[cluster]]
            out_rows.append(rows.mean(axis=0) if rows.shape[0] > 1 else rows[0])
    return BoxSample(sample.box, np.stack(out_rows))


def simulate_occlusion(sample: BoxSample, fraction: float, rng: np.random.Generator) -> BoxSample:
    """Delete a contiguous azimuth wedge spanning ``fraction`` of the sample's
    azimuth extent, placed uniformly at random."""
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"occlusion fraction must lie in [0, 1), got {fraction}")
    pts = sample.points
    if pts.shape[0] == 0:
        return sample
    _, az, _ = to_spherical(pts[:, :3])
    lo, hi = float(az.min()), float(az.max())
    width = fraction * (hi - lo)
    start = float(rng.uniform(lo, hi - width))
    keep = ~((az >= start) & (az < start + width))
    return BoxSample(sample.box, pts[keep])


def _aabb_overlap(a, b) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def gt_aug_insert(
    scene: np.ndarray,
    scene_boxes: list[Box3D],
    donors: list[BoxSample],
    max_insert: int,
    rng: np.random.Generator,
    order=None,
):
    """Paste donor samples into a scene, ground-truth-sampling style.

    Donors are tried in rng order (or the explicit ``order`` index sequence,
    e.g. for class-balanced draws) until ``max_insert`` are accepted. A donor
    is rejected when its BEV footprint (axis-aligned bound of the yawed box,
    inflated 0.1 m) intersects any existing or already-inserted box. On
    acceptance, scene points inside the donor box are deleted, then the donor
    points and box are appended.

    Returns:
        (cloud, boxes) with surviving scene rows first, donors in acceptance
        order after them.
    """
    scene = np.asarray(scene, dtype=np.float64)
    if scene.ndim != 2:
        width = donors[0].points.shape[1] if donors else 4
        scene = scene.reshape(0, width)
    boxes = list(scene_boxes)
    keep = np.ones(scene.shape[0], dtype=bool)
    inserted_points = []
    accepted = 0
    if order is None:
        order = rng.permutation(len(donors))
    for idx in order:
        if accepted >= max_insert:
            break
        donor = donors[int(idx)]
        if donor.points.shape[1] != scene.shape[1]:
            raise LayoutMismatchError(
                f"donor has {donor.points.shape[1]} columns, scene has {scene.shape[1]}"
            )
        footprint = donor.box.bev_aabb(inflate=0.1)
        if any(_aabb_overlap(footprint, b.bev_aabb()) for b in boxes):
            continue
        if scene.shape[0]:
            keep &= ~donor.box.contains(scene[:, :3])
        inserted_points.append(donor.points)
        boxes.append(donor.box)
        accepted += 1
    cloud = np.concatenate([scene[keep], *inserted_points], axis=0)
    return cloud, boxes


def dada_pipeline(samples: list[BoxSample], cfg: DadaConfig) -> list[BoxSample]:
    """Run offset, resample and (with probability 0.5) occlusion per sample.

    Fully determined by cfg.seed: sample ``i`` draws from its own stream, so
    results do not depend on processing order or parallel scheduling.
    """
    grid = cfg.grid()
    out = []
    for i, sample in enumerate(samples):
        g = make_rng(cfg.seed, "dada-sample", i)
        delta = float(g.uniform(cfg.offset_range[0], cfg.offset_range[1]))
        shifted = apply_distance_offset(sample, delta)
        resampled = spherical_resample(shifted, grid, cfg.merge_threshold)
        if g.random() < 0.5:
            fraction = float(g.uniform(cfg.occlusion_range[0], cfg.occlusion_range[1]))
            resampled = simulate_occlusion(resampled, fraction, g)
        out.append(resampled)
    return out
