"""Deliberately naive reference implementations used as test oracles.

These trade speed for obviousness: plain per-point Python loops, no shared
code with the library's vectorized paths beyond the documented math.
"""

import math

import numpy as np


def matmul4_oracle(a, b):
    """4x4 matrix product via explicit triple loop."""
    out = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc += a[i][k] * b[k][j]
            out[i, j] = acc
    return out


def naive_paint(points, scores, calib):
    """Per-point painting loop: project, round half-up, gather, concatenate.

    Pixel rule: floor(x + 0.5) with the exact boundary (width - 0.5 /
    height - 0.5) clamped inward; behind-camera and out-of-view points get
    the background one-hot.
    """
    proj = calib.cam_matrix @ calib.lidar_to_cam
    height, width, n_classes = scores.shape
    img_w, img_h = calib.image_size
    assert (img_w, img_h) == (width, height)
    background = np.zeros(n_classes, dtype=scores.dtype)
    background[0] = 1.0
    rows = []
    for point in points:
        x, y, z = float(point[0]), float(point[1]), float(point[2])
        depth = proj[2, 0] * x + proj[2, 1] * y + proj[2, 2] * z + proj[2, 3]
        vec = background
        if depth > 1e-6:
            u = (proj[0, 0] * x + proj[0, 1] * y + proj[0, 2] * z + proj[0, 3]) / depth
            v = (proj[1, 0] * x + proj[1, 1] * y + proj[1, 2] * z + proj[1, 3]) / depth
            col = math.floor(u + 0.5)
            row = math.floor(v + 0.5)
            if u == width - 0.5:
                col = width - 1
            if v == height - 0.5:
                row = height - 1
            if 0 <= col < width and 0 <= row < height:
                vec = scores[row, col, :]
        out = np.empty(len(point) + n_classes, dtype=np.float64)
        out[: len(point)] = point
        out[len(point):] = vec
        rows.append(out)
    return np.stack(rows) if rows else np.empty((0, points.shape[1] + n_classes))


def naive_rasterize(points, calib):
    """Min-depth rasterization as a dict {(row, col): depth}."""
    proj = calib.cam_matrix @ calib.lidar_to_cam
    width, height = calib.image_size
    cells = {}
    for point in points:
        x, y, z = (float(v) for v in point[:3])
        depth = proj[2, 0] * x + proj[2, 1] * y + proj[2, 2] * z + proj[2, 3]
        if depth <= 1e-6 or depth > 655.35:
            continue
        u = (proj[0, 0] * x + proj[0, 1] * y + proj[0, 2] * z + proj[0, 3]) / depth
        v = (proj[1, 0] * x + proj[1, 1] * y + proj[1, 2] * z + proj[1, 3]) / depth
        col = math.floor(u + 0.5)
        row = math.floor(v + 0.5)
        if u == width - 0.5:
            col = width - 1
        if v == height - 0.5:
            row = height - 1
        if 0 <= col < width and 0 <= row < height:
            key = (row, col)
            if key not in cells or depth < cells[key]:
                cells[key] = depth
    return cells


def naive_voxel_clusters(points, az_res, el_res, lam):
    """O(n^2) per-voxel single-linkage: returns clusters as lists of original
    indices, ordered by ascending voxel index then first member."""
    azimuths = []
    elevations = []
    for p in points:
        x, y, z = (float(v) for v in p[:3])
        r = math.sqrt(x * x + y * y + z * z)
        az = math.atan2(y, x)
        if az == -math.pi:
            az = math.pi
        azimuths.append(az)
        elevations.append(math.asin(max(-1.0, min(1.0, z / r))))

    voxels = {}
    for i in range(len(points)):
        key = (math.floor(azimuths[i] / az_res), math.floor(elevations[i] / el_res))
        voxels.setdefault(key, []).append(i)

    clusters = []
    for key in sorted(voxels):
        members = voxels[key]
        seen = set()
        for start in members:
            if start in seen:
                continue
            comp = [start]
            seen.add(start)
            queue = [start]
            while queue:
                a = queue.pop()
                for b in members:
                    if b in seen:
                        continue
                    d2 = sum((points[a][k] - points[b][k]) ** 2 for k in range(3))
                    if d2 < lam * lam:
                        seen.add(b)
                        comp.append(b)
                        queue.append(b)
            clusters.append(sorted(comp))
    return clusters


def naive_resample(points, az_res, el_res, lam):
    """Oracle for spherical_resample: same clustering, numpy mean per cluster
    over members in ascending index order."""
    rows = []
    for comp in naive_voxel_clusters(points, az_res, el_res, lam):
        member_rows = points[np.array(comp, dtype=np.int64)]
        rows.append(member_rows.mean(axis=0) if len(comp) > 1 else member_rows[0])
    return np.stack(rows) if rows else points[:0]
