import math

import numpy as np
import pytest

from lidarpaint import (
    CalibrationSet,
    MalformedNumberError,
    MissingKeyError,
    SingularIntrinsicsError,
    ZeroRadiusError,
    back_project,
    back_project_point,
    calibration_text,
    from_spherical,
    parse_calibration,
    project,
    project_point,
    to_spherical,
)
from lidarpaint.geometry import PixelCoord, _expand4

from conftest import IDENTITY_CALIB_TEXT, KITTI_CALIB_TEXT, make_focal700_calib, make_identity_calib, make_kitti_calib
from reference import matmul4_oracle


class TestParseCalibration:
    def test_identity_case(self):
        calib = parse_calibration(IDENTITY_CALIB_TEXT, image_size=(10, 10))
        np.testing.assert_array_equal(calib.cam_matrix, np.hstack([np.eye(3), np.zeros((3, 1))]))
        np.testing.assert_array_equal(calib.lidar_to_cam, np.eye(4))

    def test_missing_key(self):
        text = "P2: 1 0 0 0 0 1 0 0 0 0 1 0\nR0_rect: 1 0 0 0 1 0 0 0 1\n"
        with pytest.raises(MissingKeyError):
            parse_calibration(text)

    def test_real_kitti_product_matches_matmul_oracle(self):
        calib = parse_calibration(KITTI_CALIB_TEXT)
        lines = {l.split(":")[0]: [float(t) for t in l.split(":")[1].split()] for l in KITTI_CALIB_TEXT.splitlines()}
        r0 = _expand4(np.array(lines["R0_rect"]).reshape(3, 3))
        tr = _expand4(np.array(lines["Tr_velo_to_cam"]).reshape(3, 4))
        expected = matmul4_oracle(r0.tolist(), tr.tolist())
        assert np.abs(calib.lidar_to_cam - expected).max() < 1e-12

    def test_malformed_number(self):
        text = IDENTITY_CALIB_TEXT.replace("Tr_velo_to_cam: 1", "Tr_velo_to_cam: banana")
        with pytest.raises(MalformedNumberError):
            parse_calibration(text)

    def test_wrong_value_count(self):
        text = IDENTITY_CALIB_TEXT.replace("R0_rect: 1 0 0 0 1 0 0 0 1", "R0_rect: 1 0 0 0 1")
        with pytest.raises(MalformedNumberError):
            parse_calibration(text)

    def test_singular_intrinsics(self):
        text = IDENTITY_CALIB_TEXT.replace("P2: 1 0 0 0 0 1 0 0 0 0 1 0", "P2: 1 0 0 0 0 1 0 0 0 0 0 0")
        with pytest.raises(SingularIntrinsicsError):
            parse_calibration(text)

    def test_whitespace_insensitive(self):
        tabbed = IDENTITY_CALIB_TEXT.replace(" ", "\t").replace(":\t", ": ")
        a = parse_calibration(IDENTITY_CALIB_TEXT)
        b = parse_calibration(tabbed)
        np.testing.assert_array_equal(a.cam_matrix, b.cam_matrix)
        np.testing.assert_array_equal(a.lidar_to_cam, b.lidar_to_cam)

    def test_calibration_text_round_trip(self):
        lines = {l.split(":")[0]: np.array([float(t) for t in l.split(":")[1].split()]) for l in KITTI_CALIB_TEXT.splitlines()}
        text = calibration_text(lines["P2"].reshape(3, 4), lines["R0_rect"].reshape(3, 3), lines["Tr_velo_to_cam"].reshape(3, 4))
        a = parse_calibration(KITTI_CALIB_TEXT)
        b = parse_calibration(text)
        np.testing.assert_array_equal(a.cam_matrix, b.cam_matrix)
        np.testing.assert_array_equal(a.lidar_to_cam, b.lidar_to_cam)

    def test_bad_bottom_row_rejected(self):
        t = np.eye(4)
        t[3, 0] = 1e-9
        with pytest.raises(ValueError):
            CalibrationSet(cam_matrix=np.hstack([np.eye(3), np.zeros((3, 1))]), lidar_to_cam=t, image_size=(4, 4))


class TestProject:
    def test_identity_perspective_divide(self):
        calib = make_identity_calib()
        pix = project_point(calib, (2.0, 1.0, 4.0))
        assert pix == PixelCoord(0.5, 0.25, 4.0)

    def test_principal_point(self):
        calib = make_focal700_calib()
        pix = project_point(calib, (0.0, 0.0, 10.0))
        assert pix == PixelCoord(600.0, 180.0, 10.0)

    def test_behind_camera(self):
        calib = make_identity_calib()
        assert project_point(calib, (0.0, 0.0, -1.0)) is None

    def test_scale_covariance(self):
        # Scaling the camera matrix leaves (u, v) unchanged and scales depth.
        base = make_focal700_calib()
        pts = np.array([[3.0, -2.0, 25.0], [0.5, 0.1, 2.0], [-4.0, 6.0, 60.0]])
        u0, v0, d0 = project(base, pts)
        for s in (0.5, 2.0, 10.0):
            scaled = CalibrationSet(base.cam_matrix * s, base.lidar_to_cam, base.image_size)
            u, v, d = project(scaled, pts)
            np.testing.assert_allclose(u, u0, rtol=1e-12)
            np.testing.assert_allclose(v, v0, rtol=1e-12)
            np.testing.assert_allclose(d, d0 * s, rtol=1e-12)


class TestBackProject:
    def test_identity_inverse(self):
        calib = make_identity_calib()
        np.testing.assert_allclose(back_project_point(calib, PixelCoord(0.5, 0.25, 4.0)), [2.0, 1.0, 4.0], atol=1e-12)

    def test_principal_point_inverse(self):
        calib = make_focal700_calib()
        np.testing.assert_allclose(back_project_point(calib, PixelCoord(600.0, 180.0, 10.0)), [0.0, 0.0, 10.0], atol=1e-12)

    def test_round_trip_random_points(self):
        # Points with camera depth in (0.5, 120) across all three rigs:
        # sample in the camera frame, map to LiDAR, then project back.
        rng = np.random.default_rng(11)
        for calib in (make_identity_calib(), make_focal700_calib(), make_kitti_calib()):
            n = 10_000
            cam_pts = np.stack(
                [rng.uniform(-50, 50, n), rng.uniform(-20, 20, n), rng.uniform(0.5, 120, n)], axis=1
            )
            tinv = np.linalg.inv(calib.lidar_to_cam)
            pts = cam_pts @ tinv[:3, :3].T + tinv[:3, 3]
            u, v, d = project(calib, pts)
            assert np.all(d > 0.4)
            recovered = back_project(calib, u, v, d)
            assert np.abs(recovered - pts).max() < 1e-6

    def test_rejects_nonpositive_depth(self):
        with pytest.raises(ValueError):
            back_project_point(make_identity_calib(), PixelCoord(0.0, 0.0, 0.0))


class TestSpherical:
    def test_unit_x_axis(self):
        assert to_spherical(np.array([1.0, 0.0, 0.0])) == (1.0, 0.0, 0.0)

    def test_3_4_5_triangle(self):
        r, az, el = to_spherical(np.array([0.0, 3.0, 4.0]))
        assert r == 5.0
        assert az == math.pi / 2
        # asin(0.8) via the independent right-triangle identity atan2(4, 3)
        assert el == pytest.approx(math.atan2(4.0, 3.0), abs=1e-15)
        assert el == pytest.approx(0.9272952180016122, abs=1e-12)

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        pts = rng.uniform(-100, 100, size=(5000, 3))
        pts = pts[np.linalg.norm(pts, axis=1) > 1e-6]
        r, az, el = to_spherical(pts)
        assert np.all(az > -math.pi) and np.all(az <= math.pi)
        assert np.all(np.abs(el) <= math.pi / 2)
        np.testing.assert_allclose(from_spherical(r, az, el), pts, atol=1e-9)

    def test_zero_radius(self):
        with pytest.raises(ZeroRadiusError):
            to_spherical(np.zeros(3))

    def test_azimuth_half_open_interval(self):
        # atan2 returns -pi for (-x, -0.0); the contract maps it to +pi.
        r, az, el = to_spherical(np.array([-1.0, -0.0, 0.0]))
        assert az == math.pi
