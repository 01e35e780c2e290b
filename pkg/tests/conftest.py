import numpy as np
import pytest

from lidarpaint import CalibrationSet, parse_calibration

IDENTITY_CALIB_TEXT = (
    "P2: 1 0 0 0 0 1 0 0 0 0 1 0\n"
    "R0_rect: 1 0 0 0 1 0 0 0 1\n"
    "Tr_velo_to_cam: 1 0 0 0 0 1 0 0 0 0 1 0\n"
)

# Real KITTI object-detection calibration values (frame 000000 style),
# including keys the parser must ignore.
KITTI_CALIB_TEXT = """\
P0: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 0.000000000000e+00 0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 0.000000000000e+00 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 0.000000000000e+00
P2: 7.215377000000e+02 0.000000000000e+00 6.095593000000e+02 4.485728000000e+01 0.000000000000e+00 7.215377000000e+02 1.728540000000e+02 2.163791000000e-01 0.000000000000e+00 0.000000000000e+00 1.000000000000e+00 2.745884000000e-03
R0_rect: 9.999239000000e-01 9.837760000000e-03 -7.445048000000e-03 -9.869795000000e-03 9.999421000000e-01 -4.278459000000e-03 7.402527000000e-03 4.351614000000e-03 9.999631000000e-01
Tr_velo_to_cam: 7.533745000000e-03 -9.999714000000e-01 -6.166020000000e-04 -4.069766000000e-03 1.480249000000e-02 7.280733000000e-04 -9.998902000000e-01 -7.631618000000e-02 9.998621000000e-01 7.523790000000e-03 1.480755000000e-02 -2.717806000000e-01
Tr_imu_to_velo: 9.999976000000e-01 7.553071000000e-04 -2.035826000000e-03 -8.086759000000e-01 -7.854027000000e-04 9.998898000000e-01 -1.482298000000e-02 3.195559000000e-01 2.024406000000e-03 1.482454000000e-02 9.998881000000e-01 -7.997231000000e-01
"""


def make_identity_calib(image_size=(100, 100)) -> CalibrationSet:
    return parse_calibration(IDENTITY_CALIB_TEXT, image_size=image_size)


def make_focal700_calib(image_size=(1216, 352)) -> CalibrationSet:
    cam = np.array([[700.0, 0.0, 600.0, 0.0], [0.0, 700.0, 180.0, 0.0], [0.0, 0.0, 1.0, 0.0]])
    return CalibrationSet(cam_matrix=cam, lidar_to_cam=np.eye(4), image_size=image_size)


def make_kitti_calib(image_size=(1216, 352)) -> CalibrationSet:
    return parse_calibration(KITTI_CALIB_TEXT, image_size=image_size)


@pytest.fixture
def identity_calib():
    return make_identity_calib()


@pytest.fixture
def focal700_calib():
    return make_focal700_calib()


@pytest.fixture
def kitti_calib():
    return make_kitti_calib()
