"""LiDAR point-cloud densification and semantic painting toolkit.

Generates virtual points from completed depth maps, fuses them with raw
scans, paints the result with per-pixel class scores, and manufactures
sparse/occluded training samples via distance-aware augmentation.
"""

from .dada import (
    Box3D,
    BoxSample,
    DadaConfig,
    SphericalVoxelGrid,
    apply_distance_offset,
    dada_pipeline,
    extract_box_samples,
    gt_aug_insert,
    simulate_occlusion,
    spherical_resample,
)
from .depthmap import (
    DEPTH_MAX,
    PROV_RAW,
    PROV_VIRTUAL,
    DepthMap,
    FrameBundle,
    fuse,
    split_by_provenance,
    sparsify,
    virtual_points_from_depth,
)
from .errors import (
    DimensionMismatchError,
    FileFormatError,
    LayoutMismatchError,
    LidarPaintError,
    MalformedNumberError,
    MissingInputError,
    MissingKeyError,
    SingularIntrinsicsError,
    ZeroRadiusError,
)
from .geometry import (
    BEHIND_EPS,
    CalibrationSet,
    PixelCoord,
    back_project,
    back_project_point,
    calibration_text,
    from_spherical,
    parse_calibration,
    project,
    project_point,
    to_spherical,
)
from .io import VPPC_MAGIC, VPTN_MAGIC
from .painting import PaintedCloud, PaintStats, ScoreMap, paint, paint_stats
from .report import DistanceBinReport, ReportRow, distance_report, emit_report, merge_reports, parse_report
from .rng import fnv1a64, fold_stream, make_rng
from .synth import (
    SynthSceneSpec,
    default_scene_spec,
    generate_scan,
    kitti_like_calibration,
    render_frame_rasters,
    sample_box_surface,
)

__version__ = "0.1.0"
