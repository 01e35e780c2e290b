"""Batch pipelines over KITTI-layout dataset directories.

The canonical layout below the dataset root is ``velodyne/`` (.bin clouds),
``calib/`` (text calibrations), ``label_2/`` (KITTI labels), ``image_2/``
(camera frames, optional), plus ``depth_dense/`` (completed depth PNGs),
``scores/`` (VPTN tensors) and ``painted/`` (VPPC outputs).

Frames are independent: each one derives its random streams from the global
seed plus its own frame id, so outputs are byte-identical no matter how many
workers run or in which order frames complete. All outputs are written via
temp-file + rename.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from functools import partial
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as lio
from .dada import BoxSample, DadaConfig, dada_pipeline, extract_box_samples, gt_aug_insert
from .depthmap import fuse, sparsify, virtual_points_from_depth
from .errors import LidarPaintError, MissingInputError
from .geometry import CalibrationSet, parse_calibration
from .painting import PaintedCloud, ScoreMap, paint, paint_stats
from .report import distance_report, emit_report, merge_reports
from .rng import fold_stream, make_rng

log = logging.getLogger("lidarpaint")

REPORT_EXT = {"text": "txt", "json": "json", "csv": "csv"}


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline stage needs; plain data so workers can pickle it."""

    root: str
    out: str
    frames: tuple[str, ...] = ()
    workers: int = 1
    seed: int = 0
    # virtual points / painting
    stride: int = 4
    max_range: float = 80.0
    image_width: int = 1216
    image_height: int = 352
    virtual: bool = True
    paint: bool = True
    # directory names under root
    depth_dir: str = "depth_dense"
    scores_dir: str = "scores"
    painted_dir: str = "painted"
    # dada
    source: str = "painted"  # raw | painted
    near_threshold: float = 25.0
    min_points: int = 50
    max_insert: int = 10
    balance_classes: bool = False
    donor_classes: tuple[int, ...] = ()
    offset_min: float = 10.0
    offset_max: float = 40.0
    merge_threshold: float = 0.05
    az_res_deg: float = 0.2
    el_res_deg: float = 0.4
    occlusion_min: float = 0.1
    occlusion_max: float = 0.4
    donors: str = ""  # donor database directory
    # reporting
    report_format: str = "csv"
    figure: bool = True
    timings: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"worker count must be >= 1, got {self.workers}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if not Path(self.root).exists():
            raise MissingInputError(f"dataset root does not exist: {self.root}")
        if self.report_format not in REPORT_EXT:
            raise ValueError(f"unknown report format {self.report_format!r}")

    def dada_config(self, frame: str) -> DadaConfig:
        """Per-frame augmentation config; the seed mixes in the frame id."""
        return DadaConfig(
            offset_range=(self.offset_min, self.offset_max),
            merge_threshold=self.merge_threshold,
            az_res=math.radians(self.az_res_deg),
            el_res=math.radians(self.el_res_deg),
            occlusion_range=(self.occlusion_min, self.occlusion_max),
            seed=fold_stream(self.seed, "dada-frame", frame),
        )


def parse_config_file(path) -> dict[str, str]:
    """Flat ``key=value`` config text; '#' starts a comment."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line (expected key=value): {raw!r}")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    return values


# ---------------------------------------------------------------------------
# Per-frame input plumbing

def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise MissingInputError(f"{what} not found: {path}")
    return path


def frame_image_size(cfg: PipelineConfig, frame: str) -> tuple[int, int]:
    img = Path(cfg.root) / "image_2" / f"{frame}.png"
    if img.exists():
        from PIL import Image

        with Image.open(img) as im:
            return im.size
    return (cfg.image_width, cfg.image_height)


def load_frame_calib(cfg: PipelineConfig, frame: str) -> CalibrationSet:
    path = _require(Path(cfg.root) / "calib" / f"{frame}.txt", "calibration")
    return parse_calibration(path.read_text(), image_size=frame_image_size(cfg, frame))


def discover_frames(cfg: PipelineConfig) -> tuple[str, ...]:
    """Frame ids present under the root, from velodyne/ or painted/."""
    vel = Path(cfg.root) / "velodyne"
    if vel.is_dir():
        return tuple(sorted(p.stem for p in vel.glob("*.bin")))
    painted = Path(cfg.root) / cfg.painted_dir
    if painted.is_dir():
        return tuple(sorted(p.stem for p in painted.glob("*.vppc")))
    raise MissingInputError(f"no velodyne/ or {cfg.painted_dir}/ directory under {cfg.root}")


# ---------------------------------------------------------------------------
# Stages (module-level so process pools can pickle them)

def stage_sparsify(frame: str, cfg: PipelineConfig) -> dict:
    cloud = lio.read_bin(_require(Path(cfg.root) / "velodyne" / f"{frame}.bin", "cloud"))
    calib = load_frame_calib(cfg, frame)
    depth = sparsify(cloud, calib)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lio.write_depth_png(out / f"{frame}.png", depth)
    return {
        "frame": frame,
        "points": int(cloud.shape[0]),
        "valid_pixels": int(np.count_nonzero(depth.values > 0)),
        "valid_fraction": depth.valid_fraction,
    }


def stage_virtualpaint(frame: str, cfg: PipelineConfig) -> dict:
    root = Path(cfg.root)
    raw = lio.read_bin(_require(root / "velodyne" / f"{frame}.bin", "cloud"))
    calib = load_frame_calib(cfg, frame)
    if cfg.virtual:
        dense = lio.read_depth_png(_require(root / cfg.depth_dir / f"{frame}.png", "dense depth"))
        virtual = virtual_points_from_depth(dense, calib, stride=cfg.stride, max_range=cfg.max_range)
    else:
        virtual = np.empty((0, raw.shape[1]))
    augmented, provenance = fuse(raw, virtual)
    entry = {
        "frame": frame,
        "n_raw": int(raw.shape[0]),
        "n_virtual": int(virtual.shape[0]),
    }
    if cfg.paint:
        scores = ScoreMap(lio.read_score_map(_require(root / cfg.scores_dir / f"{frame}.vptn", "score tensor")))
        painted = paint(augmented, scores, calib, provenance)
        stats = paint_stats(painted)
        entry["background_fraction"] = stats.background_fraction
        entry["foreground_raw"] = stats.foreground_raw
        entry["foreground_virtual"] = stats.foreground_virtual
    else:
        painted = PaintedCloud(augmented, base_dims=augmented.shape[1], provenance=provenance)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lio.write_painted(out / f"{frame}.vppc", painted)
    entry["n_out"] = int(painted.data.shape[0])
    entry["dims"] = int(painted.data.shape[1])
    return entry


def _load_scene(cfg: PipelineConfig, frame: str):
    """Scene rows + provenance + base dims for the configured source."""
    root = Path(cfg.root)
    if cfg.source == "raw":
        cloud = lio.read_bin(_require(root / "velodyne" / f"{frame}.bin", "cloud"))
        return cloud, np.zeros(cloud.shape[0], dtype=np.uint8), cloud.shape[1]
    if cfg.source == "painted":
        painted = lio.read_painted(_require(root / cfg.painted_dir / f"{frame}.vppc", "painted cloud"))
        return painted.data, painted.provenance, painted.base_dims
    raise ValueError(f"unknown source {cfg.source!r} (expected raw or painted)")


def stage_dada_build(frame: str, cfg: PipelineConfig) -> list[lio.DonorRecord]:
    """Collect admissible donors of one frame: near, well-observed boxes."""
    data, provenance, base_dims = _load_scene(cfg, frame)
    calib = load_frame_calib(cfg, frame)
    boxes = lio.read_labels(_require(Path(cfg.root) / "label_2" / f"{frame}.txt", "labels"), calib)
    stacked = np.concatenate([data, provenance[:, None].astype(np.float64)], axis=1)
    records = []
    for sample in extract_box_samples(stacked, boxes):
        if sample.box.range >= cfg.near_threshold or sample.num_points < cfg.min_points:
            continue
        donor_id = f"{frame}_{len(records):03d}"
        records.append(
            lio.DonorRecord(
                donor_id=donor_id,
                frame=frame,
                sample=BoxSample(sample.box, sample.points[:, :-1], validate=False),
                base_dims=base_dims,
                provenance=sample.points[:, -1].astype(np.uint8),
            )
        )
    return records


def _round_robin_by_class(donors: list[lio.DonorRecord], rng) -> list[int]:
    """Interleave classes, each class pre-shuffled, for balanced insertion."""
    by_class: dict[int, list[int]] = {}
    for i, rec in enumerate(donors):
        by_class.setdefault(rec.sample.box.class_id, []).append(i)
    queues = [list(np.asarray(v)[rng.permutation(len(v))]) for _, v in sorted(by_class.items())]
    order = []
    while any(queues):
        for q in queues:
            if q:
                order.append(int(q.pop(0)))
    return order


def stage_dada_apply(frame: str, cfg: PipelineConfig, donors: list[lio.DonorRecord]) -> dict:
    scene, scene_prov, base_dims = _load_scene(cfg, frame)
    calib = load_frame_calib(cfg, frame)
    boxes = lio.read_labels(_require(Path(cfg.root) / "label_2" / f"{frame}.txt", "labels"), calib)

    if cfg.donor_classes:
        donors = [d for d in donors if d.sample.box.class_id in cfg.donor_classes]
    donors = [d for d in donors if d.sample.points.shape[1] == scene.shape[1]]

    # Provenance travels as a trailing column through offset/resample/
    # occlusion; merged clusters become virtual when the majority was.
    candidates = [
        BoxSample(
            d.sample.box,
            np.concatenate([d.sample.points, d.provenance[:, None].astype(np.float64)], axis=1),
            validate=False,
        )
        for d in donors
    ]
    processed = dada_pipeline(candidates, cfg.dada_config(frame))
    processed = [
        BoxSample(
            s.box,
            np.concatenate([s.points[:, :-1], (s.points[:, -1:] >= 0.5).astype(np.float64)], axis=1),
            validate=False,
        )
        for s in processed
        if s.num_points > 0
    ]

    rng = make_rng(cfg.seed, "gt-aug", frame)
    order = _round_robin_by_class(donors, rng) if cfg.balance_classes else None
    stacked_scene = np.concatenate([scene, scene_prov[:, None].astype(np.float64)], axis=1)
    cloud, out_boxes = gt_aug_insert(
        stacked_scene, boxes, processed, max_insert=cfg.max_insert, rng=rng, order=order
    )

    out = Path(cfg.out)
    (out / "label_2").mkdir(parents=True, exist_ok=True)
    lio.write_labels(out / "label_2" / f"{frame}.txt", out_boxes, calib)
    data, prov = cloud[:, :-1], cloud[:, -1].astype(np.uint8)
    if cfg.source == "raw":
        (out / "velodyne").mkdir(parents=True, exist_ok=True)
        lio.write_bin(out / "velodyne" / f"{frame}.bin", data)
    else:
        (out / cfg.painted_dir).mkdir(parents=True, exist_ok=True)
        lio.write_painted(
            out / cfg.painted_dir / f"{frame}.vppc",
            PaintedCloud(data, base_dims=base_dims, provenance=prov),
        )
    return {
        "frame": frame,
        "n_in": int(scene.shape[0]),
        "n_out": int(cloud.shape[0]),
        "boxes_in": len(boxes),
        "boxes_out": len(out_boxes),
        "inserted": len(out_boxes) - len(boxes),
    }


def stage_report(frame: str, cfg: PipelineConfig) -> dict:
    data, _prov, _base = _load_scene(cfg, frame)
    calib = load_frame_calib(cfg, frame)
    boxes = lio.read_labels(_require(Path(cfg.root) / "label_2" / f"{frame}.txt", "labels"), calib)
    painted = None
    if cfg.source == "painted":
        painted_path = Path(cfg.root) / cfg.painted_dir / f"{frame}.vppc"
        painted = lio.read_painted(painted_path)
    rep = distance_report(data, boxes, painted)
    ext = REPORT_EXT[cfg.report_format]
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lio.atomic_write_bytes(out / f"{frame}.{ext}", emit_report(rep, cfg.report_format))
    return {"frame": frame, "report": rep}


# ---------------------------------------------------------------------------
# Runner

def run_frames(frames, task, workers: int):
    """Run ``task(frame)`` over all frames, single- or multi-process.

    Returns [(frame, ("ok", result) | ("error", message))] in frame order
    regardless of completion order.
    """
    outcomes = {}
    if workers <= 1:
        for f in frames:
            try:
                outcomes[f] = ("ok", task(f))
            except (LidarPaintError, OSError, ValueError) as exc:
                log.error("frame %s failed: %s", f, exc)
                outcomes[f] = ("error", f"{type(exc).__name__}: {exc}")
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(task, f): f for f in frames}
            for fut in as_completed(futures):
                f = futures[fut]
                try:
                    outcomes[f] = ("ok", fut.result())
                except (LidarPaintError, OSError, ValueError) as exc:
                    log.error("frame %s failed: %s", f, exc)
                    outcomes[f] = ("error", f"{type(exc).__name__}: {exc}")
    return [(f, outcomes[f]) for f in frames]


def write_manifest(cfg: PipelineConfig, command: str, results, started: float) -> bool:
    """Write out/manifest.json; returns True when every frame succeeded.

    Wall-clock timings are recorded only with ``timings=True`` so default
    manifests are byte-reproducible.
    """
    entries = []
    ok = True
    for frame, (status, payload) in results:
        if status == "ok":
            entry = dict(payload) if isinstance(payload, dict) else {"frame": frame}
            entry.pop("report", None)
            entry["status"] = "ok"
        else:
            entry = {"frame": frame, "status": "error", "error": payload}
            ok = False
        entries.append(entry)
    manifest = {"command": command, "seed": cfg.seed, "frames": entries}
    if cfg.timings:
        manifest["elapsed_s"] = time.time() - started
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    lio.atomic_write_bytes(out / "manifest.json", (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())
    return ok


def build_synth_dataset(
    out,
    count: int,
    seed: int = 0,
    spec_json: Optional[str] = None,
    rasters: bool = True,
    num_classes: int = 4,
) -> tuple[str, ...]:
    """Write a complete KITTI-layout synthetic dataset.

    Produces velodyne/, calib/, label_2/ and, with ``rasters=True``, the
    depth_dense/ and scores/ directories a completion/segmentation network
    would have produced, so every pipeline command can run on the result.
    With the default scene builder each frame gets its own jittered layout;
    an explicit scene spec fixes the layout and varies only the intensity
    stream.
    """
    from .geometry import calibration_text
    from .synth import (
        default_scene_spec,
        generate_scan,
        kitti_like_matrices,
        render_frame_rasters,
        scene_spec_from_json,
    )

    out = Path(out)
    for sub in ("velodyne", "calib", "label_2", "depth_dense", "scores"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    calib_text = calibration_text(*kitti_like_matrices())
    frames = []
    for i in range(count):
        frame = f"{i:06d}"
        frame_seed = fold_stream(seed, "synth-frame", frame)
        if spec_json is not None:
            spec = replace(scene_spec_from_json(spec_json), seed=frame_seed)
        else:
            spec = default_scene_spec(frame_seed)
        cloud, boxes, calib = generate_scan(spec)
        lio.write_bin(out / "velodyne" / f"{frame}.bin", cloud)
        lio.atomic_write_bytes(out / "calib" / f"{frame}.txt", calib_text.encode())
        lio.write_labels(out / "label_2" / f"{frame}.txt", boxes, calib)
        if rasters:
            depth, scores = render_frame_rasters(spec, calib, num_classes=num_classes)
            lio.write_depth_png(out / "depth_dense" / f"{frame}.png", depth)
            lio.write_score_map(out / "scores" / f"{frame}.vptn", scores.scores)
        frames.append(frame)
    return tuple(frames)


# ---------------------------------------------------------------------------
# Command drivers (shared by the CLI and in-process callers)

def cmd_sparsify(cfg: PipelineConfig) -> bool:
    started = time.time()
    results = run_frames(cfg.frames, partial(stage_sparsify, cfg=cfg), cfg.workers)
    return write_manifest(cfg, "sparsify", results, started)


def cmd_virtualpaint(cfg: PipelineConfig) -> bool:
    started = time.time()
    results = run_frames(cfg.frames, partial(stage_virtualpaint, cfg=cfg), cfg.workers)
    return write_manifest(cfg, "virtualpaint", results, started)


def cmd_dada_build(cfg: PipelineConfig) -> bool:
    started = time.time()
    results = run_frames(cfg.frames, partial(stage_dada_build, cfg=cfg), cfg.workers)
    records = []
    for _frame, (status, payload) in results:
        if status == "ok":
            records.extend(payload)
    lio.save_donor_db(cfg.out, records)
    summary = [
        (f, (s, {"frame": f, "donors": len(p)} if s == "ok" else p)) for f, (s, p) in results
    ]
    return write_manifest(cfg, "dada-build", summary, started)


def cmd_dada_apply(cfg: PipelineConfig) -> bool:
    started = time.time()
    donors = lio.load_donor_db(cfg.donors)
    results = run_frames(cfg.frames, partial(stage_dada_apply, cfg=cfg, donors=donors), cfg.workers)
    return write_manifest(cfg, "dada-apply", results, started)


def cmd_report(cfg: PipelineConfig) -> bool:
    started = time.time()
    results = run_frames(cfg.frames, partial(stage_report, cfg=cfg), cfg.workers)
    reports = [p["report"] for _f, (s, p) in results if s == "ok"]
    merged = merge_reports(reports)
    ext = REPORT_EXT[cfg.report_format]
    lio.atomic_write_bytes(Path(cfg.out) / f"report.{ext}", emit_report(merged, cfg.report_format))
    if cfg.figure:
        from .figures import render_report_figure

        render_report_figure(merged, Path(cfg.out) / "report.png")
    summary = [
        (
            f,
            (s, {"frame": f, "points": p["report"].total_points()} if s == "ok" else p),
        )
        for f, (s, p) in results
    ]
    return write_manifest(cfg, "report", summary, started)
