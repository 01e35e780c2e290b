"""Distance-binned statistics over clouds and boxes.

Objects are grouped by their proximity to the ego sensor into three
left-closed right-open bins: [0, 30), [30, 50) and [50, inf) meters. Boxes
bin by center range, points by their own range. Each (bin, class) cell
counts points attributed to that class (first containing box wins; class 0
collects points inside no box), boxes of the class, their interior points,
and — when a painted cloud is supplied — how many of the cell's points carry
a foreground argmax.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .dada import Box3D
from .painting import PaintedCloud

BIN_EDGES = (30.0, 50.0)
BINS = ((0.0, 30.0), (30.0, 50.0), (50.0, float("inf")))


@dataclass(frozen=True)
class ReportRow:
    bin_lo: float
    bin_hi: float
    class_id: int
    point_count: int
    box_count: int
    points_in_boxes: int
    mean_points_per_box: float
    foreground_points: Optional[int] = None
    foreground_fraction: Optional[float] = None


@dataclass(frozen=True)
class DistanceBinReport:
    classes: tuple[int, ...]
    rows: tuple[ReportRow, ...]

    @property
    def bins(self):
        return BINS

    def cell(self, bin_index: int, class_id: int) -> ReportRow:
        return self.rows[bin_index * len(self.classes) + self.classes.index(class_id)]

    def total_points(self) -> int:
        return sum(r.point_count for r in self.rows)


def _attribute_points(xyz: np.ndarray, boxes: list[Box3D], eps: float) -> np.ndarray:
    """Class id per point: first containing box in list order, else 0."""
    labels = np.zeros(xyz.shape[0], dtype=np.int64)
    unassigned = np.ones(xyz.shape[0], dtype=bool)
    for box in boxes:
        mask = box.contains(xyz, eps=eps) & unassigned
        labels[mask] = box.class_id
        unassigned &= ~mask
    return labels


def distance_report(
    cloud: np.ndarray,
    boxes: list[Box3D],
    painted: Optional[PaintedCloud] = None,
    eps: float = 5e-3,
) -> DistanceBinReport:
    """Aggregate per-bin per-class statistics.

    Args:
        cloud: (N, D) points; only xyz is used.
        boxes: ground-truth boxes, binned by center range.
        painted: optional painted cloud row-aligned with ``cloud``; enables
            the foreground counts (argmax class != background).
        eps: box-containment inflation, absorbing file-quantization wobble
            of points lying exactly on box surfaces.
    """
    cloud = np.asarray(cloud, dtype=np.float64)
    if cloud.ndim != 2:
        cloud = cloud.reshape(0, 4)
    if painted is not None and painted.data.shape[0] != cloud.shape[0]:
        raise ValueError("painted cloud must be row-aligned with the input cloud")

    n = cloud.shape[0]
    if n == 0 and not boxes:
        return DistanceBinReport(classes=(), rows=())

    classes = tuple(sorted({0} | {b.class_id for b in boxes}))
    xyz = cloud[:, :3]
    point_bin = np.digitize(np.linalg.norm(xyz, axis=1), BIN_EDGES) if n else np.zeros(0, np.int64)
    point_cls = _attribute_points(xyz, boxes, eps) if n else np.zeros(0, np.int64)
    fg = None
    if painted is not None and painted.class_dims:
        fg = np.argmax(painted.class_scores, axis=1) != 0

    box_bin = [int(np.digitize(b.range, BIN_EDGES)) for b in boxes]
    box_points = [int(np.count_nonzero(b.contains(xyz, eps=eps))) for b in boxes] if n else [0] * len(boxes)

    rows = []
    for bi in range(len(BINS)):
        for cid in classes:
            pmask = (point_bin == bi) & (point_cls == cid)
            nboxes = sum(1 for bb, b in zip(box_bin, boxes) if bb == bi and b.class_id == cid)
            in_boxes = sum(
                p for p, bb, b in zip(box_points, box_bin, boxes) if bb == bi and b.class_id == cid
            )
            row = ReportRow(
                bin_lo=BINS[bi][0],
                bin_hi=BINS[bi][1],
                class_id=cid,
                point_count=int(np.count_nonzero(pmask)),
                box_count=nboxes,
                points_in_boxes=in_boxes,
                mean_points_per_box=in_boxes / nboxes if nboxes else 0.0,
                foreground_points=int(np.count_nonzero(fg & pmask)) if fg is not None else None,
                foreground_fraction=(
                    float(np.count_nonzero(fg & pmask)) / max(int(np.count_nonzero(pmask)), 1)
                    if fg is not None
                    else None
                ),
            )
            rows.append(row)
    return DistanceBinReport(classes=classes, rows=tuple(rows))


def merge_reports(reports: list[DistanceBinReport]) -> DistanceBinReport:
    """Sum counts across frames; derived ratios are recomputed."""
    reports = [r for r in reports if r.rows]
    if not reports:
        return DistanceBinReport(classes=(), rows=())
    classes = tuple(sorted(set().union(*(r.classes for r in reports))))
    any_fg = any(row.foreground_points is not None for r in reports for row in r.rows)
    rows = []
    for bi in range(len(BINS)):
        for cid in classes:
            pc = bc = pib = fgp = 0
            for r in reports:
                if cid not in r.classes:
                    continue
                cell = r.cell(bi, cid)
                pc += cell.point_count
                bc += cell.box_count
                pib += cell.points_in_boxes
                if cell.foreground_points is not None:
                    fgp += cell.foreground_points
            rows.append(
                ReportRow(
                    bin_lo=BINS[bi][0],
                    bin_hi=BINS[bi][1],
                    class_id=cid,
                    point_count=pc,
                    box_count=bc,
                    points_in_boxes=pib,
                    mean_points_per_box=pib / bc if bc else 0.0,
                    foreground_points=fgp if any_fg else None,
                    foreground_fraction=(fgp / max(pc, 1)) if any_fg else None,
                )
            )
    return DistanceBinReport(classes=classes, rows=tuple(rows))


_CSV_FIELDS = [
    "bin_lo",
    "bin_hi",
    "class_id",
    "point_count",
    "box_count",
    "points_in_boxes",
    "mean_points_per_box",
    "foreground_points",
    "foreground_fraction",
]


def emit_report(report: DistanceBinReport, format: str = "text") -> bytes:
    """Serialize a report as ``text``, ``json`` or ``csv`` bytes.

    The JSON form is lossless: ``parse_report`` recovers an equal record.
    """
    if format == "json":
        payload = {"classes": list(report.classes), "rows": [asdict(r) for r in report.rows]}
        return (json.dumps(payload, indent=2) + "\n").encode()
    if format == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_CSV_FIELDS)
        for r in report.rows:
            writer.writerow(
                [
                    repr(r.bin_lo),
                    repr(r.bin_hi),
                    r.class_id,
                    r.point_count,
                    r.box_count,
                    r.points_in_boxes,
                    repr(r.mean_points_per_box),
                    "" if r.foreground_points is None else r.foreground_points,
                    "" if r.foreground_fraction is None else repr(r.foreground_fraction),
                ]
            )
        return buf.getvalue().encode()
    if format == "text":
        lines = [
            f"{'bin':>12} {'class':>5} {'points':>10} {'boxes':>6} {'pts/box':>10} {'fg-frac':>8}"
        ]
        for r in report.rows:
            hi = "inf" if r.bin_hi == float("inf") else f"{r.bin_hi:g}"
            fgf = "-" if r.foreground_fraction is None else f"{r.foreground_fraction:.4f}"
            lines.append(
                f"{f'[{r.bin_lo:g},{hi})':>12} {r.class_id:>5} {r.point_count:>10} "
                f"{r.box_count:>6} {r.mean_points_per_box:>10.2f} {fgf:>8}"
            )
        if not report.rows:
            lines.append("(empty)")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown report format {format!r}")


def parse_report(blob: bytes) -> DistanceBinReport:
    """Inverse of emit_report(..., 'json')."""
    payload = json.loads(blob.decode())
    rows = tuple(ReportRow(**r) for r in payload["rows"])
    return DistanceBinReport(classes=tuple(payload["classes"]), rows=rows)
