/**
 * The three binding calls: painting, virtual-point generation and the
 * distance-aware augmentation round trip. Each marshals its arrays into the
 * core toolkit's wire formats, drives the CLI over a scratch dataset, and
 * decodes the result into freshly-owned ArrayViews.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { ArrayView } from "./arrayview";
import { runCli, withScratchDir } from "./cli";
import { BindingError } from "./errors";
import {
  Calibration,
  calibrationText,
  decodeBin,
  decodePainted,
  encodeBin,
  encodeDepthPng,
  encodeScoreTensor,
} from "./formats";
import { Box3D, formatLabels, parseLabels } from "./labels";

export interface ScoreTensor {
  /** Flattened H*W*C scores, row-major, channel-fastest. */
  scores: Float32Array;
  height: number;
  width: number;
  channels: number;
}

/** The synthetic rig the core toolkit uses: camera 0.1 m above the sensor
 * looking along +x, KITTI-flavored intrinsics for a 1216x352 image. */
export const STANDARD_RIG: Calibration = {
  camMatrix: [721.5377, 0, 609.5593, 44.85728, 0, 721.5377, 172.854, 0.2163791, 0, 0, 1, 0.002745884],
  lidarToCam: [0, -1, 0, 0, 0, 0, -1, 0.1, 1, 0, 0, 0, 0, 0, 0, 1],
};

function writeFrame(dir: string, sub: string, name: string, data: Buffer | string): void {
  mkdirSync(join(dir, sub), { recursive: true });
  writeFileSync(join(dir, sub, name), data);
}

/**
 * Append per-pixel class scores to every point.
 *
 * Points cross the boundary via the KITTI .bin wire format, so they must be
 * N x 4 (x, y, z, intensity). Returns a fresh N x (4 + C) view, bit-identical
 * to the core library's painting of the same inputs.
 */
export function bindPaint(points: ArrayView, scores: ScoreTensor, calib: Calibration): ArrayView {
  if (points.cols !== 4) {
    throw new BindingError("bad-shape", "bind-paint", `points must be N x 4, got N x ${points.cols}`);
  }
  if (scores.scores.length !== scores.height * scores.width * scores.channels) {
    throw new BindingError("bad-shape", "bind-paint", "score tensor shape does not cover its buffer");
  }
  return withScratchDir("bind-paint", (dir) => {
    const root = join(dir, "ds");
    writeFrame(root, "velodyne", "000000.bin", encodeBin(points));
    writeFrame(root, "calib", "000000.txt", calibrationText(calib));
    writeFrame(
      root,
      "scores",
      "000000.vptn",
      encodeScoreTensor(scores.scores, scores.height, scores.width, scores.channels),
    );
    const out = join(dir, "out");
    runCli("bind-paint", [
      "virtualpaint", "--root", root, "--out", out, "--no-virtual",
      "--image-width", String(scores.width), "--image-height", String(scores.height),
    ]);
    const painted = decodePainted(readFileSync(join(out, "000000.vppc")));
    return painted.data;
  });
}

/**
 * Back-project a dense depth map into virtual points (M x 4).
 *
 * The depth map crosses the boundary as a 16-bit PNG, quantizing depths to
 * 1/256 m exactly as the file-based pipeline does.
 */
export function bindVirtualPoints(
  depth: ArrayView,
  calib: Calibration,
  stride: number,
  maxRange: number,
): ArrayView {
  return withScratchDir("bind-virtual-points", (dir) => {
    const root = join(dir, "ds");
    writeFrame(root, "velodyne", "000000.bin", Buffer.alloc(0)); // no raw points
    writeFrame(root, "calib", "000000.txt", calibrationText(calib));
    writeFrame(root, "depth_dense", "000000.png", encodeDepthPng(depth));
    const out = join(dir, "out");
    runCli("bind-virtual-points", [
      "virtualpaint", "--root", root, "--out", out, "--no-paint",
      "--stride", String(stride), "--max-range", String(maxRange),
      "--image-width", String(depth.cols), "--image-height", String(depth.rows),
    ]);
    const painted = decodePainted(readFileSync(join(out, "000000.vppc")));
    return painted.data;
  });
}

export interface DadaOptions {
  seed?: number;
  maxInsert?: number;
  nearThreshold?: number;
  minPoints?: number;
  offsetMin?: number;
  offsetMax?: number;
  mergeThreshold?: number;
  azResDeg?: number;
  elResDeg?: number;
  occlusionMin?: number;
  occlusionMax?: number;
  calib?: Calibration;
}

export interface DadaResult {
  points: ArrayView;
  boxes: Box3D[];
}

/**
 * Distance-aware augmentation round trip on one scene.
 *
 * The scene's own near, dense boxes serve as the donor pool (dada-build),
 * then processed donors are pasted back in (dada-apply); both steps run the
 * CLI, so the result is identical to composing those commands by hand.
 * Fully determined by `seed`.
 */
export function bindDada(points: ArrayView, boxes: Box3D[], options: DadaOptions = {}): DadaResult {
  if (points.cols !== 4) {
    throw new BindingError("bad-shape", "bind-dada", `points must be N x 4, got N x ${points.cols}`);
  }
  const calib = options.calib ?? STANDARD_RIG;
  return withScratchDir("bind-dada", (dir) => {
    const root = join(dir, "ds");
    writeFrame(root, "velodyne", "000000.bin", encodeBin(points));
    writeFrame(root, "calib", "000000.txt", calibrationText(calib));
    writeFrame(root, "label_2", "000000.txt", formatLabels(boxes, calib));
    const db = join(dir, "db");
    const buildArgs = ["dada-build", "--root", root, "--out", db, "--source", "raw"];
    if (options.nearThreshold !== undefined) buildArgs.push("--near-threshold", String(options.nearThreshold));
    if (options.minPoints !== undefined) buildArgs.push("--min-points", String(options.minPoints));
    runCli("bind-dada-build", buildArgs);

    const out = join(dir, "out");
    const applyArgs = [
      "dada-apply", "--root", root, "--out", out, "--donors", db, "--source", "raw",
      "--seed", String(options.seed ?? 0), "--max-insert", String(options.maxInsert ?? 4),
    ];
    const flag = (name: string, value: number | undefined) => {
      if (value !== undefined) applyArgs.push(name, String(value));
    };
    flag("--offset-min", options.offsetMin);
    flag("--offset-max", options.offsetMax);
    flag("--merge-threshold", options.mergeThreshold);
    flag("--az-res-deg", options.azResDeg);
    flag("--el-res-deg", options.elResDeg);
    flag("--occlusion-min", options.occlusionMin);
    flag("--occlusion-max", options.occlusionMax);
    runCli("bind-dada-apply", applyArgs);

    const cloud = decodeBin(readFileSync(join(out, "velodyne", "000000.bin")));
    const outBoxes = parseLabels(readFileSync(join(out, "label_2", "000000.txt"), "utf-8"), calib);
    // decoded views alias the read buffer; hand the caller owned memory
    return { points: new ArrayView(cloud.data.slice(), cloud.rows, cloud.cols), boxes: outBoxes };
  });
}
