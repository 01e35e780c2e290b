/**
 * KITTI label text: 3D boxes stored bottom-centered in the camera frame.
 * Conversion to/from LiDAR-frame boxes mirrors the core toolkit so label
 * files written here are valid inputs for its dada commands.
 */

import { BindingError } from "./errors";
import { Calibration } from "./formats";

export interface Box3D {
  center: [number, number, number]; // LiDAR frame, geometric center
  size: [number, number, number]; // length, width, height
  yaw: number; // about +z
  classId: number;
}

const ID_TO_CLASS: Record<number, string> = { 1: "Car", 2: "Pedestrian", 3: "Cyclist" };
const CLASS_TO_ID: Record<string, number> = { Car: 1, Pedestrian: 2, Cyclist: 3 };

function mat4Invert(m: number[]): number[] {
  // Gauss-Jordan on [m | I]; fine for well-conditioned rigid transforms.
  const a = [0, 1, 2, 3].map((r) => [
    m[r * 4], m[r * 4 + 1], m[r * 4 + 2], m[r * 4 + 3],
    r === 0 ? 1 : 0, r === 1 ? 1 : 0, r === 2 ? 1 : 0, r === 3 ? 1 : 0,
  ]);
  for (let col = 0; col < 4; col++) {
    let pivot = col;
    for (let r = col + 1; r < 4; r++) {
      if (Math.abs(a[r][col]) > Math.abs(a[pivot][col])) pivot = r;
    }
    if (Math.abs(a[pivot][col]) < 1e-12) {
      throw new BindingError("singular", "labels", "lidarToCam is not invertible");
    }
    [a[col], a[pivot]] = [a[pivot], a[col]];
    const div = a[col][col];
    for (let c = 0; c < 8; c++) a[col][c] /= div;
    for (let r = 0; r < 4; r++) {
      if (r === col) continue;
      const factor = a[r][col];
      for (let c = 0; c < 8; c++) a[r][c] -= factor * a[col][c];
    }
  }
  return a.flatMap((row) => row.slice(4));
}

function apply4(m: number[], v: [number, number, number, number]): [number, number, number, number] {
  const out: [number, number, number, number] = [0, 0, 0, 0];
  for (let r = 0; r < 4; r++) {
    out[r] = m[r * 4] * v[0] + m[r * 4 + 1] * v[1] + m[r * 4 + 2] * v[2] + m[r * 4 + 3] * v[3];
  }
  return out;
}

export function formatLabels(boxes: Box3D[], calib: Calibration): string {
  const t = calib.lidarToCam;
  const lines = boxes.map((box) => {
    const name = ID_TO_CLASS[box.classId] ?? "Misc";
    const [l, w, h] = box.size;
    const bottom: [number, number, number, number] = [
      box.center[0],
      box.center[1],
      box.center[2] - h / 2,
      1,
    ];
    const cam = apply4(t, bottom);
    const dir = apply4(t, [Math.cos(box.yaw), Math.sin(box.yaw), 0, 0]);
    const ry = Math.atan2(-dir[2], dir[0]);
    const alpha = ry - Math.atan2(cam[0], cam[2]);
    const f = (v: number) => v.toFixed(6);
    return (
      `${name} 0.00 0 ${f(alpha)} 0.00 0.00 0.00 0.00 ` +
      `${f(h)} ${f(w)} ${f(l)} ${f(cam[0])} ${f(cam[1])} ${f(cam[2])} ${f(ry)}`
    );
  });
  return lines.length ? lines.join("\n") + "\n" : "";
}

export function parseLabels(text: string, calib: Calibration): Box3D[] {
  const inv = mat4Invert(calib.lidarToCam);
  const boxes: Box3D[] = [];
  for (const line of text.split("\n")) {
    const fields = line.trim().split(/\s+/);
    if (fields.length < 15 || !(fields[0] in CLASS_TO_ID)) continue;
    const [h, w, l] = fields.slice(8, 11).map(Number);
    const [x, y, z] = fields.slice(11, 14).map(Number);
    const ry = Number(fields[14]);
    const bottom = apply4(inv, [x, y, z, 1]);
    const dir = apply4(inv, [Math.cos(ry), 0, -Math.sin(ry), 0]);
    boxes.push({
      center: [bottom[0], bottom[1], bottom[2] + h / 2],
      size: [l, w, h],
      yaw: Math.atan2(dir[1], dir[0]),
      classId: CLASS_TO_ID[fields[0]],
    });
  }
  return boxes;
}
