/**
 * Wire formats shared with the core toolkit: KITTI .bin clouds, VPTN score
 * tensors, VPPC painted clouds, 16-bit depth PNGs and calibration text.
 * All multi-byte integers and floats are little-endian except inside PNG,
 * whose spec mandates big-endian.
 */

import { deflateSync } from "node:zlib";

import { ArrayView } from "./arrayview";
import { BindingError } from "./errors";

export const VPTN_MAGIC = "VPTN";
export const VPPC_MAGIC = "VPPC";
export const DEPTH_SCALE = 256; // png pixel = depth_m * 256

// ---------------------------------------------------------------------------
// KITTI .bin point clouds (float32 x, y, z, intensity records)

export function encodeBin(points: ArrayView): Buffer {
  if (points.cols !== 4) {
    throw new BindingError("bad-shape", "encode-bin", `expected 4 columns, got ${points.cols}`);
  }
  return Buffer.from(points.asBuffer()); // own copy; caller keeps the view
}

export function decodeBin(buf: Buffer): ArrayView {
  if (buf.length % 16 !== 0) {
    throw new BindingError("bad-format", "decode-bin", `length ${buf.length} not a multiple of 16`);
  }
  return ArrayView.fromBuffer(buf, buf.length / 16, 4);
}

// ---------------------------------------------------------------------------
// VPTN score tensors (magic, u32 h/w/c, float32 data channel-fastest)

export function encodeScoreTensor(scores: Float32Array, height: number, width: number, channels: number): Buffer {
  if (scores.length !== height * width * channels) {
    throw new BindingError(
      "bad-shape",
      "encode-vptn",
      `h*w*c = ${height * width * channels} != buffer length ${scores.length}`,
    );
  }
  const header = Buffer.alloc(16);
  header.write(VPTN_MAGIC, 0, "ascii");
  header.writeUInt32LE(height, 4);
  header.writeUInt32LE(width, 8);
  header.writeUInt32LE(channels, 12);
  return Buffer.concat([header, Buffer.from(scores.buffer, scores.byteOffset, scores.byteLength)]);
}

export function decodeScoreTensor(buf: Buffer): { scores: Float32Array; height: number; width: number; channels: number } {
  if (buf.subarray(0, 4).toString("ascii") !== VPTN_MAGIC) {
    throw new BindingError("bad-magic", "decode-vptn", "missing VPTN magic");
  }
  const height = buf.readUInt32LE(4);
  const width = buf.readUInt32LE(8);
  const channels = buf.readUInt32LE(12);
  const expected = 16 + height * width * channels * 4;
  if (buf.length !== expected) {
    throw new BindingError("bad-format", "decode-vptn", `size ${buf.length} != expected ${expected}`);
  }
  return { scores: ArrayView.fromBuffer(buf, height * width * channels, 1, 16).data, height, width, channels };
}

// ---------------------------------------------------------------------------
// VPPC painted clouds (magic, u32 n/total/base, float32 rows, provenance bytes)

export interface PaintedCloud {
  data: ArrayView; // n x total
  baseDims: number;
  provenance: Uint8Array;
}

export function encodePainted(cloud: PaintedCloud): Buffer {
  const { data, baseDims, provenance } = cloud;
  if (provenance.length !== data.rows) {
    throw new BindingError("bad-shape", "encode-vppc", "provenance length must match row count");
  }
  const header = Buffer.alloc(16);
  header.write(VPPC_MAGIC, 0, "ascii");
  header.writeUInt32LE(data.rows, 4);
  header.writeUInt32LE(data.cols, 8);
  header.writeUInt32LE(baseDims, 12);
  return Buffer.concat([header, Buffer.from(data.asBuffer()), Buffer.from(provenance)]);
}

export function decodePainted(buf: Buffer): PaintedCloud {
  if (buf.subarray(0, 4).toString("ascii") !== VPPC_MAGIC) {
    throw new BindingError("bad-magic", "decode-vppc", "missing VPPC magic");
  }
  const n = buf.readUInt32LE(4);
  const total = buf.readUInt32LE(8);
  const base = buf.readUInt32LE(12);
  const expected = 16 + n * total * 4 + n;
  if (buf.length !== expected) {
    throw new BindingError("bad-format", "decode-vppc", `size ${buf.length} != expected ${expected}`);
  }
  const data = ArrayView.fromBuffer(buf, n, total, 16);
  const provenance = new Uint8Array(buf.subarray(16 + n * total * 4));
  return { data, baseDims: base, provenance };
}

// ---------------------------------------------------------------------------
// 16-bit grayscale PNG (depth maps; big-endian samples per the PNG spec)

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(...parts: Buffer[]): number {
  let c = 0xffffffff;
  for (const part of parts) {
    for (let i = 0; i < part.length; i++) {
      c = CRC_TABLE[(c ^ part[i]) & 0xff] ^ (c >>> 8);
    }
  }
  return (c ^ 0xffffffff) >>> 0;
}

function pngChunk(type: string, data: Buffer): Buffer {
  const len = Buffer.alloc(4);
  len.writeUInt32BE(data.length);
  const typeBuf = Buffer.from(type, "ascii");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(typeBuf, data));
  return Buffer.concat([len, typeBuf, data, crc]);
}

/** Encode a depth map (meters, 0 = invalid) as a 16-bit grayscale PNG. */
export function encodeDepthPng(depth: ArrayView): Buffer {
  const { rows: height, cols: width } = depth;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 16; // bit depth
  ihdr[9] = 0; // grayscale
  // compression / filter / interlace all 0
  const raw = Buffer.alloc(height * (1 + width * 2));
  let off = 0;
  for (let r = 0; r < height; r++) {
    raw[off++] = 0; // filter: none
    for (let c = 0; c < width; c++) {
      const px = Math.min(65535, Math.max(0, Math.round(depth.at(r, c) * DEPTH_SCALE)));
      raw.writeUInt16BE(px, off);
      off += 2;
    }
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    pngChunk("IHDR", ihdr),
    pngChunk("IDAT", deflateSync(raw)),
    pngChunk("IEND", Buffer.alloc(0)),
  ]);
}

// ---------------------------------------------------------------------------
// Calibration text (P2 / R0_rect / Tr_velo_to_cam lines)

export interface Calibration {
  /** 3x4 camera matrix, row-major, 12 values. */
  camMatrix: number[];
  /** 4x4 LiDAR-to-camera transform, row-major, 16 values; bottom row 0,0,0,1. */
  lidarToCam: number[];
}

export function calibrationText(calib: Calibration): string {
  if (calib.camMatrix.length !== 12 || calib.lidarToCam.length !== 16) {
    throw new BindingError("bad-shape", "calibration", "expected 12 + 16 reals");
  }
  const bottom = calib.lidarToCam.slice(12);
  if (!(bottom[0] === 0 && bottom[1] === 0 && bottom[2] === 0 && bottom[3] === 1)) {
    throw new BindingError("bad-value", "calibration", "lidarToCam bottom row must be 0 0 0 1");
  }
  const fmt = (vals: number[]) => vals.map((v) => v.toString()).join(" ");
  const identity3 = [1, 0, 0, 0, 1, 0, 0, 0, 1];
  return [
    `P2: ${fmt(calib.camMatrix)}`,
    `R0_rect: ${fmt(identity3)}`,
    `Tr_velo_to_cam: ${fmt(calib.lidarToCam.slice(0, 12))}`,
    "",
  ].join("\n");
}
