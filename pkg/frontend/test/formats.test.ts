import { describe, expect, it } from "vitest";

import {
  ArrayView,
  BindingError,
  STANDARD_RIG,
  calibrationText,
  decodeBin,
  decodePainted,
  decodeScoreTensor,
  encodeBin,
  encodeDepthPng,
  encodePainted,
  encodeScoreTensor,
} from "../src";

describe("bin clouds", () => {
  it("round-trips", () => {
    const pts = ArrayView.fromArray([
      [1.5, -2.0, 3.25, 0.5],
      [0, 0, 0, 1],
    ]);
    const again = decodeBin(encodeBin(pts));
    expect(again.equals(pts)).toBe(true);
  });

  it("rejects non-4-column views and truncated buffers", () => {
    expect(() => encodeBin(ArrayView.zeros(2, 3))).toThrow(BindingError);
    expect(() => decodeBin(Buffer.alloc(10))).toThrow(BindingError);
  });
});

describe("VPTN score tensors", () => {
  it("round-trips with header fields", () => {
    const scores = new Float32Array(2 * 3 * 4).map((_, i) => i / 7);
    const blob = encodeScoreTensor(scores, 2, 3, 4);
    expect(blob.subarray(0, 4).toString("ascii")).toBe("VPTN");
    const back = decodeScoreTensor(blob);
    expect(back.height).toBe(2);
    expect(back.width).toBe(3);
    expect(back.channels).toBe(4);
    expect(Array.from(back.scores)).toEqual(Array.from(scores));
  });

  it("rejects bad magic", () => {
    expect(() => decodeScoreTensor(Buffer.from("NOPE0000000000000"))).toThrow(BindingError);
  });
});

describe("VPPC painted clouds", () => {
  it("round-trips data, base dims and provenance", () => {
    const data = ArrayView.fromArray([
      [1, 2, 3, 0.5, 0.9, 0.1],
      [4, 5, 6, 0.25, 0.2, 0.8],
    ]);
    const blob = encodePainted({ data, baseDims: 4, provenance: Uint8Array.from([0, 1]) });
    const back = decodePainted(blob);
    expect(back.baseDims).toBe(4);
    expect(Array.from(back.provenance)).toEqual([0, 1]);
    expect(back.data.equals(data)).toBe(true);
  });

  it("checks the declared size", () => {
    const blob = Buffer.concat([Buffer.from("VPPC"), Buffer.alloc(12)]);
    blob.writeUInt32LE(3, 4); // claims 3 rows with no payload
    expect(() => decodePainted(blob)).toThrow(BindingError);
  });
});

describe("depth PNG encoder", () => {
  it("emits a structurally valid 16-bit grayscale PNG", () => {
    const depth = ArrayView.fromArray([
      [0, 12.25],
      [80.0, 0.004],
    ]);
    const png = encodeDepthPng(depth);
    expect(Array.from(png.subarray(0, 8))).toEqual([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
    expect(png.subarray(12, 16).toString("ascii")).toBe("IHDR");
    expect(png.readUInt32BE(16)).toBe(2); // width
    expect(png.readUInt32BE(20)).toBe(2); // height
    expect(png[24]).toBe(16); // bit depth
    expect(png[25]).toBe(0); // grayscale
    expect(png.subarray(png.length - 8, png.length - 4).toString("ascii")).toBe("IEND");
  });
});

describe("calibration text", () => {
  it("serializes the standard rig for the core parser", () => {
    const text = calibrationText(STANDARD_RIG);
    expect(text).toContain("P2: 721.5377 0 609.5593 44.85728");
    expect(text).toContain("R0_rect: 1 0 0 0 1 0 0 0 1");
    expect(text).toContain("Tr_velo_to_cam: 0 -1 0 0 0 0 -1 0.1 1 0 0 0");
  });

  it("rejects a bad bottom row", () => {
    const bad = { camMatrix: STANDARD_RIG.camMatrix, lidarToCam: [...STANDARD_RIG.lidarToCam] };
    bad.lidarToCam[12] = 0.5;
    expect(() => calibrationText(bad)).toThrow(BindingError);
  });
});
