import { describe, expect, it } from "vitest";

import { ArrayView, BindingError } from "../src";

describe("ArrayView", () => {
  it("validates shape against buffer length", () => {
    expect(() => new ArrayView(new Float32Array(6), 2, 3)).not.toThrow();
    expect(() => new ArrayView(new Float32Array(6), 2, 4)).toThrow(BindingError);
    expect(() => new ArrayView(new Float32Array(6), -1, 6)).toThrow(BindingError);
  });

  it("builds from nested arrays and rejects ragged rows", () => {
    const view = ArrayView.fromArray([
      [1, 2, 3],
      [4, 5, 6],
    ]);
    expect(view.rows).toBe(2);
    expect(view.at(1, 2)).toBe(6);
    expect(() => ArrayView.fromArray([[1, 2], [3]])).toThrow(BindingError);
  });

  it("is zero-copy over aligned buffers", () => {
    const buf = Buffer.alloc(4 * 4);
    buf.writeFloatLE(7.5, 8);
    const view = ArrayView.fromBuffer(buf, 2, 2);
    expect(view.at(1, 0)).toBe(7.5);
    buf.writeFloatLE(-1.25, 8); // same memory: the view sees the write
    expect(view.at(1, 0)).toBe(-1.25);
  });

  it("copies when the buffer is misaligned", () => {
    const backing = Buffer.alloc(4 * 4 + 1);
    const slice = backing.subarray(1); // misaligned by 1 byte
    slice.writeFloatLE(3.5, 0);
    const view = ArrayView.fromBuffer(slice, 2, 2);
    expect(view.at(0, 0)).toBe(3.5);
    slice.writeFloatLE(9.0, 0);
    expect(view.at(0, 0)).toBe(3.5); // detached copy
  });

  it("round-trips through its byte view", () => {
    const view = ArrayView.fromArray([[1.5, -2.25, 0, 4096]]);
    const again = ArrayView.fromBuffer(Buffer.from(view.asBuffer()), 1, 4);
    expect(again.equals(view)).toBe(true);
  });
});
