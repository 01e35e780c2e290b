/**
 * Contiguous float32 matrix view.
 *
 * Wraps a Float32Array with a (rows, cols) row-major shape. Construction
 * never copies; `fromBuffer` creates a zero-copy view over a node Buffer
 * whenever its byte offset is 4-byte aligned and falls back to one copy
 * otherwise (typed arrays cannot alias misaligned memory).
 */

import { BindingError } from "./errors";

export class ArrayView {
  readonly data: Float32Array;
  readonly rows: number;
  readonly cols: number;

  constructor(data: Float32Array, rows: number, cols: number) {
    if (!Number.isInteger(rows) || !Number.isInteger(cols) || rows < 0 || cols < 0) {
      throw new BindingError("bad-shape", "arrayview", `invalid shape ${rows}x${cols}`);
    }
    if (rows * cols !== data.length) {
      throw new BindingError(
        "bad-shape",
        "arrayview",
        `shape ${rows}x${cols} does not cover buffer length ${data.length}`,
      );
    }
    this.data = data;
    this.rows = rows;
    this.cols = cols;
  }

  static zeros(rows: number, cols: number): ArrayView {
    return new ArrayView(new Float32Array(rows * cols), rows, cols);
  }

  static fromArray(values: number[][], cols?: number): ArrayView {
    const rows = values.length;
    const width = cols ?? (rows ? values[0].length : 0);
    const data = new Float32Array(rows * width);
    values.forEach((row, r) => {
      if (row.length !== width) {
        throw new BindingError("bad-shape", "arrayview", `ragged row ${r}`);
      }
      data.set(row, r * width);
    });
    return new ArrayView(data, rows, width);
  }

  /** Zero-copy when `buf` is 4-byte aligned; copies once otherwise. */
  static fromBuffer(buf: Buffer, rows: number, cols: number, byteOffset = 0): ArrayView {
    const start = buf.byteOffset + byteOffset;
    const length = rows * cols;
    if (start % 4 === 0) {
      return new ArrayView(new Float32Array(buf.buffer, start, length), rows, cols);
    }
    const copy = new Float32Array(length);
    for (let i = 0; i < length; i++) {
      copy[i] = buf.readFloatLE(byteOffset + i * 4);
    }
    return new ArrayView(copy, rows, cols);
  }

  /** Whether this view aliases memory it does not own outright. */
  get isView(): boolean {
    return this.data.byteOffset !== 0 || this.data.buffer.byteLength !== this.data.byteLength;
  }

  at(row: number, col: number): number {
    return this.data[row * this.cols + col];
  }

  row(r: number): Float32Array {
    return this.data.subarray(r * this.cols, (r + 1) * this.cols);
  }

  /** Zero-copy Buffer over the view's bytes (shares memory). */
  asBuffer(): Buffer {
    return Buffer.from(this.data.buffer, this.data.byteOffset, this.data.byteLength);
  }

  equals(other: ArrayView): boolean {
    if (other.rows !== this.rows || other.cols !== this.cols) return false;
    for (let i = 0; i < this.data.length; i++) {
      if (!Object.is(this.data[i], other.data[i])) return false;
    }
    return true;
  }
}
