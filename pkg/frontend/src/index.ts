export const VERSION = "0.1.0";

export { ArrayView } from "./arrayview";
export { BindingError } from "./errors";
export {
  Calibration,
  DEPTH_SCALE,
  PaintedCloud,
  VPPC_MAGIC,
  VPTN_MAGIC,
  calibrationText,
  decodeBin,
  decodePainted,
  decodeScoreTensor,
  encodeBin,
  encodeDepthPng,
  encodePainted,
  encodeScoreTensor,
} from "./formats";
export { Box3D, formatLabels, parseLabels } from "./labels";
export {
  DadaOptions,
  DadaResult,
  STANDARD_RIG,
  ScoreTensor,
  bindDada,
  bindPaint,
  bindVirtualPoints,
} from "./bindings";
export { cliCommand } from "./cli";
