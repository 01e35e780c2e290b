/** Structured (code, stage, message) error crossing the binding boundary. */
export class BindingError extends Error {
  readonly code: string;
  readonly stage: string;

  constructor(code: string, stage: string, message: string) {
    super(`[${stage}] ${code}: ${message}`);
    this.name = "BindingError";
    this.code = code;
    this.stage = stage;
  }
}
