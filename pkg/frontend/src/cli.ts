/**
 * Invocation of the core toolkit's command-line interface.
 *
 * The binding layer holds no state: every call builds a private scratch
 * directory, runs the CLI on it, and decodes the outputs. Set
 * LIDARPAINT_CLI to override the interpreter (default `python3 -m
 * lidarpaint`).
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { BindingError } from "./errors";

export function cliCommand(): string[] {
  const override = process.env.LIDARPAINT_CLI;
  if (override) return override.split(" ");
  return ["python3", "-m", "lidarpaint"];
}

export function runCli(stage: string, args: string[]): void {
  const [cmd, ...prefix] = cliCommand();
  const result = spawnSync(cmd, [...prefix, ...args], { encoding: "utf-8" });
  if (result.error) {
    throw new BindingError("spawn-failed", stage, String(result.error));
  }
  if (result.status !== 0) {
    const tail = (result.stderr || result.stdout || "").trim().split("\n").slice(-4).join(" | ");
    throw new BindingError("cli-failed", stage, `exit ${result.status}: ${tail}`);
  }
}

export function withScratchDir<T>(stage: string, fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "lidarpaint-bind-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
