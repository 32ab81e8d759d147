/**
 * Bridge to the `topogap` command-line toolkit. Files in, files out, one
 * subprocess per call — this package never imports the toolkit's internals.
 */

import { spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as path from "node:path";

const BIN = process.env.TOPOGAP_BIN ?? "topogap";

export interface SummaryResult {
  lambda: number;
  mu: number;
  nCavities: number;
  summaryPath: string;
  diagramPath: string;
}

export class TopogapError extends Error {
  readonly exitCode: number | null;
  readonly stderr: string;

  constructor(command: string[], exitCode: number | null, stderr: string) {
    // surface the toolkit's own message verbatim; it is the real diagnosis
    super(`${BIN} ${command.join(" ")} exited ${exitCode}:\n${stderr.trimEnd()}`);
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}

function run(args: string[]): string {
  const proc = spawnSync(BIN, args, { encoding: "utf-8" });
  if (proc.error) {
    throw new Error(`failed to launch ${BIN}: ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    throw new TopogapError(args, proc.status, proc.stderr ?? "");
  }
  return proc.stdout ?? "";
}

/** `topogap summarize`: activation CSV -> diagram CSV + summary JSON. */
export function summarize(csvPath: string, outDir: string): SummaryResult {
  run(["summarize", csvPath, "--out", outDir]);
  const base = path.basename(csvPath).replace(/\.csv$/, "");
  const summaryPath = path.join(outDir, `${base}.summary.json`);
  const diagramPath = path.join(outDir, `${base}.diagram.csv`);
  const payload = JSON.parse(fs.readFileSync(summaryPath, "utf-8"));
  return {
    lambda: payload.lambda,
    mu: payload.mu,
    nCavities: payload.n_cavities,
    summaryPath,
    diagramPath,
  };
}

/**
 * Like {@link summarize}, but a cavity-free epoch is not fatal: the toolkit
 * exits 3 when there is nothing to average, yet it has already written the
 * diagram file, which is all the early-stopping kernel needs. Returns the
 * diagram path with no summary in that case. Every other failure rethrows.
 */
export function summarizeTolerant(
  csvPath: string,
  outDir: string,
): SummaryResult | { diagramPath: string; summaryPath: null } {
  try {
    return summarize(csvPath, outDir);
  } catch (e) {
    if (e instanceof TopogapError && e.exitCode === 3) {
      const base = path.basename(csvPath).replace(/\.csv$/, "");
      const diagramPath = path.join(outDir, `${base}.diagram.csv`);
      if (fs.existsSync(diagramPath)) {
        return { diagramPath, summaryPath: null };
      }
    }
    throw e;
  }
}

/** `topogap earlystop-step`: fold one epoch's diagram into the trace. */
export function earlystopStep(
  diagramPath: string,
  tracePath: string,
  options: { epoch?: number; patience?: number } = {},
): "continue" | "stop" {
  const args = ["earlystop-step", diagramPath, tracePath];
  if (options.epoch !== undefined) {
    args.push("--epoch", String(options.epoch));
  }
  if (options.patience !== undefined) {
    args.push("--patience", String(options.patience));
  }
  const decision = run(args).trim();
  if (decision !== "continue" && decision !== "stop") {
    throw new Error(`unexpected decision ${JSON.stringify(decision)} from ${BIN}`);
  }
  return decision;
}
