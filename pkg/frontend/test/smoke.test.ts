/**
 * End-to-end smoke run: train the tiny CNN with the default seeds, extracting
 * activations and consulting the topology-driven stopping rule each epoch via
 * the real CLI. Asserts the whole file contract, not just the return value.
 */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { LoopResult, trainingLoopWithEarlystop } from "../src/train";

let dir: string;
let result: LoopResult;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "smoke-"));
  result = trainingLoopWithEarlystop({ outDir: dir });
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("training loop with early stopping", () => {
  it("runs at least one epoch and at most the budget", () => {
    expect(result.epochs.length).toBeGreaterThanOrEqual(1);
    expect(result.epochs.length).toBeLessThanOrEqual(5);
  });

  it("summarizes every epoch of this pinned run with finite cavity statistics", () => {
    for (const epoch of result.epochs) {
      expect(epoch.lambda).not.toBeNull();
      expect(epoch.mu).not.toBeNull();
      expect(Number.isFinite(epoch.lambda!)).toBe(true);
      expect(Number.isFinite(epoch.mu!)).toBe(true);
      expect(epoch.lambda!).toBeGreaterThan(0);
      expect(epoch.mu!).toBeGreaterThanOrEqual(epoch.lambda! / 2);
      expect(epoch.nCavities).toBeGreaterThanOrEqual(1);
    }
  });

  it("reports sane training metrics", () => {
    for (const epoch of result.epochs) {
      expect(Number.isFinite(epoch.trainLoss)).toBe(true);
      expect(epoch.rhoTrain).toBeGreaterThanOrEqual(0);
      expect(epoch.rhoTrain).toBeLessThanOrEqual(100);
      expect(epoch.rhoTest).toBeGreaterThanOrEqual(0);
      expect(epoch.rhoTest).toBeLessThanOrEqual(100);
    }
  });

  it("every decision is continue until a single final stop", () => {
    const decisions = result.epochs.map((e) => e.decision);
    for (const d of decisions.slice(0, -1)) {
      expect(d).toBe("continue");
    }
    const last = decisions[decisions.length - 1];
    if (result.stoppedAt !== null) {
      expect(last).toBe("stop");
      expect(result.stoppedAt).toBe(result.epochs.length - 1);
    } else {
      expect(last).toBe("continue"); // budget exhausted instead
    }
  });

  it("leaves the full file trail on disk", () => {
    for (const epoch of result.epochs) {
      const stem = path.join(dir, `epoch${epoch.epoch}`);
      expect(fs.existsSync(`${stem}.csv`)).toBe(true);
      expect(fs.existsSync(`${stem}.manifest.json`)).toBe(true);
      expect(fs.existsSync(`${stem}.diagram.csv`)).toBe(true);
      expect(fs.existsSync(`${stem}.summary.json`)).toBe(true);
      const manifest = JSON.parse(fs.readFileSync(`${stem}.manifest.json`, "utf-8"));
      expect(manifest.epoch).toBe(epoch.epoch);
      expect(manifest.rho_train).toBe(epoch.rhoTrain);
      expect(manifest.rho_test).toBe(epoch.rhoTest);
    }
  });

  it("the trace has one decision row per epoch, in agreement with the reports", () => {
    const lines = fs.readFileSync(result.tracePath, "utf-8").trimEnd().split("\n");
    expect(lines[1]).toBe("epoch,peak_index,peak_scale,decision");
    const rows = lines.slice(2).map((l) => l.split(","));
    expect(rows).toHaveLength(result.epochs.length);
    for (let i = 0; i < rows.length; i++) {
      expect(Number(rows[i][0])).toBe(result.epochs[i].epoch);
      expect(rows[i][3]).toBe(result.epochs[i].decision);
    }
  });
});
