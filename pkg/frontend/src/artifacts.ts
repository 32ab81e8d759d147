/**
 * Writers for the toolkit's on-disk formats: the activation CSV (one row
 * per probe sample, one column per node, header row of node names) and its
 * `<stem>.manifest.json` sidecar. Numbers use JavaScript's shortest
 * round-trip formatting, so identical model state gives identical bytes.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { TinyCnn } from "./cnn";

export const NODE_CAP = 10_000;

export interface EpochMeta {
  model_name: string;
  dataset_name: string;
  epoch: number;
  rho_train?: number;
  rho_test?: number;
}

export interface EpochArtifacts {
  csvPath: string;
  manifestPath: string;
  nodeNames: string[];
}

/**
 * Resolve which filters become nodes: all of them, or an explicit subset
 * (e.g. a seeded random pick for larger models).
 */
export function resolveNodes(nFilters: number, subset?: number[]): number[] {
  const indices = subset ?? Array.from({ length: nFilters }, (_, f) => f);
  for (const f of indices) {
    if (!Number.isInteger(f) || f < 0 || f >= nFilters) {
      throw new Error(`filter ${f} not found (model has ${nFilters} filters)`);
    }
  }
  if (indices.length > NODE_CAP) {
    throw new Error(`${indices.length} nodes exceeds the cap of ${NODE_CAP}`);
  }
  return indices;
}

export function activationCsvText(rows: Float64Array[], nodeNames: string[]): string {
  const lines = [nodeNames.join(",")];
  for (const row of rows) {
    if (row.length !== nodeNames.length) {
      throw new Error(`row has ${row.length} values for ${nodeNames.length} nodes`);
    }
    lines.push(Array.from(row, (v) => String(v)).join(","));
  }
  return lines.join("\n") + "\n";
}

/**
 * Run the probe batch through the model and write `epoch<N>.csv` plus its
 * manifest sidecar into `dir`. Pure function of (model state, probe, meta,
 * node selection), so fixed inputs give byte-identical files.
 */
export function extractEpoch(
  model: TinyCnn,
  probe: Float64Array[],
  dir: string,
  meta: EpochMeta,
  filterSubset?: number[],
): EpochArtifacts {
  if (probe.length < 2) {
    throw new Error(`probe batch needs at least 2 samples, got ${probe.length}`);
  }
  const nodes = resolveNodes(model.config.nFilters, filterSubset);
  const nodeNames = nodes.map((f) => `f${f}`);
  const rows = probe.map((sample) => {
    const pooled = model.nodeActivations(sample);
    return Float64Array.from(nodes, (f) => pooled[f]);
  });
  fs.mkdirSync(dir, { recursive: true });
  const stem = `epoch${meta.epoch}`;
  const csvPath = path.join(dir, `${stem}.csv`);
  const manifestPath = path.join(dir, `${stem}.manifest.json`);
  fs.writeFileSync(csvPath, activationCsvText(rows, nodeNames));
  fs.writeFileSync(manifestPath, JSON.stringify(meta, Object.keys(meta).sort(), 2) + "\n");
  return { csvPath, manifestPath, nodeNames };
}
