#!/usr/bin/env node
/** CLI entry: run the instrumented training loop once. */

import { parseArgs } from "node:util";

import { DEFAULT_CONFIG, trainingLoopWithEarlystop } from "./train";

function main(): number {
  const { values } = parseArgs({
    options: {
      out: { type: "string", default: DEFAULT_CONFIG.outDir },
      epochs: { type: "string", default: String(DEFAULT_CONFIG.maxEpochs) },
      filters: { type: "string", default: String(DEFAULT_CONFIG.nFilters) },
      patience: { type: "string", default: String(DEFAULT_CONFIG.patience) },
      seed: { type: "string", default: String(DEFAULT_CONFIG.modelSeed) },
      help: { type: "boolean", default: false },
    },
  });
  if (values.help) {
    console.log(
      "usage: topogap-trainer [--out DIR] [--epochs N] [--filters N] " +
        "[--patience N] [--seed N]",
    );
    return 0;
  }
  try {
    const result = trainingLoopWithEarlystop(
      {
        outDir: values.out!,
        maxEpochs: Number(values.epochs),
        nFilters: Number(values.filters),
        patience: Number(values.patience),
        modelSeed: Number(values.seed),
      },
      (line) => console.error(line),
    );
    if (result.stoppedAt !== null) {
      console.log(`stopped at epoch ${result.stoppedAt} (trace: ${result.tracePath})`);
    } else {
      console.log(`epoch budget exhausted (trace: ${result.tracePath})`);
    }
    return 0;
  } catch (e) {
    console.error((e as Error).message);
    return 1;
  }
}

process.exitCode = main();
