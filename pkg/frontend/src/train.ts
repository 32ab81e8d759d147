/**
 * The instrumented training loop: train the tiny CNN one epoch at a time,
 * snapshot probe activations to disk, hand them to the toolkit, and stop
 * the moment its early-stopping kernel says so.
 */

import * as path from "node:path";

import { extractEpoch } from "./artifacts";
import { TinyCnn } from "./cnn";
import { makeDataset, pickProbe } from "./data";
import { Rng } from "./rng";
import { earlystopStep, summarizeTolerant } from "./topogap";

export interface LoopConfig {
  outDir: string;
  maxEpochs: number;
  nFilters: number;
  inputSize: number;
  nTrain: number;
  nTest: number;
  nProbe: number;
  lr: number;
  batchSize: number;
  patience: number;
  dataSeed: number;
  modelSeed: number;
  probeSeed: number;
  trainSeed: number;
  modelName: string;
  datasetName: string;
}

export const DEFAULT_CONFIG: LoopConfig = {
  outDir: "runs",
  maxEpochs: 5,
  nFilters: 6,
  inputSize: 8,
  nTrain: 128,
  nTest: 64,
  nProbe: 32,
  lr: 0.15,
  batchSize: 16,
  patience: 0,
  dataSeed: 11,
  modelSeed: 7,
  probeSeed: 23,
  trainSeed: 5,
  modelName: "tiny-cnn",
  datasetName: "stripes-8x8",
};

export interface EpochReport {
  epoch: number;
  trainLoss: number;
  rhoTrain: number;
  rhoTest: number;
  /** null when the epoch's correlation graph had no cavities to summarize */
  lambda: number | null;
  mu: number | null;
  nCavities: number;
  decision: "continue" | "stop";
}

export interface LoopResult {
  epochs: EpochReport[];
  stoppedAt: number | null; // epoch of the "stop" decision, if any
  tracePath: string;
}

export function trainingLoopWithEarlystop(
  config: Partial<LoopConfig> = {},
  log: (line: string) => void = () => {},
): LoopResult {
  const cfg: LoopConfig = { ...DEFAULT_CONFIG, ...config };
  const dataset = makeDataset(cfg.dataSeed, cfg.nTrain, cfg.nTest, cfg.inputSize);
  const probe = pickProbe(dataset, cfg.nProbe, cfg.probeSeed);
  const model = new TinyCnn({
    inputSize: cfg.inputSize,
    nFilters: cfg.nFilters,
    nClasses: 2,
    seed: cfg.modelSeed,
  });
  const trainRng = new Rng(cfg.trainSeed);
  const tracePath = path.join(cfg.outDir, "run.trace.csv");

  const epochs: EpochReport[] = [];
  let stoppedAt: number | null = null;
  for (let epoch = 0; epoch < cfg.maxEpochs; epoch++) {
    const trainLoss = model.trainEpoch(
      dataset.trainX,
      dataset.trainY,
      cfg.lr,
      cfg.batchSize,
      trainRng,
    );
    const rhoTrain = model.accuracyPct(dataset.trainX, dataset.trainY);
    const rhoTest = model.accuracyPct(dataset.testX, dataset.testY);
    const { csvPath } = extractEpoch(model, probe, cfg.outDir, {
      model_name: cfg.modelName,
      dataset_name: cfg.datasetName,
      epoch,
      rho_train: rhoTrain,
      rho_test: rhoTest,
    });
    const summary = summarizeTolerant(csvPath, cfg.outDir);
    const decision = earlystopStep(summary.diagramPath, tracePath, {
      epoch,
      patience: cfg.patience,
    });
    const report: EpochReport =
      summary.summaryPath !== null
        ? {
            epoch, trainLoss, rhoTrain, rhoTest, decision,
            lambda: summary.lambda, mu: summary.mu, nCavities: summary.nCavities,
          }
        : { epoch, trainLoss, rhoTrain, rhoTest, decision, lambda: null, mu: null, nCavities: 0 };
    epochs.push(report);
    const last = report;
    log(
      `epoch ${epoch}: loss=${trainLoss.toFixed(4)} ` +
        `train=${rhoTrain.toFixed(1)}% test=${rhoTest.toFixed(1)}% ` +
        (last.lambda !== null
          ? `lambda=${last.lambda.toFixed(4)} mu=${last.mu!.toFixed(4)} `
          : "no cavities ") +
        `cavities=${last.nCavities} -> ${decision}`,
    );
    if (decision === "stop") {
      stoppedAt = epoch;
      break;
    }
  }
  return { epochs, stoppedAt, tracePath };
}
