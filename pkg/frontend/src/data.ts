/**
 * Synthetic 2-class image data: horizontal vs vertical gratings.
 *
 * Each sample is an 8x8 patch of a sinusoidal stripe pattern with random
 * phase, frequency jitter and additive noise, so the two classes are easy
 * enough for a tiny CNN to make progress in a handful of epochs but not
 * trivially separable by a single pixel.
 */

import { Rng } from "./rng";

export interface Dataset {
  trainX: Float64Array[];
  trainY: number[];
  testX: Float64Array[];
  testY: number[];
  size: number; // side length of each square sample
}

export function makeSample(rng: Rng, label: number, size: number): Float64Array {
  const phase = rng.uniform(0, 2 * Math.PI);
  const freq = rng.uniform(0.9, 2.1); // cycles across the patch
  const noise = 0.35;
  const out = new Float64Array(size * size);
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const along = label === 0 ? y : x; // 0: horizontal stripes, 1: vertical
      const value = Math.sin((2 * Math.PI * freq * along) / size + phase);
      out[y * size + x] = value + noise * rng.gaussian();
    }
  }
  return out;
}

export function makeDataset(seed: number, nTrain: number, nTest: number, size = 8): Dataset {
  const rng = new Rng(seed);
  const trainX: Float64Array[] = [];
  const trainY: number[] = [];
  const testX: Float64Array[] = [];
  const testY: number[] = [];
  for (let i = 0; i < nTrain; i++) {
    const label = i % 2;
    trainX.push(makeSample(rng, label, size));
    trainY.push(label);
  }
  for (let i = 0; i < nTest; i++) {
    const label = i % 2;
    testX.push(makeSample(rng, label, size));
    testY.push(label);
  }
  return { trainX, trainY, testX, testY, size };
}

/**
 * Fixed probe batch: a seeded subset of training samples, chosen once and
 * reused at every epoch so that correlation changes between epochs reflect
 * the network, not resampling noise.
 */
export function pickProbe(dataset: Dataset, nProbe: number, seed: number): Float64Array[] {
  const rng = new Rng(seed);
  const idx = rng.pickIndices(dataset.trainX.length, nProbe);
  return idx.map((i) => dataset.trainX[i]);
}
