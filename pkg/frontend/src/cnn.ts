/**
 * A deliberately tiny CNN: one 3x3 conv layer (single input channel),
 * ReLU, global average pooling, dense softmax head. Hand-rolled forward
 * and backward passes with plain SGD — small enough to gradient-check.
 *
 * The global-average-pool values double as the probe "nodes": one node per
 * filter, valued at the mean of that filter's output map on a sample.
 */

import { Rng } from "./rng";

export interface CnnConfig {
  inputSize: number; // side length of the square input
  nFilters: number;
  nClasses: number;
  seed: number;
}

export interface Gradients {
  kernels: Float64Array; // [nFilters * 9]
  kernelBias: Float64Array; // [nFilters]
  dense: Float64Array; // [nClasses * nFilters]
  denseBias: Float64Array; // [nClasses]
}

interface ForwardCache {
  conv: Float64Array; // pre-activation maps, [nFilters * outArea]
  pooled: Float64Array; // [nFilters]
  probs: Float64Array; // [nClasses]
}

const KERNEL = 3;

export class TinyCnn {
  readonly config: CnnConfig;
  readonly outSide: number;
  readonly outArea: number;
  kernels: Float64Array;
  kernelBias: Float64Array;
  dense: Float64Array;
  denseBias: Float64Array;

  constructor(config: CnnConfig) {
    if (config.nFilters < 1 || config.nFilters > 6) {
      throw new Error(`nFilters must be 1..6, got ${config.nFilters}`);
    }
    if (config.inputSize < KERNEL) {
      throw new Error(`input ${config.inputSize} smaller than the ${KERNEL}x${KERNEL} kernel`);
    }
    this.config = config;
    this.outSide = config.inputSize - KERNEL + 1;
    this.outArea = this.outSide * this.outSide;
    const rng = new Rng(config.seed);
    this.kernels = new Float64Array(config.nFilters * KERNEL * KERNEL);
    for (let i = 0; i < this.kernels.length; i++) {
      this.kernels[i] = 0.5 * rng.gaussian();
    }
    this.kernelBias = new Float64Array(config.nFilters);
    this.dense = new Float64Array(config.nClasses * config.nFilters);
    for (let i = 0; i < this.dense.length; i++) {
      this.dense[i] = 0.5 * rng.gaussian();
    }
    this.denseBias = new Float64Array(config.nClasses);
  }

  forward(sample: Float64Array): ForwardCache {
    const { inputSize, nFilters, nClasses } = this.config;
    if (sample.length !== inputSize * inputSize) {
      throw new Error(`sample has ${sample.length} pixels, expected ${inputSize * inputSize}`);
    }
    const conv = new Float64Array(nFilters * this.outArea);
    const pooled = new Float64Array(nFilters);
    for (let f = 0; f < nFilters; f++) {
      let sum = 0;
      for (let py = 0; py < this.outSide; py++) {
        for (let px = 0; px < this.outSide; px++) {
          let acc = this.kernelBias[f];
          for (let ky = 0; ky < KERNEL; ky++) {
            for (let kx = 0; kx < KERNEL; kx++) {
              acc +=
                this.kernels[f * 9 + ky * KERNEL + kx] *
                sample[(py + ky) * inputSize + (px + kx)];
            }
          }
          conv[f * this.outArea + py * this.outSide + px] = acc;
          sum += Math.max(0, acc);
        }
      }
      pooled[f] = sum / this.outArea;
    }
    const logits = new Float64Array(nClasses);
    for (let c = 0; c < nClasses; c++) {
      let acc = this.denseBias[c];
      for (let f = 0; f < nFilters; f++) {
        acc += this.dense[c * nFilters + f] * pooled[f];
      }
      logits[c] = acc;
    }
    // stable softmax
    let maxLogit = -Infinity;
    for (const v of logits) maxLogit = Math.max(maxLogit, v);
    const probs = new Float64Array(nClasses);
    let z = 0;
    for (let c = 0; c < nClasses; c++) {
      probs[c] = Math.exp(logits[c] - maxLogit);
      z += probs[c];
    }
    for (let c = 0; c < nClasses; c++) probs[c] /= z;
    return { conv, pooled, probs };
  }

  /** Mean output of each filter on one sample — the probe node values. */
  nodeActivations(sample: Float64Array): Float64Array {
    return this.forward(sample).pooled;
  }

  loss(sample: Float64Array, label: number): number {
    const { probs } = this.forward(sample);
    return -Math.log(Math.max(probs[label], 1e-300));
  }

  emptyGradients(): Gradients {
    return {
      kernels: new Float64Array(this.kernels.length),
      kernelBias: new Float64Array(this.kernelBias.length),
      dense: new Float64Array(this.dense.length),
      denseBias: new Float64Array(this.denseBias.length),
    };
  }

  /** Accumulate d(loss)/d(weights) for one sample into `grads`; returns the loss. */
  accumulate(sample: Float64Array, label: number, grads: Gradients): number {
    const { inputSize, nFilters, nClasses } = this.config;
    const { conv, pooled, probs } = this.forward(sample);
    const dLogits = new Float64Array(nClasses);
    for (let c = 0; c < nClasses; c++) {
      dLogits[c] = probs[c] - (c === label ? 1 : 0);
    }
    const dPooled = new Float64Array(nFilters);
    for (let c = 0; c < nClasses; c++) {
      for (let f = 0; f < nFilters; f++) {
        grads.dense[c * nFilters + f] += dLogits[c] * pooled[f];
        dPooled[f] += dLogits[c] * this.dense[c * nFilters + f];
      }
      grads.denseBias[c] += dLogits[c];
    }
    for (let f = 0; f < nFilters; f++) {
      const upstream = dPooled[f] / this.outArea; // mean pool spreads evenly
      for (let py = 0; py < this.outSide; py++) {
        for (let px = 0; px < this.outSide; px++) {
          if (conv[f * this.outArea + py * this.outSide + px] <= 0) {
            continue; // ReLU gate
          }
          for (let ky = 0; ky < KERNEL; ky++) {
            for (let kx = 0; kx < KERNEL; kx++) {
              grads.kernels[f * 9 + ky * KERNEL + kx] +=
                upstream * sample[(py + ky) * inputSize + (px + kx)];
            }
          }
          grads.kernelBias[f] += upstream;
        }
      }
    }
    return -Math.log(Math.max(probs[label], 1e-300));
  }

  step(grads: Gradients, lr: number, batchSize: number): void {
    const scale = lr / batchSize;
    for (let i = 0; i < this.kernels.length; i++) this.kernels[i] -= scale * grads.kernels[i];
    for (let i = 0; i < this.kernelBias.length; i++) this.kernelBias[i] -= scale * grads.kernelBias[i];
    for (let i = 0; i < this.dense.length; i++) this.dense[i] -= scale * grads.dense[i];
    for (let i = 0; i < this.denseBias.length; i++) this.denseBias[i] -= scale * grads.denseBias[i];
  }

  /** One pass over the data in shuffled minibatches; returns the mean loss. */
  trainEpoch(
    xs: Float64Array[],
    ys: number[],
    lr: number,
    batchSize: number,
    rng: Rng,
  ): number {
    const order = Array.from({ length: xs.length }, (_, i) => i);
    rng.shuffle(order);
    let totalLoss = 0;
    for (let start = 0; start < order.length; start += batchSize) {
      const batch = order.slice(start, start + batchSize);
      const grads = this.emptyGradients();
      for (const i of batch) {
        totalLoss += this.accumulate(xs[i], ys[i], grads);
      }
      this.step(grads, lr, batch.length);
    }
    return totalLoss / xs.length;
  }

  /** Accuracy as a percentage, the performance number the manifests carry. */
  accuracyPct(xs: Float64Array[], ys: number[]): number {
    let correct = 0;
    for (let i = 0; i < xs.length; i++) {
      const { probs } = this.forward(xs[i]);
      let best = 0;
      for (let c = 1; c < probs.length; c++) {
        if (probs[c] > probs[best]) best = c;
      }
      if (best === ys[i]) correct++;
    }
    return (100 * correct) / xs.length;
  }
}
