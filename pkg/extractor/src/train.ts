/**
 * Joint training of all exit classifiers with grid search and early
 * stopping on final-exit validation accuracy.
 */

import * as tf from '@tensorflow/tfjs';
import * as fs from 'node:fs';
import * as path from 'node:path';

import { backboneShape, ExitTrainingConfig, validateConfig } from './config';
import { buildVocab, DatasetSplits, encode, Example, generateDataset, mulberry32 } from './dataset';
import { jointLoss, MultiExitEncoder } from './model';

export interface Checkpoint {
  config: ExitTrainingConfig;
  vocab: string[];
  weights: Record<string, { shape: number[]; values: number[] }>;
  meta: {
    batchSize: number;
    learningRate: number;
    epochsRun: number;
    valAccuracy: number;
  };
}

export interface Batch {
  ids: tf.Tensor2D;
  mask: tf.Tensor2D;
  labels: tf.Tensor1D;
}

export function toBatch(examples: Example[], vocab: string[], maxSeqLen: number): Batch {
  const ids: number[][] = [];
  const mask: number[][] = [];
  const labels: number[] = [];
  for (const ex of examples) {
    const enc = encode(ex.tokens, vocab, maxSeqLen);
    ids.push(enc.ids);
    mask.push(enc.mask);
    labels.push(ex.label);
  }
  return {
    ids: tf.tensor2d(ids, undefined, 'int32'),
    mask: tf.tensor2d(mask),
    labels: tf.tensor1d(labels, 'int32'),
  };
}

function disposeBatch(batch: Batch): void {
  batch.ids.dispose();
  batch.mask.dispose();
  batch.labels.dispose();
}

/** Final-exit accuracy over a set of examples. */
export function finalExitAccuracy(
  model: MultiExitEncoder,
  examples: Example[],
  vocab: string[],
): number {
  return tf.tidy(() => {
    const batch = toBatch(examples, vocab, model.shape.maxSeqLen);
    const { exitLogits } = model.forward(batch.ids, batch.mask);
    const predictions = exitLogits[exitLogits.length - 1].argMax(-1);
    const correct = predictions.equal(batch.labels).sum().dataSync()[0];
    return correct / examples.length;
  });
}

function shuffled<T>(items: T[], rng: () => number): T[] {
  const out = items.slice();
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}

function trainOne(
  config: ExitTrainingConfig,
  splits: DatasetSplits,
  vocab: string[],
  batchSize: number,
  learningRate: number,
): { model: MultiExitEncoder; valAccuracy: number; epochsRun: number } {
  const shape = backboneShape(config.backbone);
  const model = new MultiExitEncoder(shape, vocab.length, config.seed, config.poolMode);
  const optimizer = tf.train.adam(learningRate);
  const variables = model.trainableVariables();

  let bestAcc = -1;
  let bestDump: Record<string, { shape: number[]; values: number[] }> | null = null;
  let sinceImprovement = 0;
  let epochsRun = 0;

  for (let epoch = 0; epoch < config.epochs; epoch++) {
    const order = shuffled(splits.train, mulberry32(config.seed + 1000 * epoch + 17));
    for (let start = 0; start < order.length; start += batchSize) {
      const slice = order.slice(start, start + batchSize);
      const batch = toBatch(slice, vocab, shape.maxSeqLen);
      optimizer.minimize(
        () =>
          tf.tidy(() => {
            const { exitLogits } = model.forward(batch.ids, batch.mask);
            return jointLoss(exitLogits, batch.labels);
          }),
        false,
        variables,
      );
      disposeBatch(batch);
    }
    epochsRun = epoch + 1;
    const valAcc = finalExitAccuracy(model, splits.validation, vocab);
    if (valAcc > bestAcc) {
      bestAcc = valAcc;
      bestDump = model.dump();
      sinceImprovement = 0;
    } else {
      sinceImprovement += 1;
      if (sinceImprovement >= config.patience) break;
    }
  }
  if (bestDump) model.restore(bestDump);
  optimizer.dispose();
  return { model, valAccuracy: bestAcc, epochsRun };
}

/**
 * Grid-search batch size x learning rate, train each point, and keep the
 * checkpoint with the best final-exit validation accuracy.
 */
export function trainExits(config: ExitTrainingConfig): Checkpoint {
  validateConfig(config);
  const splits = generateDataset(config.numSamples, config.seed);
  const vocab = buildVocab();

  let best: { model: MultiExitEncoder; valAccuracy: number; epochsRun: number } | null = null;
  let bestPoint: { batchSize: number; learningRate: number } | null = null;
  for (const batchSize of config.batchSizes) {
    for (const learningRate of config.learningRates) {
      const candidate = trainOne(config, splits, vocab, batchSize, learningRate);
      if (!best || candidate.valAccuracy > best.valAccuracy) {
        if (best) for (const v of best.model.trainableVariables()) v.dispose();
        best = candidate;
        bestPoint = { batchSize, learningRate };
      } else {
        for (const v of candidate.model.trainableVariables()) v.dispose();
      }
    }
  }
  const checkpoint: Checkpoint = {
    config,
    vocab,
    weights: best!.model.dump(),
    meta: {
      batchSize: bestPoint!.batchSize,
      learningRate: bestPoint!.learningRate,
      epochsRun: best!.epochsRun,
      valAccuracy: best!.valAccuracy,
    },
  };
  for (const v of best!.model.trainableVariables()) v.dispose();
  return checkpoint;
}

export function saveCheckpoint(checkpoint: Checkpoint, file: string): void {
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, JSON.stringify(checkpoint));
}

export function loadCheckpoint(file: string): Checkpoint {
  return JSON.parse(fs.readFileSync(file, 'utf-8')) as Checkpoint;
}

export function modelFromCheckpoint(checkpoint: Checkpoint): MultiExitEncoder {
  const shape = backboneShape(checkpoint.config.backbone);
  const model = new MultiExitEncoder(
    shape,
    checkpoint.vocab.length,
    checkpoint.config.seed,
    checkpoint.config.poolMode,
  );
  model.restore(checkpoint.weights);
  return model;
}
