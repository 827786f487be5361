/**
 * Trace export in the routing engine's on-disk format: a directory with
 * manifest.json and records.jsonl, one JSON object per sample holding the
 * pooled embedding-layer output, per-exit max-softmax confidences,
 * per-exit argmax predictions, and the gold label.
 *
 * Confidences are clamped up to 1/|C| before writing: float32 softmax can
 * round a uniform distribution's max a few ulps below the exact bound the
 * engine validates.
 */

import * as tf from '@tensorflow/tfjs';
import * as fs from 'node:fs';
import * as path from 'node:path';

import { generateDataset, Example } from './dataset';
import { MultiExitEncoder } from './model';
import { Checkpoint, modelFromCheckpoint, toBatch } from './train';

const NUM_CLASSES = 2;

export interface TraceRecord {
  id: string;
  embedding: number[];
  confidences: number[];
  predictions: number[];
  label: number;
}

export function computeTraces(
  model: MultiExitEncoder,
  examples: Example[],
  vocab: string[],
  batchSize = 64,
): TraceRecord[] {
  const records: TraceRecord[] = [];
  const floor = 1 / NUM_CLASSES;
  for (let start = 0; start < examples.length; start += batchSize) {
    const slice = examples.slice(start, start + batchSize);
    const rows = tf.tidy(() => {
      const batch = toBatch(slice, vocab, model.shape.maxSeqLen);
      const { embedding, exitLogits } = model.forward(batch.ids, batch.mask);
      const embeddings = embedding.arraySync() as number[][];
      const probs = exitLogits.map((l) => tf.softmax(l, -1).arraySync() as number[][]);
      return { embeddings, probs };
    });
    slice.forEach((ex, i) => {
      const confidences: number[] = [];
      const predictions: number[] = [];
      for (const layerProbs of rows.probs) {
        const p = layerProbs[i];
        let arg = 0;
        for (let c = 1; c < p.length; c++) if (p[c] > p[arg]) arg = c;
        confidences.push(Math.min(1, Math.max(floor, p[arg])));
        predictions.push(arg);
      }
      records.push({
        id: ex.id,
        embedding: rows.embeddings[i],
        confidences,
        predictions,
        label: ex.label,
      });
    });
  }
  return records;
}

export function writeTraceDir(
  records: TraceRecord[],
  manifest: {
    num_layers: number;
    num_classes: number;
    embedding_dim: number;
    dataset_name: string;
    split: string;
  },
  outDir: string,
): void {
  fs.mkdirSync(outDir, { recursive: true });
  fs.writeFileSync(path.join(outDir, 'manifest.json'), JSON.stringify(manifest, null, 2) + '\n');
  const lines = records.map((r) => JSON.stringify(r)).join('\n');
  fs.writeFileSync(path.join(outDir, 'records.jsonl'), lines + '\n');
}

/** Export one dataset split as a trace directory; returns the records. */
export function exportTraces(
  checkpoint: Checkpoint,
  split: 'train' | 'validation' | 'test',
  outDir: string,
): TraceRecord[] {
  const model = modelFromCheckpoint(checkpoint);
  const splits = generateDataset(checkpoint.config.numSamples, checkpoint.config.seed);
  const examples = splits[split];
  const records = computeTraces(model, examples, checkpoint.vocab);
  writeTraceDir(
    records,
    {
      num_layers: model.shape.numLayers,
      num_classes: NUM_CLASSES,
      embedding_dim: model.shape.dModel,
      dataset_name: checkpoint.config.dataset,
      split,
    },
    outDir,
  );
  for (const v of model.trainableVariables()) v.dispose();
  return records;
}
