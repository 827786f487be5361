/**
 * Small transformer encoder with an exit classifier after every block.
 *
 * Pre-LN blocks (self-attention + MLP, residual), learned positional
 * embeddings, padding handled by an additive attention mask and masked
 * mean pooling. Exit i is a linear layer on the pooled hidden state of
 * block i; all exits train jointly under the summed cross-entropy loss.
 */

import * as tf from '@tensorflow/tfjs';

import { BackboneShape } from './config';

const NUM_CLASSES = 2;
const LN_EPS = 1e-5;

export interface ForwardOutput {
  /** pooled embedding-layer output (before any block); the routing feature */
  embedding: tf.Tensor2D;
  /** per-exit logits, one [batch, classes] tensor per block */
  exitLogits: tf.Tensor2D[];
}

export class MultiExitEncoder {
  readonly shape: BackboneShape;
  readonly vocabSize: number;
  readonly poolMode: 'mean' | 'first';
  readonly weights: Map<string, tf.Variable>;

  constructor(
    shape: BackboneShape,
    vocabSize: number,
    seed: number,
    poolMode: 'mean' | 'first' = 'mean',
  ) {
    this.shape = shape;
    this.vocabSize = vocabSize;
    this.poolMode = poolMode;
    this.weights = new Map();
    let counter = 0;
    // registry names are left auto-generated: fixed names collide when
    // several models coexist in one process (grid search, paired tests)
    const init = (name: string, dims: number[]) => {
      const initializer = tf.initializers.glorotUniform({ seed: seed + counter++ });
      this.weights.set(name, tf.variable(initializer.apply(dims) as tf.Tensor, true));
    };
    const zeros = (name: string, dims: number[]) => {
      this.weights.set(name, tf.variable(tf.zeros(dims), true));
    };
    const ones = (name: string, dims: number[]) => {
      this.weights.set(name, tf.variable(tf.ones(dims), true));
    };

    const d = shape.dModel;
    init('tok_emb', [vocabSize, d]);
    init('pos_emb', [shape.maxSeqLen, d]);
    for (let b = 0; b < shape.numLayers; b++) {
      ones(`b${b}.ln1.g`, [d]);
      zeros(`b${b}.ln1.b`, [d]);
      init(`b${b}.attn.qkv`, [d, 3 * d]);
      zeros(`b${b}.attn.qkv_b`, [3 * d]);
      init(`b${b}.attn.proj`, [d, d]);
      zeros(`b${b}.attn.proj_b`, [d]);
      ones(`b${b}.ln2.g`, [d]);
      zeros(`b${b}.ln2.b`, [d]);
      init(`b${b}.mlp.fc1`, [d, shape.mlpHidden]);
      zeros(`b${b}.mlp.fc1_b`, [shape.mlpHidden]);
      init(`b${b}.mlp.fc2`, [shape.mlpHidden, d]);
      zeros(`b${b}.mlp.fc2_b`, [d]);
      // zero-initialized heads start at a uniform softmax regardless of
      // the residual stream's magnitude at depth b
      zeros(`exit${b}.w`, [d, NUM_CLASSES]);
      zeros(`exit${b}.b`, [NUM_CLASSES]);
    }
  }

  private w(name: string): tf.Variable {
    const v = this.weights.get(name);
    if (!v) throw new Error(`missing weight ${name}`);
    return v;
  }

  private layerNorm(x: tf.Tensor3D, g: tf.Variable, b: tf.Variable): tf.Tensor3D {
    const { mean, variance } = tf.moments(x, -1, true);
    return x.sub(mean).div(variance.add(LN_EPS).sqrt()).mul(g).add(b) as tf.Tensor3D;
  }

  private attention(x: tf.Tensor3D, maskAdd: tf.Tensor, block: number): tf.Tensor3D {
    const [batch, seq, d] = x.shape;
    const heads = this.shape.numHeads;
    const dh = d / heads;
    const qkv = x
      .reshape([batch * seq, d])
      .matMul(this.w(`b${block}.attn.qkv`) as tf.Tensor2D)
      .add(this.w(`b${block}.attn.qkv_b`))
      .reshape([batch, seq, 3, heads, dh])
      .transpose([2, 0, 3, 1, 4]); // [3, batch, heads, seq, dh]
    const [q, k, v] = tf.unstack(qkv, 0);
    const scores = tf
      .matMul(q, k, false, true)
      .div(Math.sqrt(dh))
      .add(maskAdd); // [batch, heads, seq, seq]
    const attended = tf.matMul(tf.softmax(scores, -1), v); // [batch, heads, seq, dh]
    const merged = attended.transpose([0, 2, 1, 3]).reshape([batch * seq, d]);
    return merged
      .matMul(this.w(`b${block}.attn.proj`) as tf.Tensor2D)
      .add(this.w(`b${block}.attn.proj_b`))
      .reshape([batch, seq, d]) as tf.Tensor3D;
  }

  private mlp(x: tf.Tensor3D, block: number): tf.Tensor3D {
    const [batch, seq, d] = x.shape;
    return x
      .reshape([batch * seq, d])
      .matMul(this.w(`b${block}.mlp.fc1`) as tf.Tensor2D)
      .add(this.w(`b${block}.mlp.fc1_b`))
      .relu()
      .matMul(this.w(`b${block}.mlp.fc2`) as tf.Tensor2D)
      .add(this.w(`b${block}.mlp.fc2_b`))
      .reshape([batch, seq, d]) as tf.Tensor3D;
  }

  private pool(h: tf.Tensor3D, mask: tf.Tensor2D): tf.Tensor2D {
    if (this.poolMode === 'first') {
      return h.slice([0, 0, 0], [h.shape[0], 1, h.shape[2]]).squeeze([1]);
    }
    const expanded = mask.expandDims(2); // [batch, seq, 1]
    const summed = h.mul(expanded).sum(1); // [batch, d]
    const counts = mask.sum(1, true); // [batch, 1]
    return summed.div(counts) as tf.Tensor2D;
  }

  /** Full forward pass; caller owns the returned tensors (wrap in tidy). */
  forward(ids: tf.Tensor2D, mask: tf.Tensor2D): ForwardOutput {
    const [batch, seq] = ids.shape;
    const tok = tf.gather(this.w('tok_emb') as tf.Tensor2D, ids.flatten()).reshape([
      batch,
      seq,
      this.shape.dModel,
    ]) as tf.Tensor3D;
    const pos = (this.w('pos_emb') as tf.Tensor2D)
      .slice([0, 0], [seq, this.shape.dModel])
      .expandDims(0);
    let h = tok.add(pos) as tf.Tensor3D;
    const embedding = this.pool(h, mask);
    const maskAdd = mask.sub(1).mul(1e9).reshape([batch, 1, 1, seq]);

    const exitLogits: tf.Tensor2D[] = [];
    for (let b = 0; b < this.shape.numLayers; b++) {
      const attnOut = this.attention(
        this.layerNorm(h, this.w(`b${b}.ln1.g`), this.w(`b${b}.ln1.b`)),
        maskAdd,
        b,
      );
      h = h.add(attnOut) as tf.Tensor3D;
      const mlpOut = this.mlp(this.layerNorm(h, this.w(`b${b}.ln2.g`), this.w(`b${b}.ln2.b`)), b);
      h = h.add(mlpOut) as tf.Tensor3D;
      const pooled = this.pool(h, mask);
      exitLogits.push(
        pooled
          .matMul(this.w(`exit${b}.w`) as tf.Tensor2D)
          .add(this.w(`exit${b}.b`)) as tf.Tensor2D,
      );
    }
    return { embedding, exitLogits };
  }

  trainableVariables(): tf.Variable[] {
    return [...this.weights.values()];
  }

  /** Copy all weights out as plain arrays (checkpoint payload). */
  dump(): Record<string, { shape: number[]; values: number[] }> {
    const out: Record<string, { shape: number[]; values: number[] }> = {};
    for (const [name, variable] of this.weights) {
      out[name] = { shape: variable.shape.slice(), values: [...variable.dataSync()] };
    }
    return out;
  }

  /** Overwrite all weights from a dump. */
  restore(dump: Record<string, { shape: number[]; values: number[] }>): void {
    for (const [name, variable] of this.weights) {
      const entry = dump[name];
      if (!entry) throw new Error(`checkpoint missing weight ${name}`);
      variable.assign(tf.tensor(entry.values, entry.shape as number[]));
    }
  }
}

/** Mean cross-entropy of one exit's logits against integer labels. */
export function exitLoss(logits: tf.Tensor2D, labels: tf.Tensor1D): tf.Scalar {
  const logProbs = logits.sub(logits.logSumExp(-1, true));
  const picked = tf.gather(logProbs, labels.expandDims(1) as tf.Tensor2D, 1, 1);
  return picked.mean().neg() as tf.Scalar;
}

/** The training objective: per-exit cross-entropies summed over all exits. */
export function jointLoss(exitLogits: tf.Tensor2D[], labels: tf.Tensor1D): tf.Scalar {
  let total: tf.Scalar = tf.scalar(0);
  for (const logits of exitLogits) {
    total = total.add(exitLoss(logits, labels));
  }
  return total;
}
