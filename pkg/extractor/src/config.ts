/**
 * Training configuration for the multi-exit encoder.
 *
 * Grid fields hold the candidate values searched during training; both
 * must be non-empty. The checkpoint kept is the grid point with the best
 * validation accuracy at the final exit.
 */

export interface ExitTrainingConfig {
  backbone: string;
  dataset: string;
  epochs: number;
  batchSizes: number[];
  learningRates: number[];
  patience: number;
  seed: number;
  /** token pooling for the exported embedding: mean over positions or first token */
  poolMode: 'mean' | 'first';
  numSamples: number;
}

export interface BackboneShape {
  numLayers: number;
  dModel: number;
  numHeads: number;
  mlpHidden: number;
  maxSeqLen: number;
}

const BACKBONES: Record<string, BackboneShape> = {
  'tiny-encoder-4l': { numLayers: 4, dModel: 32, numHeads: 2, mlpHidden: 64, maxSeqLen: 12 },
  'tiny-encoder-2l': { numLayers: 2, dModel: 16, numHeads: 2, mlpHidden: 32, maxSeqLen: 12 },
};

export function backboneShape(name: string): BackboneShape {
  const shape = BACKBONES[name];
  if (!shape) {
    throw new Error(`unknown backbone '${name}'; known: ${Object.keys(BACKBONES).join(', ')}`);
  }
  return shape;
}

export function defaultConfig(overrides: Partial<ExitTrainingConfig> = {}): ExitTrainingConfig {
  const config: ExitTrainingConfig = {
    backbone: 'tiny-encoder-4l',
    dataset: 'synthetic-sentiment',
    epochs: 4,
    batchSizes: [16],
    learningRates: [3e-3],
    patience: 2,
    seed: 42,
    poolMode: 'mean',
    numSamples: 1200,
    ...overrides,
  };
  validateConfig(config);
  return config;
}

export function validateConfig(config: ExitTrainingConfig): void {
  if (config.epochs < 1) throw new Error(`epochs must be >= 1, got ${config.epochs}`);
  if (config.batchSizes.length === 0) throw new Error('batchSizes grid must be non-empty');
  if (config.learningRates.length === 0) throw new Error('learningRates grid must be non-empty');
  if (config.patience < 1) throw new Error(`patience must be >= 1, got ${config.patience}`);
  backboneShape(config.backbone);
}
