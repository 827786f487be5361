/**
 * Train the multi-exit encoder and export validation/test traces for the
 * routing engine. Usage: npx tsx src/main.ts [outDir]
 */

import * as path from 'node:path';

import { defaultConfig } from './config';
import { generateDataset, majorityRate } from './dataset';
import { exportTraces } from './export';
import { saveCheckpoint, trainExits } from './train';

function main(): void {
  const outDir = process.argv[2] ?? path.join(__dirname, '..', 'out');
  const config = defaultConfig();
  const splits = generateDataset(config.numSamples, config.seed);
  console.log(
    `training ${config.backbone} on ${splits.train.length} samples ` +
      `(majority rate ${majorityRate(splits.validation).toFixed(3)} on validation)`,
  );

  const started = Date.now();
  const checkpoint = trainExits(config);
  console.log(
    `best grid point: batch=${checkpoint.meta.batchSize} lr=${checkpoint.meta.learningRate} ` +
      `val acc=${checkpoint.meta.valAccuracy.toFixed(4)} ` +
      `(${checkpoint.meta.epochsRun} epochs, ${((Date.now() - started) / 1000).toFixed(1)}s)`,
  );
  saveCheckpoint(checkpoint, path.join(outDir, 'checkpoint.json'));

  for (const split of ['validation', 'test'] as const) {
    const records = exportTraces(checkpoint, split, path.join(outDir, split));
    console.log(`exported ${records.length} ${split} traces to ${path.join(outDir, split)}`);
  }
  console.log('feed these to the routing engine, e.g.');
  console.log(`  tierroute calibrate --traces ${path.join(outDir, 'validation')} --m 1 --n 2 --out cal.json`);
}

main();
