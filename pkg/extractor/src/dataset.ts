/**
 * Template-generated sentiment corpus with a fixed vocabulary.
 *
 * Three sentence forms of increasing difficulty: plain polarity
 * statements, padded statements with neutral trailers, and flipped or
 * contrastive forms (negation, "but" clauses) whose label depends on
 * more than one token. Generation is a pure function of the seed.
 */

export interface Example {
  id: string;
  tokens: string[];
  label: number; // 0 negative, 1 positive
  form: 'plain' | 'padded' | 'negated' | 'contrast';
}

export interface DatasetSplits {
  train: Example[];
  validation: Example[];
  test: Example[];
}

const SUBJECTS = [
  'the movie', 'the film', 'this show', 'the plot', 'the acting',
  'the script', 'the soundtrack', 'the ending', 'the dialogue', 'the pacing',
];
const VERBS = ['was', 'felt', 'seemed', 'looked'];
const POSITIVE = ['great', 'wonderful', 'brilliant', 'moving', 'sharp', 'delightful', 'superb', 'charming'];
const NEGATIVE = ['awful', 'boring', 'clumsy', 'dull', 'tedious', 'flat', 'messy', 'forgettable'];
const INTENSIFIERS = ['really', 'truly', 'absolutely', 'quite'];
const TRAILERS = [['in', 'the', 'end'], ['all', 'things', 'considered'], ['on', 'the', 'whole']];

export const PAD = '<pad>';
export const UNK = '<unk>';

/** Deterministic 32-bit PRNG (mulberry32); portable across platforms. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function pick<T>(rng: () => number, items: T[]): T {
  return items[Math.floor(rng() * items.length)];
}

export function buildVocab(): string[] {
  const words = new Set<string>([PAD, UNK, 'not', 'but', 'i', 'loved', 'hated']);
  for (const phrase of [...SUBJECTS, ...VERBS, ...POSITIVE, ...NEGATIVE, ...INTENSIFIERS]) {
    for (const w of phrase.split(' ')) words.add(w);
  }
  for (const trailer of TRAILERS) for (const w of trailer) words.add(w);
  return [...words].sort();
}

function makeExample(rng: () => number, index: number): Example {
  const subject = pick(rng, SUBJECTS).split(' ');
  const verb = pick(rng, VERBS);
  const positive = rng() < 0.5;
  const adj = positive ? pick(rng, POSITIVE) : pick(rng, NEGATIVE);
  const roll = rng();
  let tokens: string[];
  let label: number;
  let form: Example['form'];
  if (roll < 0.4) {
    const withIntensifier = rng() < 0.5;
    tokens = withIntensifier
      ? [...subject, verb, pick(rng, INTENSIFIERS), adj]
      : [...subject, verb, adj];
    label = positive ? 1 : 0;
    form = 'plain';
  } else if (roll < 0.65) {
    tokens = [...subject, verb, adj, ...pick(rng, TRAILERS)];
    label = positive ? 1 : 0;
    form = 'padded';
  } else if (roll < 0.85) {
    tokens = [...subject, verb, 'not', adj];
    label = positive ? 0 : 1;
    form = 'negated';
  } else {
    const otherPositive = !positive;
    const otherAdj = otherPositive ? pick(rng, POSITIVE) : pick(rng, NEGATIVE);
    // the clause after "but" carries the sentence label
    tokens = [...subject, verb, adj, 'but', ...pick(rng, SUBJECTS).split(' '), verb, otherAdj];
    label = otherPositive ? 1 : 0;
    form = 'contrast';
  }
  return { id: `x${String(index).padStart(5, '0')}-${form}`, tokens, label, form };
}

export function generateDataset(numSamples: number, seed: number): DatasetSplits {
  const rng = mulberry32(seed);
  const examples: Example[] = [];
  for (let i = 0; i < numSamples; i++) examples.push(makeExample(rng, i));
  const nTrain = Math.floor(numSamples * 0.8);
  const nVal = Math.floor(numSamples * 0.1);
  return {
    train: examples.slice(0, nTrain),
    validation: examples.slice(nTrain, nTrain + nVal),
    test: examples.slice(nTrain + nVal),
  };
}

export function encode(
  tokens: string[],
  vocab: string[],
  maxSeqLen: number,
): { ids: number[]; mask: number[] } {
  const index = new Map(vocab.map((w, i) => [w, i]));
  const padId = index.get(PAD)!;
  const unkId = index.get(UNK)!;
  const ids = new Array<number>(maxSeqLen).fill(padId);
  const mask = new Array<number>(maxSeqLen).fill(0);
  tokens.slice(0, maxSeqLen).forEach((tok, i) => {
    ids[i] = index.get(tok) ?? unkId;
    mask[i] = 1;
  });
  return { ids, mask };
}

export function majorityRate(examples: Example[]): number {
  const positives = examples.filter((e) => e.label === 1).length;
  return Math.max(positives, examples.length - positives) / examples.length;
}
