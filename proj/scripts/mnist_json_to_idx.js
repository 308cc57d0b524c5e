#!/usr/bin/env node
// Builds IDX-format MNIST files from the digit JSONs shipped in the npm
// "mnist" package (normalized 28x28 grayscale, ~1000 samples per digit).
//
//   npm install mnist
//   node scripts/mnist_json_to_idx.js node_modules/mnist/src/digits data/mnist \
//        [train_per_digit] [test_per_digit]
//
// Output: train-images-idx3-ubyte / train-labels-idx1-ubyte plus the t10k
// pair, class-balanced and interleaved 0..9 so any prefix stays balanced.

const fs = require('fs');
const path = require('path');

function be32(value) {
  const b = Buffer.alloc(4);
  b.writeUInt32BE(value >>> 0);
  return b;
}

function writeIdx(dir, stem, images, labels) {
  const imgHeader = Buffer.concat([be32(0x803), be32(images.length), be32(28), be32(28)]);
  const labHeader = Buffer.concat([be32(0x801), be32(labels.length)]);
  fs.writeFileSync(path.join(dir, `${stem}-images-idx3-ubyte`),
                   Buffer.concat([imgHeader, ...images]));
  fs.writeFileSync(path.join(dir, `${stem}-labels-idx1-ubyte`),
                   Buffer.concat([labHeader, Buffer.from(labels)]));
}

function main() {
  const [digitsDir, outDir, trainArg, testArg] = process.argv.slice(2);
  if (!digitsDir || !outDir) {
    console.error('usage: mnist_json_to_idx.js <digits-json-dir> <out-dir> [train_n] [test_n]');
    process.exit(2);
  }
  const trainPerDigit = parseInt(trainArg || '500', 10);
  const testPerDigit = parseInt(testArg || '100', 10);
  fs.mkdirSync(outDir, { recursive: true });

  const perDigit = [];
  for (let d = 0; d < 10; d++) {
    const raw = JSON.parse(fs.readFileSync(path.join(digitsDir, `${d}.json`), 'utf8'));
    // Flat array of concatenated 784-pixel samples, values in [0, 1].
    const flat = raw.data ?? raw;
    const count = Math.floor(flat.length / 784);
    if (count < trainPerDigit + testPerDigit) {
      console.error(`digit ${d}: only ${count} samples available`);
      process.exit(1);
    }
    const samples = [];
    for (let i = 0; i < count; i++) {
      const pixels = Buffer.alloc(784);
      for (let k = 0; k < 784; k++) pixels[k] = Math.round(flat[i * 784 + k] * 255);
      samples.push(pixels);
    }
    perDigit.push(samples);
  }

  const interleave = (offset, count) => {
    const images = [], labels = [];
    for (let i = 0; i < count; i++)
      for (let d = 0; d < 10; d++) {
        images.push(perDigit[d][offset + i]);
        labels.push(d);
      }
    return { images, labels };
  };

  const train = interleave(0, trainPerDigit);
  const test = interleave(trainPerDigit, testPerDigit);
  writeIdx(outDir, 'train', train.images, train.labels);
  writeIdx(outDir, 't10k', test.images, test.labels);
  console.log(`wrote ${train.images.length} train and ${test.images.length} test samples to ${outDir}`);
}

main();
