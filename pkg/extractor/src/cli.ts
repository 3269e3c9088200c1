#!/usr/bin/env node
/**
 * f2be-extract: face images -> F2BE embedding file.
 *
 *   f2be-extract extract --manifest m.csv --weights w.json --out e.f2be \
 *       [--backbone face-descriptor|generic-object] [--layer fc6] \
 *       [--center-crop] [--failures-report failures.csv]
 *   f2be-extract gen-weights --backbone face-descriptor --seed 7 --out w.json
 */

import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { BACKBONES, BackboneKind, generateWeights } from './backbone.js'
import { extract, readManifest, writeFailuresReport } from './extract.js'

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .command('extract', 'extract descriptors for a manifest of images', (y) =>
      y
        .option('manifest', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('weights', { type: 'string', demandOption: true })
        .option('backbone', { choices: BACKBONES, default: 'face-descriptor' as BackboneKind })
        .option('layer', { type: 'string', default: 'fc6' })
        .option('center-crop', { type: 'boolean', default: false })
        .option('failures-report', { type: 'string' }),
    )
    .command('gen-weights', 'write deterministic synthetic backbone weights', (y) =>
      y
        .option('out', { type: 'string', demandOption: true })
        .option('backbone', { choices: BACKBONES, default: 'face-descriptor' as BackboneKind })
        .option('seed', { type: 'number', default: 0 }),
    )
    .demandCommand(1)
    .strict()
    .parse()

  const command = String(argv._[0])
  if (command === 'gen-weights') {
    generateWeights(argv.backbone as BackboneKind, argv.seed as number, argv.out as string)
    console.log(`${argv.backbone} weights (seed ${argv.seed}) -> ${argv.out}`)
    return 0
  }
  if (command === 'extract') {
    const manifest = readManifest(argv.manifest as string)
    const result = await extract(manifest, argv.out as string, {
      backbone: argv.backbone as BackboneKind,
      layer: argv.layer as string,
      weightsPath: argv.weights as string,
      centerCrop: Boolean(argv.centerCrop),
    })
    if (argv.failuresReport) {
      writeFailuresReport(argv.failuresReport as string, result.failures)
    }
    console.log(
      `${result.count} vectors (dim ${result.dim}) -> ${argv.out}` +
        (result.failures.length ? `; ${result.failures.length} failure(s)` : ''),
    )
    return 0
  }
  console.error(`unknown command ${command}`)
  return 1
}

main().then(
  (code) => process.exit(code),
  (err) => {
    console.error(`error: ${err instanceof Error ? err.message : err}`)
    process.exit(1)
  },
)
