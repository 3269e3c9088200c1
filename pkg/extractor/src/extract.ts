/**
 * Batch extraction: manifest of (record_id, image_path) rows in, F2BE out.
 *
 * Undecodable or missing images are collected into a failures report and
 * the run continues; zero successful rows is an error. Output vectors are
 * written sorted by record id, so completion order never matters.
 */

import * as tf from '@tensorflow/tfjs'
import Papa from 'papaparse'
import { readFileSync, writeFileSync } from 'fs'
import { BackboneKind, descriptorModel, loadBackbone } from './backbone.js'
import { writeF2be } from './f2be.js'
import { loadImageInput } from './image.js'

export interface ManifestRow {
  recordId: string
  imagePath: string
}

export interface ExtractionFailure {
  recordId: string
  imagePath: string
  error: string
}

export interface ExtractOptions {
  backbone: BackboneKind
  layer: string
  weightsPath: string
  centerCrop: boolean
}

export interface ExtractResult {
  count: number
  dim: number
  failures: ExtractionFailure[]
}

export function readManifest(path: string): ManifestRow[] {
  const text = readFileSync(path, 'utf-8')
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  })
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0]
    throw new Error(`${path}: row ${(e.row ?? 0) + 2}: ${e.message}`)
  }
  const fields = parsed.meta.fields ?? []
  if (!fields.includes('record_id') || !fields.includes('image_path')) {
    throw new Error(`${path}: manifest needs header record_id,image_path`)
  }
  const seen = new Set<string>()
  const rows: ManifestRow[] = []
  for (const row of parsed.data) {
    const recordId = (row.record_id ?? '').trim()
    const imagePath = (row.image_path ?? '').trim()
    if (!recordId || !imagePath) throw new Error(`${path}: empty record_id or image_path`)
    if (seen.has(recordId)) throw new Error(`${path}: duplicate record_id ${recordId}`)
    seen.add(recordId)
    rows.push({ recordId, imagePath })
  }
  return rows
}

export async function extract(
  manifest: ManifestRow[],
  outPath: string,
  options: ExtractOptions,
): Promise<ExtractResult> {
  await tf.setBackend('cpu')
  await tf.ready()
  const backbone = loadBackbone(options.backbone, options.weightsPath)
  const model = descriptorModel(backbone, options.layer)

  const vectors = new Map<string, Float32Array>()
  const failures: ExtractionFailure[] = []
  const ordered = [...manifest].sort((a, b) => (a.recordId < b.recordId ? -1 : 1))
  let dim = 0
  for (const row of ordered) {
    let input: tf.Tensor4D
    try {
      input = loadImageInput(row.imagePath, options.centerCrop)
    } catch (err) {
      failures.push({
        recordId: row.recordId,
        imagePath: row.imagePath,
        error: err instanceof Error ? err.message : String(err),
      })
      continue
    }
    const output = tf.tidy(() => model.predict(input) as tf.Tensor)
    const values = new Float32Array(await output.data())
    dim = values.length
    vectors.set(row.recordId, values)
    input.dispose()
    output.dispose()
  }
  backbone.dispose()
  if (vectors.size === 0) {
    throw new Error(`no images could be processed (${failures.length} failures)`)
  }
  writeF2be(outPath, vectors)
  return { count: vectors.size, dim, failures }
}

export function writeFailuresReport(path: string, failures: ExtractionFailure[]): void {
  const lines = ['record_id,image_path,error']
  for (const f of failures) {
    const esc = (s: string) => (/[",\n]/.test(s) ? `"${s.replace(/"/g, '""')}"` : s)
    lines.push([f.recordId, f.imagePath, f.error].map(esc).join(','))
  }
  writeFileSync(path, lines.join('\n') + '\n')
}
